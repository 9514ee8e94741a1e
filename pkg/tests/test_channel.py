import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmo import channel

N = 10_000


def test_build_correlations_examples():
    psi, sigma = channel.build_correlations(channel.ExpCorrModel(0.0, 0.0, 0.01))
    assert np.allclose(psi, 0.01 * np.eye(4))
    assert np.allclose(sigma, np.eye(4))
    psi, _ = channel.build_correlations(channel.ExpCorrModel(0.45, 0.45, 0.001))
    assert np.isclose(psi[0, 1], 0.00045)


@given(st.floats(0, 0.99), st.floats(0, 0.99), st.floats(1e-4, 0.5), st.integers(1, 6))
def test_correlations_are_psd(a, b, s2, n):
    psi, sigma = channel.build_correlations(channel.ExpCorrModel(a, b, s2, n, n))
    assert np.allclose(psi, psi.conj().T) and np.linalg.eigvalsh(psi).min() >= -1e-12
    assert np.allclose(np.diag(sigma), 1) and np.linalg.eigvalsh(sigma).min() >= -1e-12


@pytest.mark.parametrize("kw", [{"alpha_t": 1.0}, {"beta_r": -0.1}, {"sigma_e2": 0.0},
                                {"sigma_e2": 1.0}, {"n_t": 0}])
def test_model_validation(kw):
    with pytest.raises(ValueError):
        channel.ExpCorrModel(**kw)


@given(st.integers(0, 2**31))
def test_draw_deterministic_and_additive(seed):
    m = channel.ExpCorrModel(0.3, 0.6, 0.05, 3, 2)
    a, b = channel.sample_channel(m, seed), channel.sample_channel(m, seed)
    assert np.array_equal(a.h, b.h)
    assert np.array_equal(a.h, a.h_bar + a.delta_h)
    assert a.h.shape == (2, 3)


def _moment_ok(x, target, k=3.0):
    return abs(x.mean() - target) <= k * x.std(ddof=1) / np.sqrt(len(x))


def test_error_variance_uncorrelated():
    m = channel.ExpCorrModel(0.0, 0.0, 0.01)
    d = np.array([channel.sample_channel(m, s).delta_h for s in range(N)])
    for i, j in [(0, 0), (1, 3), (3, 2)]:
        assert _moment_ok(np.abs(d[:, i, j]) ** 2, 0.01)


def test_channel_unit_variance():
    m = channel.ExpCorrModel(0.45, 0.45, 0.1)
    h = np.array([channel.sample_channel(m, s).h for s in range(N)])
    for i, j in [(0, 0), (2, 1), (3, 3)]:
        assert _moment_ok(np.abs(h[:, i, j]) ** 2, 1.0)


def test_hops_are_distinct_and_reproducible():
    m = channel.ExpCorrModel()
    a = channel.sample_hops(m, 3, 5)
    b = channel.sample_hops(m, 3, 5)
    assert all(np.array_equal(x.h, y.h) for x, y in zip(a, b))
    assert not np.allclose(a[0].h, a[1].h)


def test_db_roundtrip():
    assert channel.db_to_linear(20) == pytest.approx(100)
    assert channel.linear_to_db(1000) == pytest.approx(30)
