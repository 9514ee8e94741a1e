import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmo import linalg
from mmo.verify import random_pd, random_psd

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 6)


def test_herm_eig_diagonal_orders():
    m = np.diag([1.0, 3.0, 2.0])
    assert np.allclose(linalg.herm_eig(m, "descending").eigenvalues, [3, 2, 1])
    assert np.allclose(linalg.herm_eig(m, "ascending").eigenvalues, [1, 2, 3])


def test_herm_eig_rejects_bad_input():
    with pytest.raises(linalg.NonHermitian):
        linalg.herm_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(linalg.NonFinite):
        linalg.herm_eig(np.array([[np.nan, 0], [0, 1.0]]))
    with pytest.raises(ValueError):
        linalg.herm_eig(np.eye(2), "sideways")


@given(seeds, dims)
def test_herm_eig_reconstructs(seed, n):
    rng = np.random.default_rng(seed)
    m = random_psd(rng, n) - 0.5 * np.eye(n)
    e = linalg.herm_eig(m)
    u = e.eigenvectors
    assert np.linalg.norm(u.conj().T @ u - np.eye(n)) <= 1e-10 * np.sqrt(n)
    assert np.linalg.norm(e.reconstruct() - m) <= 1e-9 * np.linalg.norm(m)
    assert np.all(np.diff(e.eigenvalues) <= 0)


def test_svd_examples():
    assert np.all(linalg.svd(np.zeros((2, 3))).singular_values == 0)
    assert np.allclose(linalg.svd(np.diag([2.0, -1.0])).singular_values, [2, 1])


@given(seeds, dims, dims)
def test_svd_reconstructs(seed, m, n):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    d = linalg.svd(a)
    assert d.U.shape == (m, m) and d.V.shape == (n, n)
    assert np.linalg.norm(d.reconstruct() - a) <= 1e-9 * np.linalg.norm(a)
    assert np.all(np.diff(d.singular_values) <= 0) and np.all(d.singular_values >= 0)


def test_svd_rejects_nonfinite():
    with pytest.raises(linalg.NonFinite):
        linalg.svd(np.array([[np.inf]]))


def test_psd_sqrt_examples():
    assert np.allclose(linalg.psd_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(linalg.psd_sqrt(np.diag([4.0, 9.0])), np.diag([2, 3]))
    with pytest.raises(linalg.NotPSD):
        linalg.psd_sqrt(np.diag([1.0, -0.1]))
    # round-off negatives are clamped
    assert np.allclose(linalg.psd_sqrt(np.diag([1.0, -1e-12])), np.diag([1, 0]))


@given(seeds, dims)
def test_psd_sqrt_squares_back(seed, n):
    m = random_psd(np.random.default_rng(seed), n, rank=max(1, n - 1))
    r = linalg.psd_sqrt(m)
    assert np.linalg.norm(r @ r - m) <= 1e-9 * max(np.linalg.norm(m), 1.0)


def test_psd_inv_sqrt_examples():
    assert np.allclose(linalg.psd_inv_sqrt(np.eye(2)), np.eye(2))
    assert np.allclose(linalg.psd_inv_sqrt(np.array([[4.0]])), [[0.5]])
    with pytest.raises(linalg.Singular):
        linalg.psd_inv_sqrt(np.diag([1.0, 0.0]))


@given(seeds, dims)
def test_psd_inv_sqrt_sandwich(seed, n):
    m = random_pd(np.random.default_rng(seed), n)
    s = linalg.psd_inv_sqrt(m)
    assert np.linalg.norm(s @ m @ s - np.eye(n)) <= 1e-8


def test_kron_examples():
    assert np.array_equal(linalg.kron(np.eye(2), np.eye(3)), np.eye(6))
    assert np.allclose(linalg.kron(np.diag([1.0, 2.0]), np.array([[3.0]])), np.diag([3, 6]))


@given(seeds)
def test_kron_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(4))
    lhs = linalg.kron(a, b) @ linalg.kron(c, d)
    assert np.abs(lhs - linalg.kron(a @ c, b @ d)).max() <= 1e-12 * max(np.abs(lhs).max(), 1)


def test_loewner_examples():
    i = np.eye(2)
    assert linalg.loewner_geq(2 * i, i)
    assert not linalg.loewner_geq(i, 2 * i)
    assert not linalg.loewner_geq(np.diag([2.0, 0.0]), i)
    with pytest.raises(linalg.DimensionMismatch):
        linalg.loewner_geq(np.eye(2), np.eye(3))


@given(seeds, dims)
def test_loewner_adding_psd(seed, n):
    rng = np.random.default_rng(seed)
    a = random_psd(rng, n)
    assert linalg.loewner_geq(a + random_psd(rng, n), a)


@given(seeds, dims)
def test_logdet_matches_numpy(seed, n):
    m = random_pd(np.random.default_rng(seed), n)
    assert np.isclose(linalg.logdet_pd(m), np.linalg.slogdet(m)[1], rtol=1e-10, atol=1e-12)


def test_logdet_rejects_singular():
    with pytest.raises(linalg.Singular):
        linalg.logdet_pd(np.diag([1.0, 0.0]))


def test_random_unitary_is_haar_like():
    rng = np.random.default_rng(0)
    us = np.array([linalg.random_unitary(3, rng) for _ in range(4000)])
    assert np.allclose(np.einsum("kij,kil->kjl", us.conj(), us), np.eye(3), atol=1e-12)
    # E|u_ij|^2 = 1/n for Haar unitaries
    assert np.allclose(np.mean(np.abs(us) ** 2, axis=0), 1 / 3, atol=0.02)
