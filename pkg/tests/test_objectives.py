import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmo import core, linalg, objectives, unitary
from mmo.cases import ObjectiveCase
from mmo.core import BoundMode, ProblemSpec
from mmo.objectives import eval_f_inner, eval_f_matrix, eval_f_vector
from mmo.verify import random_pd, random_psd, random_spec, sample_cases

seeds = st.integers(0, 2**32 - 1)


def _white_spec(h, p=1.0):
    h = np.asarray(h, dtype=complex)
    return ProblemSpec(h, np.zeros((h.shape[1],) * 2), np.eye(h.shape[0]), 1.0, p)


def test_zero_signal_values(rng):
    n = random_pd(rng, 3)
    spec = _white_spec(np.eye(3))
    x = np.zeros((3, 3))
    assert eval_f_matrix(ObjectiveCase(1, n_mat=n), x, spec) == pytest.approx(-np.linalg.slogdet(n)[1])
    assert eval_f_matrix(ObjectiveCase(3, n_mat=n), x, spec) == pytest.approx(np.trace(np.linalg.inv(n)).real)


def test_vector_examples():
    assert eval_f_vector(ObjectiveCase(1, n_mat=np.eye(3)), np.zeros(3)) == pytest.approx(0.0)
    assert eval_f_vector(ObjectiveCase(3, n_mat=np.eye(2)), [1.0, 1.0]) == pytest.approx(1.0)


def test_registry_scalars():
    reg = objectives.named_scalar_objectives()
    d = np.array([0.25, 0.5])
    assert reg["sum-mse"].scalar_fn(d) == pytest.approx(0.75)
    assert reg["max-mse"].scalar_fn(d) == pytest.approx(0.5)
    # capacity: -sum log of the MSE eigenvalues 1/(1+lambda)
    cap = -eval_f_vector(reg["capacity"].case(), [1.0, 3.0])
    assert cap == pytest.approx(np.log(2) + np.log(4))
    with pytest.raises(objectives.UnknownObjective):
        objectives.get_objective("nope")


def test_mse_matrix_examples(rng):
    spec = _white_spec(np.eye(3), p=6.0)
    assert np.allclose(objectives.mse_matrix(np.zeros((3, 3)), np.eye(3), spec), np.eye(3))
    f = np.sqrt(6.0 / 3) * np.eye(3)
    assert np.allclose(objectives.mse_matrix(f, linalg.random_unitary(3, rng), spec), np.eye(3) / 3)


@given(seeds)
def test_mse_matrix_spectrum(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng)
    sol = core.solve(spec)
    e = objectives.mse_matrix(sol.f_opt, linalg.random_unitary(4, rng), spec)
    w = np.linalg.eigvalsh(e)
    assert w.min() > 0 and w.max() <= 1 + 1e-12


@given(seeds)
def test_matrix_and_vector_forms_agree(seed):
    rng = np.random.default_rng(seed)
    for case in sample_cases(rng, 4):
        m = random_psd(rng, 4) * 3
        q = unitary.optimal_q(case, m).q
        a = eval_f_inner(case, q.conj().T @ m @ q)
        assert a == pytest.approx(eval_f_vector(case, np.linalg.eigvalsh(m)), rel=1e-9, abs=1e-12)


@given(seeds)
def test_design_objective_uses_full_solution(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng)
    for name, obj in objectives.named_scalar_objectives().items():
        sol = objectives.design(spec, name)
        m = core.effective_snr_matrix(sol.f_opt, spec)
        val = eval_f_matrix(obj.case(), sol.f_opt @ sol.q_opt, spec)
        assert val == pytest.approx(eval_f_vector(obj.case(), np.linalg.eigvalsh(m)), rel=1e-9, abs=1e-12)


@given(seeds, st.integers(0, 3), st.floats(1e-3, 5.0))
def test_vector_form_is_decreasing(seed, i, bump):
    rng = np.random.default_rng(seed)
    lam = np.sort(rng.uniform(0, 5, 4))[::-1]
    for case in sample_cases(rng, 4):
        up = lam.copy()
        up[i] += bump
        assert eval_f_vector(case, up) <= eval_f_vector(case, lam) + 1e-12


@given(seeds)
def test_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    m = random_psd(rng, 4)
    u = linalg.random_unitary(4, rng)
    for case in sample_cases(rng, 4):
        a = eval_f_vector(case, np.linalg.eigvalsh(m))
        b = eval_f_vector(case, np.linalg.eigvalsh(u @ m @ u.conj().T))
        assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


@given(seeds)
def test_max_mse_after_rotation_is_average(seed):
    rng = np.random.default_rng(seed)
    m = random_psd(rng, 4)
    q = unitary.optimal_q(objectives.get_objective("max-mse").case(), m).q
    e = np.linalg.inv(q.conj().T @ m @ q + np.eye(4))
    assert np.max(np.diag(e).real) == pytest.approx(np.trace(e).real / 4, rel=1e-10)


def test_eval_matrix_checks_shape():
    with pytest.raises(linalg.DimensionMismatch):
        eval_f_matrix(ObjectiveCase(3, n_mat=np.eye(2)), np.zeros((3, 2)), _white_spec(np.eye(2)))
