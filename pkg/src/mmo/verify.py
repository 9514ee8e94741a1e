"""Named invariant checks, shared by ``mmo verify`` and the test suite.

Each check takes a ``numpy.random.Generator`` and raises AssertionError
with a descriptive message on failure.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bench, channel, core, linalg, multihop, objectives, unitary
from .cases import ObjectiveCase, Schur
from .core import BoundMode, ProblemSpec

__all__ = ["Check", "CHECKS", "CheckResult", "run_checks", "random_spec", "random_psd", "random_pd"]


@dataclass(frozen=True)
class Check:
    name: str
    module: str
    fn: Callable[[np.random.Generator], None]


@dataclass(frozen=True)
class CheckResult:
    name: str
    module: str
    passed: bool
    message: str
    seconds: float


CHECKS: list[Check] = []


def check(module: str):
    def deco(fn):
        CHECKS.append(Check(fn.__name__.removeprefix("check_"), module, fn))
        return fn
    return deco


def _cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_psd(rng, n, rank=None):
    z = _cn(rng, n, rank or n)
    return z @ z.conj().T / n


def random_pd(rng, n, floor=0.1):
    return random_psd(rng, n) + floor * np.eye(n)


def random_spec(rng, n_t=4, n_r=4, psi_identity=False, sigma_identity=False, power=None):
    h = _cn(rng, n_r, n_t)
    psi = 0.05 * (np.eye(n_t) if psi_identity else random_psd(rng, n_t))
    sigma = np.eye(n_r) if sigma_identity else random_pd(rng, n_r, 0.2)
    p = float(power if power is not None else 10 ** rng.uniform(0, 2))
    return ProblemSpec(h, psi, sigma, float(rng.uniform(0.5, 2.0)), p)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------- linalg

@check("linalg")
def check_ordering_contract(rng):
    for n in (1, 3, 5):
        m = random_psd(rng, n) - 0.3 * np.eye(n)
        d = linalg.herm_eig(m, "descending").eigenvalues
        a = linalg.herm_eig(m, "ascending").eigenvalues
        assert np.all(np.diff(d) <= 0), "descending spectrum increases"
        assert np.all(np.diff(a) >= 0), "ascending spectrum decreases"
        s = linalg.svd(_cn(rng, n, n + 2)).singular_values
        assert np.all(np.diff(s) <= 0) and np.all(s >= 0), "singular values not non-increasing"


@check("linalg")
def check_unitarity(rng):
    for n in (2, 4, 6):
        m = random_psd(rng, n)
        e = linalg.herm_eig(m)
        assert np.linalg.norm(e.eigenvectors.conj().T @ e.eigenvectors - np.eye(n)) <= 1e-9 * np.sqrt(n)
        assert np.linalg.norm(e.reconstruct() - m) <= 1e-9 * np.linalg.norm(m)
        d = linalg.svd(_cn(rng, n, n + 1))
        for u in (d.U, d.V):
            k = u.shape[0]
            assert np.linalg.norm(u.conj().T @ u - np.eye(k)) <= 1e-9 * np.sqrt(k), "SVD factor not unitary"


@check("linalg")
def check_sqrt_idempotence(rng):
    for n in (2, 4):
        m = random_psd(rng, n)
        r = linalg.psd_sqrt(m)
        assert np.linalg.norm(r @ r - m) <= 1e-9 * max(np.linalg.norm(m), 1.0)
        pd = random_pd(rng, n)
        s = linalg.psd_inv_sqrt(pd)
        assert np.linalg.norm(s @ pd @ s - np.eye(n)) <= 1e-8


@check("linalg")
def check_kron_mixed_product(rng):
    a, b, c, d = (_cn(rng, 2, 2) for _ in range(4))
    lhs = linalg.kron(a, b) @ linalg.kron(c, d)
    rhs = linalg.kron(a @ c, b @ d)
    assert np.abs(lhs - rhs).max() <= 1e-12 * max(np.abs(rhs).max(), 1.0)


# ---------------------------------------------------------------- channel

@check("channel")
def check_channel_sum_and_determinism(rng):
    model = channel.ExpCorrModel(0.45, 0.45, 0.01)
    seed = int(rng.integers(1 << 30))
    a = channel.sample_channel(model, seed)
    b = channel.sample_channel(model, seed)
    assert np.array_equal(a.h, a.h_bar + a.delta_h), "h != h_bar + delta_h"
    assert np.array_equal(a.h, b.h), "same seed gave different draws"


@check("channel")
def check_error_covariance_identity(rng):
    model = channel.ExpCorrModel(0.6, 0.5, 0.1, 3, 3)
    psi, sigma = channel.build_correlations(model)
    base = int(rng.integers(1 << 30))
    n = 10_000
    draws = np.array([channel.sample_channel(model, base + t).delta_h for t in range(n)])
    for (i, j), (k, l) in [((0, 0), (0, 0)), ((0, 0), (1, 1)), ((0, 1), (2, 0)), ((1, 2), (1, 0))]:
        x = draws[:, i, j] * np.conj(draws[:, k, l])
        target = sigma[i, k] * psi[j, l]
        se = np.sqrt(np.var(x.real) / n + np.var(x.imag) / n)
        assert abs(x.mean() - target) <= 4 * se + 1e-12, f"E[dH{i}{j} dH{k}{l}*] off: {x.mean()} vs {target}"
    # independence of estimate and error
    hb = np.array([channel.sample_channel(model, base + t).h_bar for t in range(2000)])
    x = hb[:, 0, 0] * np.conj(draws[:2000, 0, 0])
    se = np.sqrt(np.var(x.real) / 2000 + np.var(x.imag) / 2000)
    assert abs(x.mean()) <= 4 * se, "estimate and error are correlated"


@check("channel")
def check_snr_roundtrip(rng):
    x = rng.uniform(-20, 40, 10)
    assert np.allclose(channel.linear_to_db(channel.db_to_linear(x)), x, atol=1e-12)


# ---------------------------------------------------------------- mmop-core

def _solution_invariants(spec, sol):
    f = sol.f_opt
    p = spec.power
    assert _rel(np.real(np.trace(f @ f.conj().T)), p) <= 1e-8, "power not on the boundary"
    eta_fixed = np.real(np.trace(f @ f.conj().T @ spec.psi)) * sol.basis.alpha + spec.noise_var
    assert _rel(sol.eta_f, eta_fixed) <= 1e-8, "eta closed form disagrees with the fixed-point form"
    w = sol.basis.alpha * p * spec.psi + spec.noise_var * np.eye(spec.n_t)
    assert _rel(np.real(np.trace(f @ f.conj().T @ w)) / sol.eta_f, p) <= 1e-8, "whitened power identity fails"
    g = sol.bound_eigenvalues
    assert np.all(np.diff(g) <= 1e-10 * max(g.max(initial=0), 1e-300)), "eigenmode SNRs not non-increasing"


@check("mmop-core")
def check_solution_invariants(rng):
    for _ in range(20):
        spec = random_spec(rng)
        for mode in (BoundMode.LOWER, BoundMode.UPPER):
            _solution_invariants(spec, core.solve(spec, mode))


@check("mmop-core")
def check_pi_reconstruction(rng):
    spec = random_spec(rng, 3, 5)
    b = core.reduce_to_mmop(spec)
    s = np.zeros((spec.n_r, spec.n_t))
    s[np.arange(3), np.arange(3)] = b.lambda_pi
    assert np.linalg.norm(b.u_pi @ s @ b.v_pi.conj().T - b.pi) <= 1e-9 * np.linalg.norm(b.pi)


@check("mmop-core")
def check_loewner_sandwich(rng):
    for _ in range(20):
        spec = random_spec(rng)
        for mode in (BoundMode.LOWER, BoundMode.UPPER):
            sol = core.solve(spec, mode)
            k = core.noise_covariance(sol.f_opt, spec.psi, spec.sigma, spec.noise_var) / sol.eta_f
            m_true = core.effective_snr_matrix(sol.f_opt, spec)
            ft = sol.basis.v_pi[:, : len(sol.lambda_f)] * sol.lambda_f
            m_bound = ft.conj().T @ sol.basis.pi.conj().T @ sol.basis.pi @ ft
            if mode is BoundMode.LOWER:
                assert linalg.loewner_geq(sol.basis.k_psi, k), "K_F/eta exceeds K_Psi in lower mode"
                assert linalg.loewner_geq(m_true, m_bound), "lower bound exceeds the true objective"
            else:
                assert linalg.loewner_geq(k, sol.basis.k_psi), "K_F/eta below K_Psi in upper mode"
                assert linalg.loewner_geq(m_bound, m_true), "upper bound below the true objective"


@check("mmop-core")
def check_bound_gap_monotone(rng):
    """Upper/lower gap is nonnegative in the composite gains and vanishes as sigma_e2 -> 0."""
    base = channel.ExpCorrModel(0.45, 0.45, 0.1)
    seed = int(rng.integers(1 << 30))
    draw = channel.sample_channel(base, seed)
    gaps = []
    for s2 in (1e-1, 1e-2, 1e-3, 1e-6, 1e-9):
        psi, sigma = channel.build_correlations(dataclasses.replace(base, sigma_e2=s2))
        spec = ProblemSpec(draw.h_bar, psi, sigma, 1.0, 10.0)
        lo = core.reduce_to_mmop(spec, BoundMode.LOWER).lambda_pi ** 2
        up = core.reduce_to_mmop(spec, BoundMode.UPPER).lambda_pi ** 2
        assert np.all(up >= lo * (1 - 1e-12)), "upper composite gains below lower ones"
        gaps.append(float(np.max((up - lo) / lo)))
    assert all(b < a for a, b in zip(gaps, gaps[1:])), f"gap not decreasing: {gaps}"
    assert gaps[-1] <= 1e-6, f"gap does not vanish: {gaps[-1]}"


@check("mmop-core")
def check_exact_degeneracy(rng):
    spec = random_spec(rng, sigma_identity=True)
    lo = core.solve(spec, BoundMode.LOWER)
    up = core.solve(spec, BoundMode.UPPER)
    ex = core.solve(spec, BoundMode.EXACT)
    for s in (up, ex):
        assert np.allclose(s.f_opt, lo.f_opt, rtol=0, atol=1e-12), "modes disagree with Sigma = I"
    spec = random_spec(rng, psi_identity=True)
    bl = core.reduce_to_mmop(spec, BoundMode.LOWER)
    bu = core.reduce_to_mmop(spec, BoundMode.UPPER)
    assert np.allclose(bl.lambda_pi, bu.lambda_pi, rtol=1e-10), "Pi spectra differ with Psi ~ I"


@check("mmop-core")
def check_waterfill_kkt(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        g = np.sort(10 ** rng.uniform(-2, 2, n))[::-1]
        # weights with sqrt(w g) non-increasing
        r = np.sort(10 ** rng.uniform(-1, 1, n))[::-1]
        w = r ** 2 / g
        p = float(10 ** rng.uniform(-1, 2))
        f, mu = core.waterfill(g, w, p)
        assert _rel(f.sum(), p) <= 1e-10, "power budget missed"
        act = f > 0
        deriv = w * g / (g * f + 1) ** 2
        assert np.all(np.abs(deriv[act] - mu) <= 1e-9 * mu), "active modes not stationary"
        assert np.all(w[~act] * g[~act] <= mu * (1 + 1e-9)), "inactive mode should be active"
        s = g * f
        assert np.all(np.diff(s) <= 1e-10 * s.max()), "gain-power ordering fails"


@check("mmop-core")
def check_pareto_oracle(rng):
    for _ in range(3):
        spec = random_spec(rng, 2, 2, sigma_identity=True)
        sol = core.solve(spec, BoundMode.EXACT, weights=None)
        eig = np.linalg.eigvalsh(core.effective_snr_matrix(sol.f_opt, spec))[::-1]
        _, grid = core.pareto_oracle(spec, BoundMode.EXACT, grid=120)
        assert not np.any(core.dominated_by(eig, grid, 1e-6)), "a grid point dominates the closed form"


# ---------------------------------------------------------------- unitary

@check("unitary")
def check_inequality_containment(rng):
    for name, (bound, middle) in unitary.INEQUALITIES.items():
        for _ in range(5):
            n = int(rng.integers(2, 6))
            a = random_psd(rng, n)
            b = random_pd(rng, n) if name == "trace_inv_sum" else random_psd(rng, n)
            ib = bound(a, b)
            for q, target in ((ib.q_lower, ib.lower), (ib.q_upper, ib.upper)):
                assert _rel(middle(a, b, q), target) <= 1e-9, f"{name}: extremizer misses its bound"
            for _ in range(100):
                v = middle(a, b, linalg.random_unitary(n, rng))
                slack = 1e-9 * max(abs(ib.upper), 1.0)
                assert ib.lower - slack <= v <= ib.upper + slack, f"{name}: value escapes the bounds"


@check("unitary")
def check_det_commutation(rng):
    for _ in range(10):
        n = int(rng.integers(2, 6))
        a, b = random_psd(rng, n), random_psd(rng, n)
        i = np.eye(n)
        assert _rel(np.linalg.det(a @ b + i), np.linalg.det(b @ a + i)) <= 1e-10


@check("unitary")
def check_case4_factorization(rng):
    n = 3
    m, nm, m2 = random_psd(rng, n), random_pd(rng, n), random_pd(rng, 2)
    c4 = ObjectiveCase(4, n_mat=nm, m_mat=m2)
    c3 = ObjectiveCase(3, n_mat=nm)
    q = linalg.random_unitary(n, rng)
    t = q.conj().T @ m @ q
    ratio = objectives.eval_f_inner(c4, t) / objectives.eval_f_inner(c3, t)
    assert _rel(ratio, np.real(np.trace(np.linalg.inv(m2)))) <= 1e-10
    assert np.allclose(unitary.optimal_q(c4, m).q, unitary.optimal_q(c3, m).q)


def sample_cases(rng, n):
    a = _cn(rng, n, n)
    cases = [
        ObjectiveCase(1, n_mat=random_pd(rng, n)),
        ObjectiveCase(2, a_mat=a),
        ObjectiveCase(3, n_mat=random_pd(rng, n)),
        ObjectiveCase(4, n_mat=random_pd(rng, n), m_mat=random_pd(rng, 2)),
        ObjectiveCase(5, a_mat=a, n_mat=random_pd(rng, n)),
        ObjectiveCase(6, a_mat=_cn(rng, n, n + 1)),
    ]
    cases += [o.case() for o in objectives.named_scalar_objectives().values()]
    return cases


@check("unitary")
def check_case_optimality(rng):
    n = 4
    for case in sample_cases(rng, n):
        m = random_psd(rng, n) * 3
        q = unitary.optimal_q(case, m).q
        assert np.linalg.norm(q.conj().T @ q - np.eye(n)) <= 1e-10, "Q not unitary"
        best = objectives.eval_f_inner(case, q.conj().T @ m @ q)
        for _ in range(200):
            u = linalg.random_unitary(n, rng)
            v = objectives.eval_f_inner(case, u.conj().T @ m @ u)
            assert v >= best - 1e-9 * max(1.0, abs(best)), f"case {case.number} {case.label}: random Q beats Q_opt"


@check("unitary")
def check_equal_diag_rotation(rng):
    for n in (1, 2, 3, 5):
        m = random_pd(rng, n)
        q = unitary.equal_diag_cholesky_rotation(m).q
        l = np.linalg.cholesky(q.conj().T @ m @ q)
        d = np.real(np.diag(l))
        target = np.real(np.linalg.det(m)) ** (1 / (2 * n))
        assert d.max() / d.min() <= 1 + 1e-8 and _rel(d[0], target) <= 1e-8, "diagonal not equalized"


# ---------------------------------------------------------------- objectives

@check("objectives")
def check_matrix_vector_consistency(rng):
    n = 4
    for case in sample_cases(rng, n):
        m = random_psd(rng, n) * 2
        lam = np.linalg.eigvalsh(m)[::-1]
        q = unitary.optimal_q(case, m).q
        a = objectives.eval_f_inner(case, q.conj().T @ m @ q)
        b = objectives.eval_f_vector(case, lam)
        assert _rel(a, b) <= 1e-9 or abs(a - b) <= 1e-12, f"case {case.number} {case.label}: {a} vs {b}"
        us = [linalg.random_unitary(n, rng) for _ in range(1000)]
        low = min(objectives.eval_f_inner(case, u.conj().T @ m @ u) for u in us)
        assert low >= b - 1e-9 * max(1.0, abs(b)), f"case {case.number} {case.label}: sampled minimum below vector form"


@check("objectives")
def check_vector_monotone(rng):
    n = 4
    for case in sample_cases(rng, n):
        lam = np.sort(rng.uniform(0, 5, n))[::-1]
        base = objectives.eval_f_vector(case, lam)
        for i in range(n):
            bumped = lam.copy()
            bumped[i] += 0.5
            assert objectives.eval_f_vector(case, bumped) <= base + 1e-12, f"case {case.number} increases"


@check("objectives")
def check_unitary_invariance(rng):
    n = 4
    m = random_psd(rng, n)
    for case in sample_cases(rng, n):
        u = linalg.random_unitary(n, rng)
        a = objectives.eval_f_vector(case, np.linalg.eigvalsh(m))
        b = objectives.eval_f_vector(case, np.linalg.eigvalsh(u @ m @ u.conj().T))
        assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


@check("objectives")
def check_max_mse_dft(rng):
    n = 4
    m = random_psd(rng, n)
    q = unitary.optimal_q(objectives.get_objective("max-mse").case(), m).q
    e = np.linalg.inv(q.conj().T @ m @ q + np.eye(n))
    d = np.real(np.diag(e))
    assert _rel(d.max(), np.real(np.trace(e)) / n) <= 1e-10, "max-MSE after DFT != sum-MSE / N"


# ---------------------------------------------------------------- multihop

def _random_chain(rng, k=3, n=4):
    return multihop.MultiHopSpec(tuple(random_spec(rng, n, n) for _ in range(k)))


@check("multihop")
def check_per_hop_independence(rng):
    chain = _random_chain(rng)
    sols = multihop.solve_serial(chain, "capacity")
    again = multihop.solve_hop(chain.hops[1], allocate=objectives.get_objective("capacity").allocate)
    assert np.allclose(sols[1].f_k, again.f_k, atol=1e-12), "re-solving one hop changed its precoder"


@check("multihop")
def check_chain_structure(rng):
    for schur, obj in ((Schur.ADD_CONCAVE, "capacity"), (Schur.ADD_CONVEX, "max-mse"),
                       (Schur.MUL_CONVEX, "dfe-sum-mse")):
        chain = _random_chain(rng)
        sols = multihop.solve_serial(chain, obj)
        ms = [s.m_k for s in sols]
        qs = [s.q_k for s in sols]
        for m in ms:
            assert np.linalg.svd(m, compute_uv=False).max() < 1, "M_k singular value >= 1"
        e = multihop.chain_mse(ms, qs)
        w = np.linalg.eigvalsh(e)
        assert w.min() > 0 and w.max() <= 1 + 1e-12, "chain MSE eigenvalues outside (0, 1]"
        c = multihop.chain_product(ms, qs)
        sv = np.linalg.svd(c, compute_uv=False)
        per = np.prod([np.linalg.svd(m, compute_uv=False) for m in ms], axis=0)
        assert np.allclose(np.cumprod(sv), np.cumprod(per), rtol=1e-8), "chain misses the product bound"
        if schur is Schur.ADD_CONCAVE:
            g = c.conj().T @ c
            off = g - np.diag(np.diag(g))
            assert np.linalg.norm(off) <= 1e-8 * max(np.linalg.norm(g), 1.0), "chain not diagonal"
        elif schur is Schur.ADD_CONVEX:
            d = np.real(np.diag(e))
            assert d.max() - d.min() <= 1e-8, "chain MSE diagonal not equal"
        else:
            d = np.real(np.diag(np.linalg.cholesky(e)))
            assert d.max() / d.min() <= 1 + 1e-8, "chain Cholesky diagonal not equal"


@check("multihop")
def check_sv_product_random(rng):
    for _ in range(200):
        dims = rng.integers(1, 6, 4)
        mats = [_cn(rng, int(dims[i]), int(dims[i + 1])) for i in range(3)]
        assert multihop.sv_product_check(mats), "singular-value product inequality violated"


@check("multihop")
def check_parallel_symmetry(rng):
    spec = random_spec(rng)
    par = multihop.MultiHopSpec((spec, spec), multihop.Topology.PARALLEL, total_power=2 * spec.power)
    sols = multihop.solve_parallel(par, "capacity")
    p = [np.real(np.trace(s.f_k @ s.f_k.conj().T)) for s in sols]
    assert _rel(p[0], p[1]) <= 1e-8 and _rel(sum(p), 2 * spec.power) <= 1e-8


# ---------------------------------------------------------------- bench

@check("bench")
def check_iterative_monotone(rng):
    spec = random_spec(rng)
    res = bench.iterative_lmmse(spec, bench.IterConfig(max_iters=50, seed=int(rng.integers(1000))))
    tr = res.trace
    assert np.all(np.diff(tr) <= 1e-12 * tr[0]), "objective trace increased"


@check("bench")
def check_overlap_agreement(rng):
    for kw in ({"sigma_identity": True}, {"psi_identity": True}):
        spec = random_spec(rng, **kw, power=10.0)
        cf = bench.true_sum_mse(core.solve(spec, BoundMode.EXACT).f_opt, spec)
        it = bench.iterative_lmmse(spec, bench.IterConfig(max_iters=3000, tol=1e-13, seed=1))
        assert _rel(it.trace[-1], cf) <= 1e-5, f"closed form {cf} vs iterative {it.trace[-1]}"


# ---------------------------------------------------------------- cli

@check("cli")
def check_sweep_reproducible(rng):
    from .config import Experiment, ExperimentConfig
    from .experiments import rows_to_csv, run_experiment
    cfg = ExperimentConfig(Experiment.BOUND_GAP, snr_db_grid=(0, 10), trials=3,
                           seed=int(rng.integers(1000)))
    assert rows_to_csv(run_experiment(cfg)) == rows_to_csv(run_experiment(cfg)), "sweep not reproducible"


@check("cli")
def check_stderr_scaling(rng):
    from .config import Experiment, ExperimentConfig
    from .experiments import run_experiment
    seed = int(rng.integers(1000))
    se = {}
    for trials in (100, 400):
        cfg = ExperimentConfig(Experiment.BOUND_GAP, snr_db_grid=(10,), trials=trials, seed=seed)
        rows = {r.metric: r for r in run_experiment(cfg)}
        se[trials] = rows["lower_eig1"].stderr
    ratio = se[100] / se[400]
    assert 1.5 <= ratio <= 2.6, f"stderr ratio {ratio:.3f} not close to 2"


def run_checks(seed: int = 0, names=None, log: Callable[[str], None] | None = None) -> list[CheckResult]:
    out = []
    for i, c in enumerate(CHECKS):
        if names and c.name not in names:
            continue
        rng = np.random.default_rng([seed, i])
        t0 = time.perf_counter()
        try:
            c.fn(rng)
            res = CheckResult(c.name, c.module, True, "", time.perf_counter() - t0)
        except AssertionError as exc:
            res = CheckResult(c.name, c.module, False, str(exc) or "assertion failed", time.perf_counter() - t0)
        except Exception as exc:  # a crash is a failure too, keep going
            res = CheckResult(c.name, c.module, False, f"{type(exc).__name__}: {exc}", time.perf_counter() - t0)
        out.append(res)
        if log:
            log(f"{'PASS' if res.passed else 'FAIL'} {res.module}.{res.name} ({res.seconds:.2f}s)"
                + (f": {res.message}" if res.message else ""))
    return out
