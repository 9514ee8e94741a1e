import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmo import core, linalg, multihop
from mmo.cases import Schur
from mmo.core import BoundMode, ProblemSpec
from mmo.multihop import MultiHopSpec, Topology
from mmo.verify import random_spec

seeds = st.integers(0, 2**32 - 1)


def _chain(rng, k=3, n=4):
    return MultiHopSpec(tuple(random_spec(rng, n, n) for _ in range(k)))


def test_spec_validation(rng):
    a = ProblemSpec(rng.standard_normal((3, 4)), np.zeros((4, 4)), np.eye(3), 1.0, 1.0)
    b = random_spec(rng)
    with pytest.raises(linalg.DimensionMismatch):
        MultiHopSpec((a, b))
    with pytest.raises(ValueError):
        MultiHopSpec((b, b), Topology.PARALLEL)
    with pytest.raises(ValueError):
        MultiHopSpec(())


def test_hop_without_error(rng):
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    hop = ProblemSpec(h, np.zeros((4, 4)), np.eye(4), 0.4, 3.0)
    assert multihop.solve_hop(hop).eta_fk == pytest.approx(0.4)


@given(seeds)
def test_single_hop_matches_core(seed):
    spec = random_spec(np.random.default_rng(seed))
    hop = multihop.solve_hop(spec)
    ref = core.solve(spec)
    assert np.allclose(hop.f_k, ref.f_opt)
    b = hop.solution.bound_eigenvalues
    assert np.all(np.diff(b) <= 1e-10 * b.max())
    sv = np.linalg.svd(hop.m_k, compute_uv=False)
    assert np.all((sv >= 0) & (sv < 1))


def test_whitened_composite_structure(rng):
    spec = random_spec(rng)
    f = core.solve(spec).f_opt
    m = multihop.whitened_composite(f, spec)
    # M^H M = S (S + I)^{-1} where S is the effective SNR matrix
    s = core.effective_snr_matrix(f, spec)
    assert np.allclose(m.conj().T @ m, s @ np.linalg.inv(s + np.eye(4)), atol=1e-10)


def test_single_hop_concave_chain_is_diagonal(rng):
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    m /= 1.1 * np.linalg.norm(m, 2)
    qs = multihop.chain_rotations([m], Schur.ADD_CONCAVE)
    c = multihop.chain_product([m], qs)
    g = c.conj().T @ c
    assert np.allclose(g, np.diag(np.diag(g)), atol=1e-12)


def test_aligned_diagonal_chain():
    m1, m2 = np.diag([0.9, 0.5]), np.diag([0.8, 0.3])
    qs = multihop.chain_rotations([m1, m2], Schur.ADD_CONCAVE)
    assert np.allclose(np.abs(qs[1]), np.eye(2))
    sv = np.linalg.svd(multihop.chain_product([m1, m2], qs), compute_uv=False)
    assert np.allclose(sv, [0.72, 0.15], rtol=1e-10)


def test_chain_rotations_dimension_check():
    with pytest.raises(linalg.DimensionMismatch):
        multihop.chain_rotations([np.eye(3), np.eye(2)], Schur.ADD_CONCAVE)


@given(seeds, st.sampled_from(["capacity", "sum-mse", "max-mse", "prod-mse", "dfe-sum-mse"]))
def test_serial_chain_structure(seed, objective):
    rng = np.random.default_rng(seed)
    sols = multihop.solve_serial(_chain(rng), objective)
    ms, qs = [s.m_k for s in sols], [s.q_k for s in sols]
    for q in qs:
        assert np.linalg.norm(q.conj().T @ q - np.eye(4)) <= 1e-10
    c = multihop.chain_product(ms, qs)
    sv = np.linalg.svd(c, compute_uv=False)
    per = np.prod([np.linalg.svd(m, compute_uv=False) for m in ms], axis=0)
    assert np.allclose(np.cumprod(sv), np.cumprod(per), rtol=1e-8)
    e = multihop.chain_mse(ms, qs)
    w = np.linalg.eigvalsh(e)
    assert w.min() > 0 and w.max() <= 1 + 1e-12
    schur = {"capacity": Schur.ADD_CONCAVE, "sum-mse": Schur.ADD_CONCAVE, "max-mse": Schur.ADD_CONVEX,
             "prod-mse": Schur.MUL_CONCAVE, "dfe-sum-mse": Schur.MUL_CONVEX}[objective]
    if not schur.convex:
        assert np.allclose(e, np.diag(np.diag(e)), atol=1e-8)
    elif schur is Schur.ADD_CONVEX:
        d = np.diag(e).real
        assert d.max() - d.min() <= 1e-8
    else:
        d = np.diag(np.linalg.cholesky(e)).real
        assert d.max() / d.min() <= 1 + 1e-8


def test_per_hop_independence(rng):
    chain = _chain(rng)
    sols = multihop.solve_serial(chain, "max-mse")
    other = list(chain.hops)
    other[0] = random_spec(rng)
    again = multihop.solve_serial(MultiHopSpec(tuple(other)), "max-mse")
    for k in (1, 2):
        assert np.allclose(sols[k].f_k, again[k].f_k, atol=1e-14)


def test_sv_product_examples():
    assert multihop.sv_product_check([np.diag([2.0, 1.0]), np.diag([3.0, 1.0])])
    lhs = np.linalg.svd(np.diag([2.0, 1.0]) @ np.diag([3.0, 1.0]), compute_uv=False)
    assert np.allclose(np.cumprod(lhs), [6, 6])
    assert multihop.sv_product_check([np.zeros((2, 2)), np.eye(2), np.diag([5.0, 1.0])])
    with pytest.raises(linalg.DimensionMismatch):
        multihop.sv_product_check([np.eye(2), np.eye(3)])


@given(seeds, st.lists(st.integers(1, 5), min_size=4, max_size=4))
def test_sv_product_random(seed, dims):
    rng = np.random.default_rng(seed)
    mats = [rng.standard_normal((dims[i], dims[i + 1])) + 1j * rng.standard_normal((dims[i], dims[i + 1]))
            for i in range(3)]
    assert multihop.sv_product_check(mats)


def test_evaluate_serial_matches_chain(rng):
    chain = _chain(rng)
    sols = multihop.solve_serial(chain, "capacity")
    m = multihop.evaluate_serial(sols, chain.hops)
    e = multihop.chain_mse([s.m_k for s in sols], [s.q_k for s in sols])
    assert np.allclose(m.mse_matrix, e)
    assert m.capacity_nats == pytest.approx(-np.linalg.slogdet(e)[1])
    assert m.sum_mse == pytest.approx(np.trace(e).real)


def test_parallel_identical_carriers(rng):
    spec = random_spec(rng)
    sols = multihop.solve_parallel(MultiHopSpec((spec, spec), Topology.PARALLEL, 2 * spec.power))
    p = [np.real(np.vdot(s.f_k, s.f_k)) for s in sols]
    assert p[0] == pytest.approx(p[1], rel=1e-8)
    assert sum(p) == pytest.approx(2 * spec.power, rel=1e-8)


def test_parallel_dead_carrier(rng):
    live = random_spec(rng)
    dead = ProblemSpec(np.zeros((4, 4)), live.psi, live.sigma, 1.0, live.power)
    sols = multihop.solve_parallel(MultiHopSpec((live, dead), Topology.PARALLEL, 5.0))
    assert np.all(sols[1].f_k == 0)
    assert np.real(np.vdot(sols[0].f_k, sols[0].f_k)) == pytest.approx(5.0, rel=1e-8)


@given(seeds)
def test_parallel_common_water_level(seed):
    rng = np.random.default_rng(seed)
    specs = tuple(random_spec(rng) for _ in range(2))
    sols = multihop.solve_parallel(MultiHopSpec(specs, Topology.PARALLEL, 20.0), "capacity")
    levels, floors = [], []
    for s in sols:
        g = s.basis_k.gains[: len(s.solution.lambda_f)]
        f2 = s.solution.lambda_f ** 2
        levels += list((f2 + 1 / g)[f2 > 0])
        floors += list((1 / g)[f2 == 0])
    assert np.ptp(levels) <= 1e-8 * np.mean(levels)
    assert all(x >= max(levels) * (1 - 1e-8) for x in floors)
