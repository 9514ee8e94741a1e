import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmo import bench, core
from mmo.channel import ExpCorrModel, build_correlations, sample_channel
from mmo.core import BoundMode, ProblemSpec
from mmo.verify import random_spec

seeds = st.integers(0, 2**32 - 1)


def test_config_validation():
    with pytest.raises(ValueError):
        bench.IterConfig(max_iters=0)
    with pytest.raises(ValueError):
        bench.IterConfig(tol=0.0)


def test_rejects_other_objectives(rng):
    spec = dataclasses.replace(random_spec(rng), objective="capacity")
    with pytest.raises(bench.NotSupported):
        bench.iterative_lmmse(spec)


def _white(rng, p=10.0):
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    return ProblemSpec(h, np.zeros((4, 4)), np.eye(4), 1.0, p)


def test_perfect_csi_agrees_with_closed_form(rng):
    spec = _white(rng)
    cf = bench.true_sum_mse(core.solve(spec, BoundMode.EXACT).f_opt, spec)
    it = bench.iterative_lmmse(spec, bench.IterConfig(3000, 1e-14, 3))
    assert it.trace[-1] == pytest.approx(cf, rel=1e-6)


def test_starting_at_closed_form_is_stationary(rng):
    spec = _white(rng)
    f0 = core.solve(spec, BoundMode.EXACT).f_opt
    it = bench.iterative_lmmse(spec, bench.IterConfig(100, 1e-8), init=f0)
    assert it.converged and it.iterations <= 2


@settings(max_examples=15)
@given(seeds)
def test_trace_non_increasing(seed):
    spec = random_spec(np.random.default_rng(seed))
    tr = bench.iterative_lmmse(spec, bench.IterConfig(60, 1e-12, seed % 1000)).trace
    assert np.all(np.diff(tr) <= 1e-12 * tr[0])


@settings(max_examples=10)
@given(seeds, st.sampled_from([{"sigma_identity": True}, {"psi_identity": True}]))
def test_overlap_agreement(seed, kw):
    spec = random_spec(np.random.default_rng(seed), power=10.0, **kw)
    cf = bench.true_sum_mse(core.solve(spec, BoundMode.EXACT).f_opt, spec)
    it = bench.iterative_lmmse(spec, bench.IterConfig(3000, 1e-13, 1))
    assert it.trace[-1] == pytest.approx(cf, rel=1e-5)


def test_precoder_step_meets_power(rng):
    spec = random_spec(rng)
    it = bench.iterative_lmmse(spec, bench.IterConfig(5))
    assert np.real(np.vdot(it.f, it.f)) <= spec.power * (1 + 1e-9)


def test_non_robust_baseline_properties(rng):
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    spec = ProblemSpec(h, np.zeros((4, 4)), np.eye(4), 1.0, 10.0)
    a = bench.non_robust_baseline(spec)
    from mmo.objectives import design
    assert np.allclose(a.f_opt, design(spec, "sum-mse", BoundMode.EXACT).f_opt)


def test_non_robust_converges_to_robust_allocation():
    model = ExpCorrModel(0.45, 0.45, 1e-9)
    psi, sigma = build_correlations(model)
    d = sample_channel(model, 1)
    spec = ProblemSpec(d.h_bar, psi, sigma, 1.0, 100.0)
    robust = core.solve(spec, BoundMode.LOWER)
    nr = bench.non_robust_baseline(spec)
    assert np.allclose(robust.f_sq, nr.f_sq, rtol=1e-6, atol=1e-6 * spec.power)


def test_op_tally():
    t = bench.closed_form_op_tally()
    assert t["total"] == 11
    assert sum(v for k, v in t.items() if k != "total") == 11
