"""Monte Carlo sweeps over SNR.

Every trial t draws its channels from seed ``base_seed + t``; the same
draws are reused at every SNR point. Rows are aggregated per (SNR, metric)
as mean and standard error over trials.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .bench import IterConfig, iterative_lmmse, non_robust_spec, true_sum_mse
from .channel import build_correlations, db_to_linear, sample_channel, sample_hops
from .config import Experiment, ExperimentConfig
from .core import BoundMode, ProblemSpec, solve
from .multihop import MultiHopSpec, evaluate_serial, solve_serial
from .objectives import NATS_TO_BITS, design

__all__ = ["Row", "CSV_HEADER", "run_experiment", "rows_to_csv", "write_csv", "aggregate",
           "bound_gap", "sum_mse_compare", "multihop", "relative_gap"]

CSV_HEADER = ("snr_db", "metric", "mean", "stderr", "trials", "seed")
NOISE_VAR = 1.0


@dataclass(frozen=True)
class Row:
    snr_db: float
    metric: str
    mean: float
    stderr: float
    trials: int
    seed: int


def _fmt(x) -> str:
    return format(float(x), ".12g")


def aggregate(samples) -> tuple[float, float]:
    x = np.asarray(samples, dtype=float)
    mean = float(x.mean())
    se = float(x.std(ddof=1) / np.sqrt(len(x))) if len(x) > 1 else 0.0
    return mean, se


def rows_to_csv(rows: Iterable[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(r.snr_db), r.metric, _fmt(r.mean), _fmt(r.stderr), r.trials, r.seed])
    return buf.getvalue()


def write_csv(rows: Iterable[Row], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))


def _power(snr_db: float) -> float:
    return float(db_to_linear(snr_db)) * NOISE_VAR


def relative_gap(lower_mean: np.ndarray, upper_mean: np.ndarray) -> float:
    """Average of (upper - lower) / lower over eigenvalues with a positive lower mean."""
    lower_mean = np.asarray(lower_mean, float)
    upper_mean = np.asarray(upper_mean, float)
    ok = lower_mean > 0
    return float(np.mean((upper_mean[ok] - lower_mean[ok]) / lower_mean[ok]))


def bound_gap(cfg: ExperimentConfig, progress: Callable[[str], None] | None = None) -> list[Row]:
    """Eigenvalues of the lower- and upper-bound objective matrices (sum-MSE allocation)."""
    psi, sigma = build_correlations(cfg.model)
    draws = [sample_channel(cfg.model, cfg.seed + t) for t in range(cfg.trials)]
    rows: list[Row] = []
    for snr in cfg.snr_db_grid:
        p = _power(snr)
        lo, up = [], []
        for d in draws:
            spec = ProblemSpec(d.h_bar, psi, sigma, NOISE_VAR, p)
            lo.append(solve(spec, BoundMode.LOWER).bound_eigenvalues)
            up.append(solve(spec, BoundMode.UPPER).bound_eigenvalues)
        lo, up = np.array(lo), np.array(up)
        n = lo.shape[1]
        for i in range(n):
            rows.append(Row(snr, f"lower_eig{i + 1}", *aggregate(lo[:, i]), cfg.trials, cfg.seed))
        for i in range(n):
            rows.append(Row(snr, f"upper_eig{i + 1}", *aggregate(up[:, i]), cfg.trials, cfg.seed))
        lm, um = lo.mean(axis=0), up.mean(axis=0)
        ok = lm > 0
        # stderr of the paired differences, relative to the lower mean
        diff_se = np.array([aggregate(up[:, i] - lo[:, i])[1] for i in range(n)])
        gap_se = float(np.mean(diff_se[ok] / lm[ok])) if np.any(ok) else 0.0
        rows.append(Row(snr, "rel_gap", relative_gap(lm, um), gap_se, cfg.trials, cfg.seed))
        if progress:
            progress(f"bound-gap {snr} dB done")
    return rows


def sum_mse_compare(cfg: ExperimentConfig, progress=None) -> list[Row]:
    """Average sum MSE of the lower/upper closed forms, the alternating benchmark and the baseline."""
    psi, sigma = build_correlations(cfg.model)
    draws = [sample_channel(cfg.model, cfg.seed + t) for t in range(cfg.trials)]
    rows: list[Row] = []
    for snr in cfg.snr_db_grid:
        p = _power(snr)
        vals = {"sum_mse_lower": [], "sum_mse_upper": [], "sum_mse_iterative": [],
                "sum_mse_nonrobust": [], "iterations": []}
        for t, d in enumerate(draws):
            spec = ProblemSpec(d.h_bar, psi, sigma, NOISE_VAR, p)
            vals["sum_mse_lower"].append(true_sum_mse(design(spec, "sum-mse", BoundMode.LOWER).f_opt, spec))
            vals["sum_mse_upper"].append(true_sum_mse(design(spec, "sum-mse", BoundMode.UPPER).f_opt, spec))
            nr = design(non_robust_spec(spec), "sum-mse", BoundMode.EXACT)
            vals["sum_mse_nonrobust"].append(true_sum_mse(nr.f_opt, spec))
            it = iterative_lmmse(spec, IterConfig(cfg.iter_max, cfg.iter_tol, cfg.seed + t))
            vals["sum_mse_iterative"].append(it.trace[-1])
            vals["iterations"].append(it.iterations)
        for name, xs in vals.items():
            rows.append(Row(snr, name, *aggregate(xs), cfg.trials, cfg.seed))
        if progress:
            progress(f"sum-mse-compare {snr} dB done")
    return rows


def multihop(cfg: ExperimentConfig, metric: str, progress=None) -> list[Row]:
    """Serial relay chain: robust lower/upper designs versus the perfect-CSI baseline."""
    objective = "capacity" if metric == "capacity" else "max-mse"
    psi, sigma = build_correlations(cfg.model)
    draws = [sample_hops(cfg.model, cfg.hops, cfg.seed + t) for t in range(cfg.trials)]
    rows: list[Row] = []
    for snr in cfg.snr_db_grid:
        p = _power(snr)
        vals = {"lower": [], "upper": [], "nonrobust": []}
        for hops in draws:
            specs = tuple(ProblemSpec(d.h_bar, psi, sigma, NOISE_VAR, p) for d in hops)
            chain = MultiHopSpec(specs)
            nr_chain = MultiHopSpec(tuple(non_robust_spec(s) for s in specs))
            designs = {
                "lower": solve_serial(chain, objective, BoundMode.LOWER),
                "upper": solve_serial(chain, objective, BoundMode.UPPER),
                "nonrobust": solve_serial(nr_chain, objective, BoundMode.EXACT),
            }
            for key, sol in designs.items():
                m = evaluate_serial(sol, specs)
                vals[key].append(m.capacity_nats * NATS_TO_BITS if metric == "capacity" else m.max_mse)
        prefix = "capacity_bits" if metric == "capacity" else "max_mse"
        for key, xs in vals.items():
            rows.append(Row(snr, f"{prefix}_{key}", *aggregate(xs), cfg.trials, cfg.seed))
        lo, nr = np.array(vals["lower"]), np.array(vals["nonrobust"])
        gain = lo - nr if metric == "capacity" else nr - lo
        rows.append(Row(snr, f"{prefix}_robust_gain", *aggregate(gain), cfg.trials, cfg.seed))
        if progress:
            progress(f"multihop-{metric} {snr} dB done")
    return rows


def run_experiment(cfg: ExperimentConfig, progress=None) -> list[Row]:
    if cfg.experiment is Experiment.BOUND_GAP:
        return bound_gap(cfg, progress)
    if cfg.experiment is Experiment.SUM_MSE_COMPARE:
        return sum_mse_compare(cfg, progress)
    if cfg.experiment is Experiment.MULTIHOP_CAPACITY:
        return multihop(cfg, "capacity", progress)
    if cfg.experiment is Experiment.MULTIHOP_MAX_MSE:
        return multihop(cfg, "max-mse", progress)
    raise ValueError(f"{cfg.experiment.value} is not a sweep experiment")
