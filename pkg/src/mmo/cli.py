"""Command line entry point: ``mmo solve | sweep | verify``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

import numpy as np

from .channel import build_correlations, sample_channel
from .config import ConfigError, Experiment, load_config
from .core import ProblemSpec
from .experiments import NOISE_VAR, _power, rows_to_csv, run_experiment, write_csv
from .objectives import NATS_TO_BITS, design, eval_f_matrix, get_objective

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmo", description="Robust MIMO precoder design under imperfect CSI.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one channel draw at the first SNR point and print the factors")
    s.add_argument("--config", required=True)

    w = sub.add_parser("sweep", help="run a Monte Carlo SNR sweep and write CSV")
    w.add_argument("--config", required=True)
    w.add_argument("--out", help="CSV path (defaults to the config's output, else stdout)")
    w.add_argument("--quiet", action="store_true", help="no progress on stderr")

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--only", nargs="*", help="run only the named checks")
    return p


def _matrix(name: str, m: np.ndarray) -> str:
    body = np.array2string(np.asarray(m), precision=6, suppress_small=True, max_line_width=160)
    return f"{name} =\n{body}"


def _solve(args) -> int:
    cfg = load_config(args.config)
    psi, sigma = build_correlations(cfg.model)
    draw = sample_channel(cfg.model, cfg.seed)
    snr = cfg.snr_db_grid[0]
    spec = ProblemSpec(draw.h_bar, psi, sigma, NOISE_VAR, _power(snr))
    sol = design(spec, cfg.objective, cfg.mode)
    obj = get_objective(cfg.objective)
    value = eval_f_matrix(obj.case(), sol.f_opt @ sol.q_opt, spec)
    print(f"snr_db = {snr}  power = {spec.power:.6g}  mode = {cfg.mode.value}  objective = {cfg.objective}")
    print("lambda_pi =", np.array2string(sol.basis.lambda_pi, precision=6))
    print("f_sq      =", np.array2string(sol.f_sq, precision=6))
    print(f"eta_f     = {sol.eta_f:.12g}")
    print(_matrix("Q", sol.q_opt))
    print(_matrix("F", sol.f_opt))
    print(f"objective = {value:.12g}")
    if cfg.objective == "capacity":
        print(f"capacity  = {-value * NATS_TO_BITS:.12g} bits")
    return 0


def _sweep(args) -> int:
    cfg = load_config(args.config)
    if cfg.experiment is Experiment.SOLVE:
        raise ConfigError([f"{args.config}: experiment 'solve' is not a sweep; use 'mmo solve'"])
    progress = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    rows = run_experiment(cfg, progress)
    out = args.out or cfg.output_path
    if out:
        write_csv(rows, out)
    else:
        sys.stdout.write(rows_to_csv(rows))
    return 0


def _verify(args) -> int:
    from .verify import run_checks
    results = run_checks(args.seed, set(args.only) if args.only else None, log=print)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    for r in failed:
        print(f"FAILED {r.module}.{r.name}: {r.message}", file=sys.stderr)
    return 1 if failed or not results else 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"solve": _solve, "sweep": _sweep, "verify": _verify}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"mmo: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"mmo: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
