"""Run every sweep config in scripts/configs and write CSVs to results/.

    python scripts/run_sweeps.py [--trials N] [--only NAME ...]
"""

import argparse
import dataclasses
import pathlib
import sys
import time

from mmo.config import Experiment, load_config
from mmo.experiments import run_experiment, write_csv

HERE = pathlib.Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, help="override the trial count")
    ap.add_argument("--only", nargs="*", help="config stems to run")
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()
    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in sorted((HERE / "configs").glob("*.ini")):
        if args.only and path.stem not in args.only:
            continue
        cfg = load_config(str(path))
        if cfg.experiment is Experiment.SOLVE:
            continue
        if args.trials:
            cfg = dataclasses.replace(cfg, trials=args.trials)
        t0 = time.perf_counter()
        rows = run_experiment(cfg, lambda m: print("  " + m, file=sys.stderr))
        dest = out_dir / f"{path.stem}.csv"
        write_csv(rows, str(dest))
        print(f"{path.stem}: {len(rows)} rows -> {dest} ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
