"""Matrix-operation tally of the closed-form path next to observed benchmark iteration counts."""

import argparse

import numpy as np

from mmo.bench import IterConfig, closed_form_op_tally, iterative_lmmse
from mmo.channel import ExpCorrModel, build_correlations, sample_channel
from mmo.core import ProblemSpec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--snr-db", type=float, default=15.0)
    args = ap.parse_args()
    print("closed form:", closed_form_op_tally())
    model = ExpCorrModel(0.9, 0.3, 0.01)
    psi, sigma = build_correlations(model)
    its = []
    for t in range(args.trials):
        d = sample_channel(model, t)
        spec = ProblemSpec(d.h_bar, psi, sigma, 1.0, 10 ** (args.snr_db / 10))
        its.append(iterative_lmmse(spec, IterConfig(500, 1e-10, t)).iterations)
    its = np.array(its)
    print(f"benchmark iterations at {args.snr_db:g} dB: median {np.median(its):.0f}, "
          f"range {its.min()}-{its.max()}")


if __name__ == "__main__":
    main()
