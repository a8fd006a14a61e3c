"""Recalibration of random CP non-gIB memories.

Draws memories, synthesises the pre/post pair and compares the Monte Carlo
witness score to the predicted (3 + lambda) / 2.
"""
import argparse

import numpy as np

from cvmemory.channels import random_non_gib_channel, synthesize_recalibration
from cvmemory.protocol import GaussianPrior, generic_recalibrated_strategy, run_rounds


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--memories", type=int, default=20)
    ap.add_argument("--rounds", type=int, default=100_000)
    ap.add_argument("--sigma", type=float, default=5.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    prior = GaussianPrior(args.sigma)
    print(f"{'detK':>6} {'detM':>7} {'lambda':>7} {'predicted':>9} {'mean':>8} {'dev/SE':>7}")
    for _ in range(args.memories):
        mem = random_non_gib_channel(rng)
        plan = synthesize_recalibration(mem)
        s = run_rounds(generic_recalibrated_strategy(mem), prior, prior, args.rounds, rng).score
        se = s.std(ddof=1) / np.sqrt(len(s))
        print(f"{np.linalg.det(mem.K):6.3f} {np.linalg.det(mem.M):7.4f} {plan.lam:7.4f} "
              f"{plan.predicted_witness:9.4f} {s.mean():8.4f} {(s.mean() - plan.predicted_witness) / se:+7.2f}")


if __name__ == "__main__":
    main()
