#!/usr/bin/env python3
"""Full-scale target: the largest system sizes, kept out of the test suite.

Runs the greedy strategy at N = 51200 (where convergence takes on the order
of 1.5e5 days) and, optionally, the crowd-avoiding row at the same size.
Expect 5-10 minutes per greedy run on a desktop machine.

Usage:
    python scripts/full_scale.py [--runs K] [--seed S] [--ca]
"""

import argparse
import time

import numpy as np

from kpr_lab.engine import run
from kpr_lab.model import SimulationConfig, Strategy
from kpr_lab.orchestrator import derive_seed

N_FULL = 51200


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--ca", action="store_true",
                        help="also run the crowd-avoiding row at N=51200")
    args = parser.parse_args()

    taus = []
    for i in range(args.runs):
        cfg = SimulationConfig(
            n=N_FULL,
            strategy=Strategy.GREEDY_CROWD_AVOIDING,
            seed=derive_seed(args.seed, i),
        )
        t0 = time.time()
        result = run(cfg)
        taus.append(result.tau)
        print(
            f"greedy N={N_FULL} run {i}: tau={result.tau} "
            f"tau/N={result.tau / N_FULL:.3f} converged={result.converged} "
            f"[{time.time() - t0:.0f}s]"
        )
    if len(taus) > 1:
        ratios = np.array(taus) / N_FULL
        print(f"tau/N over {len(taus)} runs: mean={ratios.mean():.3f} "
              f"std={ratios.std():.3f}")

    if args.ca:
        cfg = SimulationConfig(
            n=N_FULL, strategy=Strategy.CROWD_AVOIDING, seed=args.seed
        )
        t0 = time.time()
        result = run(cfg)
        print(
            f"crowd-avoiding N={N_FULL}: f_s={result.f_s:.4f} tau={result.tau} "
            f"[{time.time() - t0:.0f}s]"
        )


if __name__ == "__main__":
    main()
