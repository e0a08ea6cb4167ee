#!/usr/bin/env python3
"""Optimality-gap study: solver vs exhaustive oracle on seeded 6-device
instances.  Usage: run_oracle_gap.py [n_instances]
"""
import sys
import time

from stepalloc.experiments import sample_instance
from stepalloc.oracle import brute_force
from stepalloc.sca import inter_solve


def main(n_instances: str = "50") -> None:
    count = int(n_instances)
    t0 = time.perf_counter()
    within = 0
    worst = 0.0
    for seed in range(count):
        cfg = sample_instance(6, seed, family="mixed")
        rep = inter_solve(cfg)
        orc = brute_force(cfg, 1.0)
        ratio = rep.objective_binary / orc.best_objective
        worst = max(worst, ratio)
        within += ratio <= 1.10
        print(f"seed {seed:3d}: solver {rep.objective_binary:10.6f}  "
              f"oracle {orc.best_objective:10.6f}  ratio {ratio:7.4f}  "
              f"offloaded {int(orc.best_a.sum())}")
    print(f"\n{within}/{count} within 10% of the oracle; worst ratio {worst:.4f}; "
          f"{time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main(*sys.argv[1:])
