#!/usr/bin/env python3
"""Timing trend: tensorized engine vs naive post-order traversal.

Generates large synthetic alternating circuits (>= 1e5 nodes), gates each on
the oracle-equivalence check, then reports median forward+backward wall times.
Run from the repository root:

    python scripts/perf_trend.py [--seed N] [--repetitions N]
"""

import argparse

from laycirc.bench import bench_instance, gen_random_nnf

SHAPES = [
    # (num_vars, width, depth, fanin) -> roughly 1e5..3e5 nodes
    (40, 2500, 40, 3),
    (40, 4000, 30, 5),
    (60, 6000, 25, 6),
]


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--repetitions", type=int, default=7)
    args = parser.parse_args()

    print(f"{'nodes':>9} {'edges':>9} {'layers':>7} {'naive ms':>10} "
          f"{'layered ms':>11} {'speedup':>8}")
    for num_vars, width, depth, fanin in SHAPES:
        circuit = gen_random_nnf(num_vars, width, depth, fanin, args.seed)
        row = bench_instance(circuit, repetitions=args.repetitions, seed=args.seed)
        speedup = row["t_naive_ms"] / row["t_klay_ms"]
        print(f"{row['nodes_src']:>9} {row['edges']:>9} {row['layers']:>7} "
              f"{row['t_naive_ms']:>10.2f} {row['t_klay_ms']:>11.2f} {speedup:>7.1f}x")


if __name__ == "__main__":
    main()
