#!/usr/bin/env python3
"""Sparsity trend on random 3-CNF instances at clause ratio ~4.

Compiles satisfiable draws with the bundled compiler (instances at this ratio
sit near the phase transition, so unsatisfiable draws are skipped) and reports
how circuit size and layer sparsity evolve with the variable count.

    python scripts/sparsity_sweep.py [--sizes 20,30,40] [--ratio 4] [--per-size 5]
"""

import argparse
import statistics

from laycirc import fold_constants, layerize, stats
from laycirc.bench import gen_3cnf
from laycirc.compile import CompileBudgetError, compile_cnf


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="20,30,40")
    parser.add_argument("--ratio", type=float, default=4.0)
    parser.add_argument("--per-size", type=int, default=5)
    parser.add_argument("--budget", type=int, default=2_000_000)
    args = parser.parse_args()

    print(f"{'vars':>5} {'clauses':>8} {'sat/tried':>10} {'src nodes':>10} "
          f"{'layered':>8} {'layers':>7} {'sparsity':>9}")
    for num_vars in (int(s) for s in args.sizes.split(",")):
        num_clauses = round(args.ratio * num_vars)
        rows = []
        seed = 0
        tried = 0
        while len(rows) < args.per_size and tried < 20 * args.per_size:
            tried += 1
            seed += 1
            cnf = gen_3cnf(num_vars, num_clauses, seed)
            try:
                circuit = fold_constants(compile_cnf(cnf, max_decisions=args.budget))
            except CompileBudgetError:
                continue
            if circuit.nodes[circuit.roots[0]].kind in ("true", "false"):
                continue
            st = stats(layerize([circuit]))
            rows.append((len(circuit.nodes), st.nodes_total,
                         len(st.nodes_per_layer), st.sparsity))
        med = lambda k: statistics.median(r[k] for r in rows)
        print(f"{num_vars:>5} {num_clauses:>8} {len(rows):>4}/{tried:<5} "
              f"{med(0):>10.0f} {med(1):>8.0f} {med(2):>7.0f} {med(3):>9.4f}")


if __name__ == "__main__":
    main()
