#!/usr/bin/env python3
"""Recovery rate, error and wall time for the main solvers on one desk-scale
problem family.  Sparsity runs from easy to past the greedy breakdown point
so the table shows where the tree search starts paying for itself.
"""

import argparse

from treepursuit.experiments import make_solver, run_batch

SOLVERS = [
    make_solver("omp"),
    make_solver("sp"),
    make_solver("mmp-df", branching=6, max_paths=50),
    make_solver("aomp", cost_model="mul", termination="sparsity"),
    make_solver("aomp", cost_model="mul"),
    make_solver("aomp"),  # adaptive-multiplicative cost, residue termination
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=20260815)
    ap.add_argument("--ks", type=int, nargs="+", default=[10, 20, 30, 35])
    args = ap.parse_args()

    print("N=%d M=%d trials=%d seed=%d" % (args.n, args.m, args.trials, args.seed))
    print("%-12s %4s %8s %12s %10s" % ("solver", "K", "rate", "anmse", "ms/trial"))
    for k in args.ks:
        for spec in SOLVERS:
            batch = run_batch(spec, args.n, args.m, k, "gaussian", args.trials, args.seed)
            print(
                "%-12s %4d %8.2f %12.3e %10.1f"
                % (spec.label, k, batch.rate, batch.anmse, batch.mean_time_ms)
            )
        print()


if __name__ == "__main__":
    main()
