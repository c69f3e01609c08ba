#!/usr/bin/env python3
"""Empirical phase-transition curves: for each undersampling ratio
lambda = M/N, find the sparsity fraction rho = K/M where recovery drops
through 50%.  Higher curves mean a stronger solver.

Writes one CSV per solver next to this script and prints the points.
Runtime is dominated by trials x grid size; the defaults run in a couple
of minutes on one core.
"""

import argparse
import pathlib

from treepursuit.experiments import make_solver, phase_transition

SOLVERS = [make_solver("omp"), make_solver("aomp")]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--seed", type=int, default=31415)
    ap.add_argument("--lambdas", type=float, nargs="+", default=[0.25, 0.4, 0.55, 0.7])
    ap.add_argument(
        "--rhos", type=float, nargs="+",
        default=[0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75],
    )
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    out = pathlib.Path(__file__).resolve().parent
    for spec in SOLVERS:
        curve = phase_transition(
            spec, args.n, args.lambdas, args.rhos, args.trials, args.seed, jobs=args.jobs
        )
        path = out / ("phase_%s.csv" % spec.label)
        curve.write_points_csv(path)
        print("%s:" % spec.label)
        for pt in curve.points:
            mark = "" if pt.censored is None else "  (censored %s)" % pt.censored
            star = "none" if pt.rho_star is None else "%.3f" % pt.rho_star
            print("  lambda %.2f -> rho* %s%s" % (pt.lam, star, mark))
        print("  wrote", path)


if __name__ == "__main__":
    main()
