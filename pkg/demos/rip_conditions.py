#!/usr/bin/env python3
"""Brute-force isometry constants for a small random matrix and run the
exact-recovery condition checks against them.

Everything here is exhaustive (all column subsets), so keep M, N small;
the default 10 x 18 matrix enumerates a few thousand supports per order.
Expect most checks to fail: the conditions are sufficient, not necessary,
and at sizes small enough to brute force they are far from tight, while
empirical recovery already works well.
"""

import json
import math

from treepursuit.rip import condition_report, ric_table, theorem5_window
from treepursuit.siggen import gen_matrix

M, N, K, B, SEED = 10, 18, 3, 2, 4


def main():
    phi = gen_matrix(M, N, SEED, entry_std=1 / math.sqrt(M)).phi
    table = ric_table(phi, K + B + 1)
    print("delta_l for the %d x %d matrix (entries N(0, 1/%d)):" % (M, N, M))
    for l in sorted(table.deltas):
        print("  delta_%d = %.4f" % (l, table.delta(l)))

    print("\nfull condition report for K=%d, B=%d, n_c=1, n_f=1:" % (K, B))
    report = condition_report(table, K, B, n_c=1, n_f=1, kmax=K + 2)
    print(json.dumps(report, indent=2))

    window = theorem5_window(table, K, B, n_c=K - 1, n_f=0)
    print("\nfalse-branch tolerance window:", window.to_dict())


if __name__ == "__main__":
    main()
