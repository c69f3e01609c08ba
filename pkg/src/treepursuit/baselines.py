"""Greedy and thresholding baselines: OMP, SP, IHT, FBP, MMP-DF.

Every solver returns a RecoveryOutput and reports the residual of its own
estimate.  Variants are documented per function; all tie-breaking is by
ascending atom index so results are deterministic.
"""

import time

import numpy as np

from .linalg import (
    IncrementalFactorization,
    SingularSupportError,
    correlations,
    project,
    top_indices,
)
from .results import (
    RecoveryOutput,
    REASON_RESIDUE,
    REASON_MAX_ITER,
    REASON_STALLED,
    REASON_DIVERGED,
)

__all__ = [
    "omp_recover",
    "sp_recover",
    "iht_recover",
    "fbp_recover",
    "mmp_df_recover",
]

DEFAULT_EPSILON = 1e-6


def _prep(phi, y):
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if phi.ndim != 2 or y.ndim != 1 or phi.shape[0] != y.shape[0]:
        raise ValueError("phi must be (M, N) and y length M")
    return phi, y, float(np.linalg.norm(y))


def _finish(phi, y, support, values, reason, solver, t0, **counters):
    n = phi.shape[1]
    xhat = np.zeros(n)
    support = tuple(int(j) for j in support)
    if support:
        xhat[list(support)] = values
    residual = float(np.linalg.norm(y - phi @ xhat))
    out = RecoveryOutput(
        n=n,
        support=support,
        xhat=xhat,
        reason=reason,
        solver=solver,
        residual_norm=residual,
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )
    for key, val in counters.items():
        setattr(out, key, val)
    return out


def omp_recover(phi, y, epsilon=DEFAULT_EPSILON, max_iter=None):
    """Orthogonal matching pursuit.

    Repeatedly selects the atom with the largest absolute correlation to
    the current residue (ties by ascending index) and reprojects on the
    augmented support.  Stops when ||r|| <= epsilon * ||y||, after
    max_iter atoms (default min(M, N)), or when the augmented support
    turns rank deficient.
    """
    t0 = time.perf_counter()
    phi, y, ynorm = _prep(phi, y)
    m, n = phi.shape
    if max_iter is None:
        max_iter = min(m, n)
    if not 1 <= max_iter <= m:
        raise ValueError("max_iter must satisfy 1 <= max_iter <= M")
    if ynorm == 0.0:
        return _finish(phi, y, (), (), REASON_RESIDUE, "omp", t0)
    threshold = epsilon * ynorm
    fact = IncrementalFactorization.empty(y)
    reason = REASON_MAX_ITER
    if fact.residue_norm <= threshold:
        reason = REASON_RESIDUE
    else:
        while fact.length < max_iter:
            corr = correlations(phi, fact.residue)
            j = top_indices(corr, 1, exclude=set(fact.support))[0]
            try:
                fact = fact.appended(j, phi[:, j])
            except SingularSupportError:
                reason = REASON_STALLED
                break
            if fact.residue_norm <= threshold:
                reason = REASON_RESIDUE
                break
    return _finish(
        phi, y, fact.support, fact.coefficients(), reason, "omp", t0,
        iterations=fact.length,
    )


def sp_recover(phi, y, k, max_iter=100):
    """Subspace pursuit.

    Keeps a working support of size k.  Each iteration unions the k atoms
    best correlated with the residue, solves least squares on the union,
    prunes back to the k largest-magnitude coefficients (ties by ascending
    index), and reprojects.  Terminates when the residue norm stops
    decreasing, returning the previous iterate.
    """
    t0 = time.perf_counter()
    phi, y, ynorm = _prep(phi, y)
    m, n = phi.shape
    if not 1 <= k <= m // 2:
        raise ValueError("sp_recover needs 1 <= k <= M/2")
    if ynorm == 0.0:
        return _finish(phi, y, (), (), REASON_RESIDUE, "sp", t0)
    support = sorted(top_indices(correlations(phi, y), k))
    try:
        z, r = project(y, phi, support)
    except SingularSupportError:
        return _finish(phi, y, (), (), REASON_STALLED, "sp", t0)
    best_res = float(np.linalg.norm(r))
    reason = REASON_MAX_ITER
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        cand = top_indices(correlations(phi, r), k, exclude=set(support))
        union = sorted(set(support) | set(cand))
        try:
            z_union, _ = project(y, phi, union)
        except SingularSupportError:
            reason = REASON_STALLED
            break
        # k largest |coefficients|; lexsort keys: last key dominates
        order = np.lexsort((np.asarray(union), -np.abs(z_union)))[:k]
        new_support = sorted(union[i] for i in order)
        z_new, r_new = project(y, phi, new_support)
        res_new = float(np.linalg.norm(r_new))
        if res_new >= best_res:
            reason = REASON_STALLED
            break
        support, z, r, best_res = new_support, z_new, r_new, res_new
    if best_res <= DEFAULT_EPSILON * ynorm:
        reason = REASON_RESIDUE
    return _finish(phi, y, support, z, reason, "sp", t0, iterations=iterations)


def _hard_threshold(v, k):
    keep = top_indices(np.abs(v), k)
    out = np.zeros_like(v)
    out[keep] = v[keep]
    return out


def iht_recover(phi, y, k, step=1.0, max_iter=500):
    """Iterative hard thresholding: x <- H_k(x + step * phi^T (y - phi x)).

    Columns are used exactly as given (no normalization) and the default
    step is 1.  Stops on an (essentially) zero residue, when the residue
    norm stalls, or after max_iter sweeps; flags non-convergence when the
    residue grows past 10x its starting value.
    """
    t0 = time.perf_counter()
    phi, y, ynorm = _prep(phi, y)
    n = phi.shape[1]
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= N")
    if ynorm == 0.0:
        return _finish(phi, y, (), (), REASON_RESIDUE, "iht", t0)
    x = np.zeros(n)
    r = y.copy()
    reason = REASON_MAX_ITER
    converged = True
    prev = np.inf
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        x = _hard_threshold(x + step * (phi.T @ r), k)
        r = y - phi @ x
        rn = float(np.linalg.norm(r))
        if rn > 10.0 * ynorm:
            reason = REASON_DIVERGED
            converged = False
            break
        if rn <= DEFAULT_EPSILON * ynorm:
            reason = REASON_RESIDUE
            break
        if abs(prev - rn) <= 1e-12 * max(1.0, ynorm):
            reason = REASON_STALLED
            break
        prev = rn
    support = tuple(int(j) for j in np.flatnonzero(x))
    return _finish(
        phi, y, support, x[list(support)], reason, "iht", t0,
        iterations=iterations, converged=converged,
    )


def fbp_recover(phi, y, alpha=None, beta=None, epsilon=DEFAULT_EPSILON, max_iter=None):
    """Forward-backward pursuit.

    Each iteration adds the alpha best-correlated new atoms, projects,
    drops the beta smallest-magnitude coefficients (ties by ascending
    index), and projects again, so the support grows by alpha - beta per
    round.  Defaults: alpha = round(0.2 M), beta = alpha - 1.  Terminates
    on the residue criterion, when the expanded support would exceed M, or
    after max_iter rounds (default M).
    """
    t0 = time.perf_counter()
    phi, y, ynorm = _prep(phi, y)
    m, n = phi.shape
    if alpha is None:
        alpha = max(2, round(0.2 * m))
    if beta is None:
        beta = alpha - 1
    alpha, beta = int(alpha), int(beta)
    if not alpha > beta >= 1:
        raise ValueError("fbp_recover needs alpha > beta >= 1")
    if max_iter is None:
        max_iter = m
    if ynorm == 0.0:
        return _finish(phi, y, (), (), REASON_RESIDUE, "fbp", t0)
    threshold = epsilon * ynorm
    support = []
    z = np.empty(0)
    r = y.copy()
    reason = REASON_MAX_ITER
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        width = min(alpha, n - len(support))
        if width < 1 or len(support) + width > m:
            reason = REASON_STALLED
            break
        fwd = top_indices(correlations(phi, r), width, exclude=set(support))
        expanded = sorted(set(support) | set(fwd))
        try:
            z_exp, _ = project(y, phi, expanded)
        except SingularSupportError:
            reason = REASON_STALLED
            break
        drop = np.lexsort((np.asarray(expanded), np.abs(z_exp)))[:beta]
        dropped = {expanded[i] for i in drop}
        support = [j for j in expanded if j not in dropped]
        z, r = project(y, phi, support)
        if float(np.linalg.norm(r)) <= threshold:
            reason = REASON_RESIDUE
            break
    return _finish(phi, y, support, z, reason, "fbp", t0, iterations=iterations)


def mmp_df_recover(phi, y, k, branching=6, max_paths=200, epsilon=DEFAULT_EPSILON):
    """Depth-first multipath matching pursuit.

    Explores the tree whose children at each node are the `branching`
    atoms best correlated with the node's residue (ties by ascending
    index), depth-first in candidate-rank order down to depth k, with no
    support-set deduplication.  Stops as soon as any node's residue meets
    epsilon * ||y||, or after max_paths complete depth-k paths, returning
    the minimum-residue complete path seen.
    """
    t0 = time.perf_counter()
    phi, y, ynorm = _prep(phi, y)
    m, n = phi.shape
    if not 1 <= k <= m:
        raise ValueError("k must satisfy 1 <= k <= M")
    if branching < 1 or max_paths < 1:
        raise ValueError("branching and max_paths must be >= 1")
    if ynorm == 0.0:
        return _finish(phi, y, (), (), REASON_RESIDUE, "mmp-df", t0)
    threshold = epsilon * ynorm
    state = {"complete": 0, "nodes": 0, "singular": 0, "best": None, "best_res": np.inf}

    def dfs(fact):
        # returns a factorization meeting the residue criterion, else None
        if fact.residue_norm <= threshold:
            return fact
        if fact.length == k:
            state["complete"] += 1
            if fact.residue_norm < state["best_res"]:
                state["best"] = fact
                state["best_res"] = fact.residue_norm
            return None
        corr = correlations(phi, fact.residue)
        width = min(branching, n - fact.length)
        for j in top_indices(corr, width, exclude=set(fact.support)):
            if state["complete"] >= max_paths:
                return None
            try:
                child = fact.appended(j, phi[:, j])
            except SingularSupportError:
                state["singular"] += 1
                continue
            state["nodes"] += 1
            hit = dfs(child)
            if hit is not None:
                return hit
        return None

    hit = dfs(IncrementalFactorization.empty(y))
    if hit is None:
        hit = state["best"]
    if hit is None:
        return _finish(
            phi, y, (), (), REASON_STALLED, "mmp-df", t0,
            paths_opened=state["complete"], nodes_expanded=state["nodes"],
            singular_skips=state["singular"],
        )
    reason = REASON_RESIDUE if hit.residue_norm <= threshold else REASON_MAX_ITER
    return _finish(
        phi, y, hit.support, hit.coefficients(), reason, "mmp-df", t0,
        paths_opened=state["complete"], nodes_expanded=state["nodes"],
        singular_skips=state["singular"],
    )
