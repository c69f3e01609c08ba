"""Best-first tree-search recovery (the A*OMP family).

The search keeps up to P candidate support paths in a priority trie.  Each
round the cheapest incomplete path is expanded with its B best-correlated
atoms.  A candidate that meets the residue criterion ends the search at
once; otherwise it is inserted unless an equal support set has been opened
before, replacing the expanded path first, filling spare capacity next,
and finally displacing the worst-cost live path when it is cheaper.  Two
multiplicative cost models make paths of different lengths comparable, and
termination is either sparsity-based (paths capped at K atoms, best
complete path returned) or residue-based (terminate once some candidate's
residue drops below epsilon * ||y||).
"""

import json
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .linalg import (
    IncrementalFactorization,
    SingularSupportError,
    correlations,
    top_indices,
)
from .results import (
    RecoveryOutput,
    REASON_RESIDUE,
    REASON_ALL_COMPLETE,
    REASON_BUDGET,
)
from .trie import SearchTrie

__all__ = [
    "COST_MUL",
    "COST_AMUL",
    "TERM_SPARSITY",
    "TERM_RESIDUE",
    "AompConfig",
    "PathState",
    "AuditError",
    "cost_mul",
    "cost_amul",
    "init_search",
    "select_best_incomplete",
    "expand",
    "ExpansionReport",
    "aomp_recover",
    "hybrid_recover",
    "default_config",
    "load_config",
    "write_default_config",
]

COST_MUL = "mul"
COST_AMUL = "amul"
TERM_SPARSITY = "sparsity"
TERM_RESIDUE = "residue"

# sparsity-based runs still terminate early on an (essentially) exact hit
SPARSITY_EPSILON_FLOOR = 1e-6


class AuditError(AssertionError):
    """A search invariant was violated (only raised with audit enabled)."""


def cost_mul(norms, kmax, alpha_mul):
    """Fixed-decay path cost: alpha^(kmax - l) * ||r_l||.

    norms is the residue-norm history of the path (norms[0] = ||y||), so
    the path length l is len(norms) - 1.  Unexplored positions are assumed
    to shrink the residue by the constant factor alpha_mul per atom.
    """
    if not 0.0 < alpha_mul < 1.0:
        raise ValueError("alpha_mul must lie in (0, 1)")
    length = len(norms) - 1
    if length > kmax:
        raise ValueError("path longer than kmax")
    return alpha_mul ** (kmax - length) * norms[-1]


def cost_amul(norms, kmax, alpha_amul):
    """Adaptive-decay path cost: (alpha * ||r_l|| / ||r_{l-1}||)^(kmax - l) * ||r_l||.

    The expected per-atom decay is taken from the path's own last step, so
    a path needs at least one selected atom.  A zero previous residue means
    the path already hit the signal exactly; its cost is zero.
    """
    if not 0.0 < alpha_amul <= 1.0:
        raise ValueError("alpha_amul must lie in (0, 1]")
    length = len(norms) - 1
    if length < 1:
        raise ValueError("adaptive cost needs at least one selected atom")
    if length > kmax:
        raise ValueError("path longer than kmax")
    prev, cur = norms[-2], norms[-1]
    if prev == 0.0:
        return 0.0
    return (alpha_amul * cur / prev) ** (kmax - length) * cur


@dataclass
class AompConfig:
    """Knobs of the tree search.

    initial_paths, branch and max_paths are the I/B/P of the search: how
    many single-atom paths seed the tree, how many children each expansion
    evaluates, and how many paths may be live at once.  kmax caps the path
    length; with sparsity termination it must equal the sparsity K of the
    problem.  epsilon is the residue threshold relative to ||y||.
    """

    initial_paths: int = 3
    branch: int = 2
    max_paths: int = 200
    kmax: int = 55
    epsilon: float = 1e-6
    cost_model: str = COST_AMUL
    alpha_mul: float = 0.9
    alpha_amul: float = 0.97
    termination: str = TERM_RESIDUE
    select_among_all: bool = False  # pre-modification selection rule, A/B only
    audit: bool = False  # per-iteration invariant checks
    max_iterations: int = 1_000_000

    def validate(self):
        if self.initial_paths < 1:
            raise ValueError("initial_paths must be >= 1")
        if self.branch < 1:
            raise ValueError("branch must be >= 1")
        if self.max_paths < self.initial_paths:
            raise ValueError("max_paths must be >= initial_paths")
        if self.kmax < 1:
            raise ValueError("kmax must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.cost_model not in (COST_MUL, COST_AMUL):
            raise ValueError("unknown cost model %r" % (self.cost_model,))
        if self.termination not in (TERM_SPARSITY, TERM_RESIDUE):
            raise ValueError("unknown termination rule %r" % (self.termination,))
        if not 0.0 < self.alpha_amul <= 1.0:
            raise ValueError("alpha_amul must lie in (0, 1]")
        if self.cost_model == COST_MUL and not 0.0 < self.alpha_mul < 1.0:
            raise ValueError("alpha_mul must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def effective_epsilon(self):
        if self.termination == TERM_SPARSITY:
            return max(self.epsilon, SPARSITY_EPSILON_FLOOR)
        return self.epsilon

    def path_cost(self, norms):
        if self.cost_model == COST_MUL:
            return cost_mul(norms, self.kmax, self.alpha_mul)
        return cost_amul(norms, self.kmax, self.alpha_amul)

    @classmethod
    def sparsity_based(cls, k, **overrides):
        """Search capped at K atoms; the conventional decay is 0.8."""
        kw = dict(kmax=int(k), termination=TERM_SPARSITY, alpha_mul=0.8)
        kw.update(overrides)
        return cls(**kw)

    @classmethod
    def residue_based(cls, kmax, **overrides):
        kw = dict(kmax=int(kmax), termination=TERM_RESIDUE)
        kw.update(overrides)
        return cls(**kw)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        cfg = cls(**d)
        cfg.validate()
        return cfg


def default_config():
    return AompConfig()


def load_config(path):
    """Read an AompConfig from a JSON file; unknown keys are rejected."""
    with open(path) as fh:
        return AompConfig.from_dict(json.load(fh))


def write_default_config(path):
    with open(path, "w") as fh:
        json.dump(default_config().to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class PathState:
    """One search path: ordered support, residue-norm history, cost.

    norms[0] is ||y||; norms[i] is the residue norm after the first i
    atoms.  canonical and node are attached by the trie on insertion.
    exhausted marks a path whose expansion produced no new child; it is
    treated as complete so the search cannot revisit it.
    """

    support: tuple
    norms: tuple
    cost: float
    fact: IncrementalFactorization
    canonical: tuple = ()
    node: object = None
    exhausted: bool = False

    @property
    def length(self):
        return len(self.support)

    def complete(self, kmax):
        return self.exhausted or self.length >= kmax


@dataclass
class ExpansionReport:
    """What one expansion round did."""

    terminated: PathState = None
    consumed: bool = False
    accepted: int = 0
    children_evaluated: int = 0
    equivalent_hits: int = 0
    singular_skips: int = 0
    cost_rejected: int = 0


def init_search(phi, y, config, priorities=None):
    """Seed the trie with the best single-atom paths.

    The initial_paths atoms maximizing |<phi_j, y>| become length-1 paths
    with projected residues.  Trie priorities default to descending
    |<phi_j, y>| (ties by ascending index) and stay fixed for the whole
    search.  Returns (trie, done) where done is a path that already meets
    the residue criterion (the empty path for y = 0) or None.
    """
    config.validate()
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = phi.shape
    corr = correlations(phi, y)
    if priorities is None:
        priorities = top_indices(corr, n)
    trie = SearchTrie(priorities)
    ynorm = float(np.linalg.norm(y))
    if ynorm == 0.0:
        return trie, PathState((), (0.0,), 0.0, IncrementalFactorization.empty(y))
    threshold = config.effective_epsilon() * ynorm
    base = IncrementalFactorization.empty(y)
    done = None
    for j in top_indices(corr, min(config.initial_paths, n)):
        try:
            fact = base.appended(j, phi[:, j])
        except SingularSupportError:
            continue
        norms = (ynorm, fact.residue_norm)
        path = PathState((j,), norms, config.path_cost(norms), fact)
        trie.insert(path)
        if done is None and fact.residue_norm <= threshold:
            done = path
    return trie, done


def select_best_incomplete(trie, config):
    """Minimum-cost live path shorter than kmax; None when all complete.

    Ties break toward the shorter path, then the lexicographically smaller
    canonical support, so selection is deterministic.
    """
    best = None
    best_key = None
    for p in trie.paths():
        if p.complete(config.kmax):
            continue
        key = (p.cost, p.length, p.canonical)
        if best is None or key < best_key:
            best, best_key = p, key
    return best


def _best_any(trie):
    best = None
    best_key = None
    for p in trie.paths():
        key = (p.cost, p.length, p.canonical)
        if best is None or key < best_key:
            best, best_key = p, key
    return best


def _worst_live(trie):
    worst = None
    worst_key = None
    for p in trie.paths():
        key = (p.cost, p.canonical)
        if worst is None or key > worst_key:
            worst, worst_key = p, key
    return worst


def expand(trie, best, phi, y, config):
    """One expansion round: evaluate the branch best-correlated children.

    Candidates are taken in descending-correlation order (ties ascending
    index).  A candidate whose residue meets the criterion terminates the
    round immediately, before any pruning test.  Otherwise it is inserted
    when no equal support set was opened before and it beats the current
    replacement target: the expanded path itself is replaced by its first
    accepted child, spare capacity absorbs further children while fewer
    than max_paths are live, and after that a child must beat the worst
    live path by cost.  A path whose round accepts no child is marked
    exhausted.
    """
    report = ExpansionReport()
    n = phi.shape[1]
    corr = correlations(phi, best.fact.residue)
    if config.audit and best.support:
        held = float(np.max(corr[list(best.support)]))
        if held > 1e-10 * best.norms[0]:
            raise AuditError("expansion candidates overlap the path support")
    width = min(config.branch, n - best.length)
    if width < 1:
        best.exhausted = True
        return report
    threshold = config.effective_epsilon() * best.norms[0]
    for j in top_indices(corr, width, exclude=set(best.support)):
        report.children_evaluated += 1
        try:
            fact = best.fact.appended(j, phi[:, j])
        except SingularSupportError:
            report.singular_skips += 1
            continue
        norms = best.norms + (fact.residue_norm,)
        child = PathState(best.support + (j,), norms, config.path_cost(norms), fact)
        if fact.residue_norm <= threshold:
            report.terminated = child
            return report
        if trie.has_equivalent(child.support):
            report.equivalent_hits += 1
            continue
        if not report.consumed:
            trie.remove(best)
            trie.insert(child)
            report.consumed = True
            report.accepted += 1
        elif trie.live_count < config.max_paths:
            trie.insert(child)
            report.accepted += 1
        else:
            worst = _worst_live(trie)
            if child.cost < worst.cost:
                trie.remove(worst)
                trie.insert(child)
                report.accepted += 1
            else:
                report.cost_rejected += 1
    if not report.consumed:
        best.exhausted = True
    return report


def _audit_trie(trie, config):
    live = trie.paths()
    if len(live) > config.max_paths:
        raise AuditError("live paths exceed max_paths")
    keys = set()
    for p in live:
        if p.canonical in keys:
            raise AuditError("two live paths share a support set")
        keys.add(p.canonical)
        if abs(config.path_cost(p.norms) - p.cost) > 1e-12:
            raise AuditError("stored cost is stale")
        slack = 1e-12 * max(1.0, p.norms[0])
        for a, b in zip(p.norms, p.norms[1:]):
            if b > a + slack:
                raise AuditError("residue history increased along a path")


def _finalize(phi, y, chosen, config, counters, t0, converged=True, solver="aomp"):
    n = phi.shape[1]
    xhat = np.zeros(n)
    if chosen is not None and chosen.support:
        z = chosen.fact.coefficients()
        xhat[list(chosen.support)] = z
        support = chosen.support
        residual = chosen.fact.residue_norm
    else:
        support = ()
        residual = float(np.linalg.norm(y))
    ynorm = float(np.linalg.norm(y))
    if residual <= config.effective_epsilon() * ynorm:
        reason = REASON_RESIDUE
    elif not converged:
        reason = REASON_BUDGET
    else:
        reason = REASON_ALL_COMPLETE
    return RecoveryOutput(
        n=n,
        support=tuple(support),
        xhat=xhat,
        reason=reason,
        solver=solver,
        residual_norm=residual,
        iterations=counters["iterations"],
        paths_opened=counters["paths_opened"],
        nodes_expanded=counters["nodes_expanded"],
        equivalent_hits=counters["equivalent_hits"],
        singular_skips=counters["singular_skips"],
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
        converged=converged,
    )


def aomp_recover(phi, y, config=None, priorities=None):
    """Recover a sparse coefficient vector by best-first tree search.

    Deterministic: identical (phi, y, config, priorities) give identical
    output apart from wall_time_ms.  The returned reason is residue_met
    exactly when ||y - phi @ xhat|| <= epsilon * ||y|| for the effective
    epsilon, all_complete when the search fell back to the best complete
    path (a recovery failure under residue-based termination).
    """
    t0 = time.perf_counter()
    if config is None:
        config = default_config()
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if phi.ndim != 2 or y.ndim != 1 or phi.shape[0] != y.shape[0]:
        raise ValueError("phi must be (M, N) and y length M")
    trie, done = init_search(phi, y, config, priorities=priorities)
    counters = {
        "iterations": 0,
        "paths_opened": trie.inserted_total,
        "nodes_expanded": 0,
        "equivalent_hits": 0,
        "singular_skips": 0,
    }
    chosen = done
    converged = True
    if chosen is None:
        while True:
            if config.select_among_all:
                best = _best_any(trie)
                if best is None or best.complete(config.kmax):
                    chosen = best
                    break
            else:
                best = select_best_incomplete(trie, config)
                if best is None:
                    break
            if counters["iterations"] >= config.max_iterations:
                converged = False
                break
            counters["iterations"] += 1
            report = expand(trie, best, phi, y, config)
            counters["nodes_expanded"] += report.children_evaluated
            counters["equivalent_hits"] += report.equivalent_hits
            counters["singular_skips"] += report.singular_skips
            if config.audit:
                _audit_trie(trie, config)
            if report.terminated is not None:
                chosen = report.terminated
                break
        if chosen is None:
            chosen = _best_any(trie)
    counters["paths_opened"] = trie.inserted_total
    return _finalize(phi, y, chosen, config, counters, t0, converged=converged)


def hybrid_recover(phi, y, config, k):
    """Greedy first, search only on failure.

    Runs plain orthogonal matching pursuit up to k atoms; when that
    already meets the residue criterion its result is returned unchanged
    (stage "omp").  Otherwise the tree search runs with trie priorities
    seeded by OMP's selection order, remaining atoms by descending
    |<phi_j, y>| (stage "astar").
    """
    from .baselines import omp_recover

    t0 = time.perf_counter()
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = phi.shape
    if not 1 <= k <= m:
        raise ValueError("k must satisfy 1 <= k <= M")
    eps = config.effective_epsilon()
    first = omp_recover(phi, y, epsilon=eps, max_iter=min(k, m))
    ynorm = float(np.linalg.norm(y))
    if first.residual_norm <= eps * ynorm:
        first.solver = "hybrid"
        first.hybrid_stage = "omp"
        first.wall_time_ms = (time.perf_counter() - t0) * 1e3
        return first
    taken = set(first.support)
    rest = [j for j in top_indices(correlations(phi, y), n) if j not in taken]
    out = aomp_recover(phi, y, config, priorities=list(first.support) + rest)
    out.solver = "hybrid"
    out.hybrid_stage = "astar"
    out.wall_time_ms = (time.perf_counter() - t0) * 1e3
    return out
