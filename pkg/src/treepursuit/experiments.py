"""Seeded recovery batches, sparsity sweeps, and empirical phase transitions.

Instances are keyed by (base_seed, trial), never by solver, so different
solvers run on byte-identical instances and comparisons are paired.  Wall
time per trial covers the solver call only.  Aggregates (exact-recovery
rate, average normalized MSE, mean time) are all recomputable from the
emitted per-trial records.
"""

import csv
import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .astar import AompConfig, aomp_recover, hybrid_recover
from .baselines import (
    omp_recover,
    sp_recover,
    iht_recover,
    fbp_recover,
    mmp_df_recover,
)
from .siggen import derive_seed, gen_problem

__all__ = [
    "EXACT_RTOL",
    "relative_error",
    "anmse",
    "SolverSpec",
    "make_solver",
    "TrialRecord",
    "TrialBatchResult",
    "run_batch",
    "sweep_k",
    "SweepResult",
    "fit_rho_star",
    "phase_transition",
    "PhaseTransitionCurve",
    "write_records_csv",
    "write_records_jsonl",
]

# an instance counts as exactly recovered when ||x - xhat|| <= 0.01 ||x||
EXACT_RTOL = 1e-2

RECORD_FIELDS = ["solver", "seed", "N", "M", "K", "ensemble", "exact", "rel_err", "time_ms"]


def relative_error(x, xhat):
    xn = float(np.linalg.norm(x))
    if xn == 0.0:
        raise ValueError("reference vector has zero norm")
    return float(np.linalg.norm(np.asarray(x) - np.asarray(xhat))) / xn


def anmse(rel_errors):
    """Average normalized squared error: mean of squared relative errors.

    Non-finite entries are excluded with a warning.
    """
    errs = np.asarray(list(rel_errors), dtype=float)
    if errs.size == 0:
        raise ValueError("anmse needs at least one error")
    finite = np.isfinite(errs)
    if not finite.all():
        warnings.warn("excluding %d non-finite errors" % int((~finite).sum()))
        errs = errs[finite]
        if errs.size == 0:
            raise ValueError("no finite errors left")
    return float(np.mean(errs**2))


@dataclass
class SolverSpec:
    """A named, parameterized solver that can be run on any instance.

    Plain data, so specs travel across process boundaries for parallel
    batches.  `run` dispatches on the name; the sparsity k of the instance
    is always passed in because several solvers need it.
    """

    name: str
    params: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if not self.label:
            self.label = _default_label(self.name, self.params)

    def _aomp_config(self, m, n, k):
        p = self.params
        termination = p.get("termination", "residue")
        cost_model = p.get("cost_model", "amul")
        if termination == "sparsity":
            kmax = k
            alpha_mul = p.get("alpha_mul", 0.8)
        else:
            kmax = p.get("kmax", "auto")
            if kmax == "auto":
                # widest useful path length for this undersampling ratio
                lam = m / n
                kmax = max(k + 1, round((0.5 + 0.5 * lam) * m))
            alpha_mul = p.get("alpha_mul", 0.9)
        return AompConfig(
            initial_paths=p.get("initial_paths", 3),
            branch=p.get("branch", 2),
            max_paths=p.get("max_paths", 200),
            kmax=int(kmax),
            epsilon=p.get("epsilon", 1e-6),
            cost_model=cost_model,
            alpha_mul=alpha_mul,
            alpha_amul=p.get("alpha_amul", 0.97),
            termination=termination,
            audit=p.get("audit", False),
        )

    def run(self, phi, y, k):
        p = self.params
        if self.name == "aomp":
            return aomp_recover(phi, y, self._aomp_config(phi.shape[0], phi.shape[1], k))
        if self.name == "hybrid":
            return hybrid_recover(phi, y, self._aomp_config(phi.shape[0], phi.shape[1], k), k)
        if self.name == "omp":
            return omp_recover(
                phi, y, epsilon=p.get("epsilon", 1e-6), max_iter=p.get("max_iter")
            )
        if self.name == "sp":
            return sp_recover(phi, y, k, max_iter=p.get("max_iter", 100))
        if self.name == "iht":
            return iht_recover(
                phi, y, k, step=p.get("step", 1.0), max_iter=p.get("max_iter", 500)
            )
        if self.name == "fbp":
            return fbp_recover(
                phi,
                y,
                alpha=p.get("alpha"),
                beta=p.get("beta"),
                epsilon=p.get("epsilon", 1e-6),
                max_iter=p.get("max_iter"),
            )
        if self.name == "mmp-df":
            return mmp_df_recover(
                phi,
                y,
                k,
                branching=p.get("branching", 6),
                max_paths=p.get("max_paths", 200),
                epsilon=p.get("epsilon", 1e-6),
            )
        raise ValueError("unknown solver %r" % (self.name,))


def _default_label(name, params):
    if name == "aomp":
        cost = params.get("cost_model", "amul")
        term = "k" if params.get("termination", "residue") == "sparsity" else "e"
        return "%s-aomp%s" % (cost, term)
    return name


def make_solver(name, **params):
    label = params.pop("label", "")
    return SolverSpec(name=name, params=params, label=label)


@dataclass
class TrialRecord:
    solver: str
    seed: int
    n: int
    m: int
    k: int
    ensemble: str
    exact: bool
    rel_err: float
    time_ms: float
    failed: bool = False
    reason: str = ""


@dataclass
class TrialBatchResult:
    records: list

    @property
    def trials(self):
        return len(self.records)

    @property
    def rate(self):
        return float(np.mean([r.exact for r in self.records]))

    @property
    def anmse(self):
        return anmse([r.rel_err for r in self.records])

    @property
    def mean_time_ms(self):
        return float(np.mean([r.time_ms for r in self.records]))


def _run_trial(solver, n, m, k, ensemble, seed):
    ens, inst = gen_problem(m, n, k, ensemble, seed)
    t0 = time.perf_counter()
    failed = False
    reason = "error"
    try:
        out = solver.run(ens.phi, inst.y, k)
        reason = out.reason
    except Exception:
        out = None
        failed = True
    elapsed = (time.perf_counter() - t0) * 1e3
    rel = 1.0 if failed else relative_error(inst.x, out.xhat)
    return TrialRecord(
        solver=solver.label,
        seed=seed,
        n=n,
        m=m,
        k=k,
        ensemble=ensemble,
        exact=bool(rel <= EXACT_RTOL),
        rel_err=rel,
        time_ms=elapsed,
        failed=failed,
        reason=reason,
    )


def _run_trial_star(args):
    return _run_trial(*args)


def run_batch(solver, n, m, k, ensemble, trials, base_seed, jobs=1):
    """`trials` paired instances through one solver.

    Instance seeds derive from (base_seed, trial index) only, so a second
    call with another solver sees the same instances.  With jobs > 1 the
    trials run in a process pool; results are identical either way.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    args = [
        (solver, n, m, k, ensemble, derive_seed(base_seed, "trial", t))
        for t in range(trials)
    ]
    if jobs == 1:
        records = [_run_trial(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_trial_star, args))
    return TrialBatchResult(records)


def write_records_csv(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_FIELDS)
        for r in records:
            writer.writerow(
                [
                    r.solver,
                    r.seed,
                    r.n,
                    r.m,
                    r.k,
                    r.ensemble,
                    int(r.exact),
                    repr(r.rel_err),
                    repr(r.time_ms),
                ]
            )


def write_records_jsonl(records, path):
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(asdict(r), sort_keys=True))
            fh.write("\n")


@dataclass
class SweepResult:
    n: int
    m: int
    ensemble: str
    trials: int
    batches: dict  # {k: {label: TrialBatchResult}}

    def records(self):
        out = []
        for k in sorted(self.batches):
            for label in sorted(self.batches[k]):
                out.extend(self.batches[k][label].records)
        return out

    def summary_rows(self):
        rows = []
        for k in sorted(self.batches):
            for label in sorted(self.batches[k]):
                batch = self.batches[k][label]
                rows.append(
                    {
                        "solver": label,
                        "K": k,
                        "rate": batch.rate,
                        "anmse": batch.anmse,
                        "mean_time_ms": batch.mean_time_ms,
                        "trials": batch.trials,
                    }
                )
        return rows

    def write_summary_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["solver", "K", "rate", "anmse", "mean_time_ms", "trials"]
            )
            writer.writeheader()
            for row in self.summary_rows():
                writer.writerow(row)


def sweep_k(solvers, n, m, k_values, ensemble, trials, base_seed, jobs=1):
    """Rate/ANMSE/time for each solver across sparsity levels, paired."""
    labels = [s.label for s in solvers]
    if len(set(labels)) != len(labels):
        raise ValueError("solver labels must be unique")
    batches = {}
    for k in k_values:
        seed_k = derive_seed(base_seed, "sweep", k)
        batches[int(k)] = {
            s.label: run_batch(s, n, m, int(k), ensemble, trials, seed_k, jobs=jobs)
            for s in solvers
        }
    return SweepResult(n=n, m=m, ensemble=ensemble, trials=trials, batches=batches)


def _logistic_mle(rho, successes, trials, max_iter=60):
    """Newton-scored two-parameter logistic fit; None on failure/separation."""
    x = np.column_stack([np.ones(len(rho)), np.asarray(rho, dtype=float)])
    s = np.asarray(successes, dtype=float)
    t = np.asarray(trials, dtype=float)
    theta = np.zeros(2)
    for _ in range(max_iter):
        eta = np.clip(x @ theta, -35.0, 35.0)
        p = 1.0 / (1.0 + np.exp(-eta))
        w = t * p * (1.0 - p)
        grad = x.T @ (s - t * p)
        hess = x.T @ (x * w[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            return None
        theta = theta + step
        if float(np.max(np.abs(step))) < 1e-10:
            if abs(theta[1]) > 1e4:  # quasi-separation, slope runs away
                return None
            return theta
    return None


def _pav_nonincreasing(values, weights):
    """Pool-adjacent-violators fit of a nonincreasing sequence."""
    blocks = [[-v, w] for v, w in zip(values, weights)]
    merged = []
    for val, w in blocks:
        merged.append([val, w])
        while len(merged) > 1 and merged[-2][0] > merged[-1][0]:
            v2, w2 = merged.pop()
            v1, w1 = merged.pop()
            merged.append([(v1 * w1 + v2 * w2) / (w1 + w2), w1 + w2])
    out = []
    idx = 0
    for val, w in merged:
        taken = 0
        while idx < len(blocks) and taken < w:
            taken += blocks[idx][1]
            out.append(-val)
            idx += 1
    return np.asarray(out)


def fit_rho_star(rhos, successes, trials):
    """Crossing point of the success curve with 1/2 along rho.

    Fits a two-parameter logistic by maximum likelihood; when the fit
    degenerates (separated data, runaway slope, wrong-signed slope) it
    falls back to bisecting a monotone isotonic fit.  Returns
    (rho_star, censored) where censored is None, "low" (success never
    reaches 1/2 inside the tested range) or "high" (success never drops
    to 1/2).
    """
    rhos = np.asarray(rhos, dtype=float)
    successes = np.asarray(successes, dtype=float)
    trials = np.asarray(trials, dtype=float)
    if rhos.size == 0:
        raise ValueError("empty rho grid")
    order = np.argsort(rhos)
    rhos, successes, trials = rhos[order], successes[order], trials[order]
    if np.all(successes == trials):
        return None, "high"
    if np.all(successes == 0):
        return None, "low"
    theta = _logistic_mle(rhos, successes, trials)
    if theta is not None and theta[1] < 0:
        star = -theta[0] / theta[1]
        if rhos[0] <= star <= rhos[-1]:
            return float(star), None
        return None, ("high" if star > rhos[-1] else "low")
    iso = _pav_nonincreasing(successes / trials, trials)
    below = np.flatnonzero(iso < 0.5)
    if below.size == 0:
        return None, "high"
    i = int(below[0])
    if i == 0:
        return None, "low"
    hi_rate, lo_rate = iso[i - 1], iso[i]
    star = rhos[i - 1] + (hi_rate - 0.5) * (rhos[i] - rhos[i - 1]) / (hi_rate - lo_rate)
    return float(star), None


@dataclass
class PhaseCell:
    lam: float
    rho: float
    m: int
    k: int
    successes: int
    trials: int

    @property
    def rate(self):
        return self.successes / self.trials


@dataclass
class PhasePoint:
    lam: float
    rho_star: float
    censored: str
    trials: int


@dataclass
class PhaseTransitionCurve:
    solver: str
    n: int
    ensemble: str
    cells: list
    points: list

    def write_points_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "rho_star", "censored", "trials"])
            for p in self.points:
                writer.writerow(
                    [
                        repr(p.lam),
                        "" if p.rho_star is None else repr(p.rho_star),
                        p.censored or "",
                        p.trials,
                    ]
                )

    def write_grid_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "rho", "M", "K", "successes", "trials", "rate"])
            for c in self.cells:
                writer.writerow(
                    [repr(c.lam), repr(c.rho), c.m, c.k, c.successes, c.trials, repr(c.rate)]
                )


def phase_transition(solver, n, lambdas, rhos, trials, base_seed, ensemble="gaussian", jobs=1):
    """Empirical phase-transition curve on the (lambda, rho) grid.

    lambda = M/N fixes the undersampling, rho = K/M the sparsity fraction
    of each cell; every cell runs `trials` paired instances and per-lambda
    columns are reduced to the rho where the logistic success fit crosses
    1/2 (censored when it never does inside the grid).
    """
    lambdas = [float(l) for l in lambdas]
    rhos = [float(r) for r in rhos]
    if not lambdas or not rhos:
        raise ValueError("lambda and rho grids must be nonempty")
    if any(not 0 < l <= 1 for l in lambdas) or any(not 0 < r <= 1 for r in rhos):
        raise ValueError("lambda and rho values must lie in (0, 1]")
    cells = []
    points = []
    for li, lam in enumerate(lambdas):
        m = max(1, round(lam * n))
        col = []
        for ri, rho in enumerate(rhos):
            k = min(m, max(1, round(rho * m)))
            batch = run_batch(
                solver, n, m, k, ensemble, trials,
                derive_seed(base_seed, "phase", li, ri), jobs=jobs,
            )
            cell = PhaseCell(
                lam=lam, rho=rho, m=m, k=k,
                successes=int(sum(r.exact for r in batch.records)),
                trials=trials,
            )
            col.append(cell)
            cells.append(cell)
        star, censored = fit_rho_star(
            [c.rho for c in col], [c.successes for c in col], [c.trials for c in col]
        )
        points.append(PhasePoint(lam=lam, rho_star=star, censored=censored, trials=trials))
    return PhaseTransitionCurve(
        solver=solver.label, n=n, ensemble=ensemble, cells=cells, points=points
    )
