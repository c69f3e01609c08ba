"""Command-line front end.

Subcommands map onto the library layers: `recover` runs one instance,
`sweep` and `phase` drive the batch harness, `image` the block-sparse
image pipeline, `rip` the restricted-isometry reports, and `bench` the
two-stage-vs-plain timing comparison.  Every run writes a manifest
(resolved configuration, seed, outputs, timestamps) into its own run
directory so it can be replayed exactly.

Exit codes: 0 when recovery met the residue target, 2 for runs that
finished without meeting it (or commands with no notion of success),
1 for errors.
"""

import argparse
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .astar import AompConfig, aomp_recover, hybrid_recover
from .experiments import (
    make_solver,
    run_batch,
    sweep_k,
    phase_transition,
    write_records_csv,
    write_records_jsonl,
)
from .imaging import psnr, read_pgm, recover_image, synthetic_image, write_pgm
from .results import REASON_RESIDUE
from .rip import condition_report, ric_table
from .siggen import gen_problem

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CONVERGENCE = 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="treepursuit",
        description="Sparse recovery with best-first tree search over matching pursuits.",
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--out", default="runs", help="parent directory for run outputs")
        p.add_argument("--config", default=None, help="JSON file with search settings")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for batches")

    p = sub.add_parser("recover", help="recover a single synthetic instance")
    common(p)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--ensemble", default="gaussian", choices=["gaussian", "uniform", "cars"])
    p.add_argument("--solver", default="aomp",
                   choices=["aomp", "hybrid", "omp", "sp", "iht", "fbp", "mmp-df"])
    _search_flags(p)

    p = sub.add_parser("sweep", help="exact-recovery rate versus sparsity for several solvers")
    common(p)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--k-values", default="10,20,30",
                   help="comma-separated sparsity levels")
    p.add_argument("--ensemble", default="gaussian", choices=["gaussian", "uniform", "cars"])
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--solvers", default="amul-aompe,omp,sp",
                   help="comma-separated solver labels")

    p = sub.add_parser("phase", help="empirical phase-transition curve")
    common(p)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--lambdas", default="0.2,0.4,0.6,0.8")
    p.add_argument("--rhos", default="0.1,0.2,0.3,0.4,0.5,0.6")
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--ensemble", default="gaussian", choices=["gaussian", "uniform", "cars"])
    p.add_argument("--solver", default="amul-aompe")

    p = sub.add_parser("image", help="block-sparse image recovery")
    common(p)
    p.add_argument("--input", default=None, help="PGM image; omit for a synthetic one")
    p.add_argument("--k", type=int, default=12, help="coefficients kept per 8x8 block")
    p.add_argument("--m", type=int, default=32, help="measurements per block")
    p.add_argument("--solver", default="aomp",
                   choices=["aomp", "hybrid", "omp", "sp", "iht", "fbp", "mmp-df"])
    _search_flags(p)

    p = sub.add_parser("rip", help="restricted-isometry constants and recovery conditions")
    common(p)
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--branch", type=int, default=2)
    p.add_argument("--kmax", type=int, default=6)
    p.add_argument("--levels", type=int, default=4,
                   help="largest support size whose constant is computed")
    p.add_argument("--ensemble", default="gaussian", choices=["gaussian", "uniform", "cars"])

    p = sub.add_parser("bench", help="compare two-stage startup against plain search")
    common(p)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--k", type=int, default=25)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--ensemble", default="gaussian", choices=["gaussian", "uniform", "cars"])
    _search_flags(p)
    return parser


def _search_flags(p):
    p.add_argument("--cost-model", default=None, choices=["mul", "amul"])
    p.add_argument("--termination", default=None, choices=["residue", "sparsity"])
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--alpha-mul", type=float, default=None)
    p.add_argument("--alpha-amul", type=float, default=None)
    p.add_argument("--initial-paths", type=int, default=None)
    p.add_argument("--branch", type=int, default=None)
    p.add_argument("--max-paths", type=int, default=None)
    p.add_argument("--audit", action="store_true", default=None)


_SEARCH_KEYS = [
    "cost_model", "termination", "kmax", "epsilon", "alpha_mul",
    "alpha_amul", "initial_paths", "branch", "max_paths", "audit",
]


def _resolve_config(args):
    """Defaults, overridden by the config file, overridden by flags."""
    settings = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(_SEARCH_KEYS)
        if unknown:
            raise ValueError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        settings.update(loaded)
    for key in _SEARCH_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    config = AompConfig(**settings)
    config.validate()
    return config, settings


def _make_run_dir(args):
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
    base = Path(args.out) / ("%s-%s-seed%d" % (args.command, stamp, args.seed))
    run_dir = base
    counter = 1
    while run_dir.exists():
        run_dir = Path(str(base) + "-%d" % counter)
        counter += 1
    run_dir.mkdir(parents=True)
    return run_dir


def _write_manifest(run_dir, args, resolved, outputs, started, finished):
    manifest = {
        "command": args.command,
        "version": __version__,
        "seed": args.seed,
        "argv": resolved.pop("_argv", None),
        "resolved": resolved,
        "outputs": sorted(outputs),
        "started_utc": started,
        "finished_utc": finished,
    }
    path = run_dir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _now():
    return datetime.now(timezone.utc).isoformat()


def _cmd_recover(args):
    config, settings = _resolve_config(args)
    if args.solver in ("aomp", "hybrid") and args.kmax is None and "kmax" not in settings:
        lam = args.m / args.n
        config.kmax = max(args.k + 1, round((0.5 + 0.5 * lam) * args.m))
    if config.termination == "sparsity":
        config.kmax = args.k
    ens, inst = gen_problem(args.m, args.n, args.k, args.ensemble, args.seed)
    if args.solver == "aomp":
        out = aomp_recover(ens.phi, inst.y, config)
    elif args.solver == "hybrid":
        out = hybrid_recover(ens.phi, inst.y, config, args.k)
    else:
        out = make_solver(args.solver).run(ens.phi, inst.y, args.k)
    run_dir = _make_run_dir(args)
    result_path = run_dir / "result.json"
    out.write_json(result_path)
    rel = float(np.linalg.norm(inst.x - out.xhat) / np.linalg.norm(inst.x))
    payload = out.to_dict(include_times=False)
    payload["relative_error"] = rel
    print(json.dumps(payload, indent=2, sort_keys=True))
    resolved = {
        "solver": args.solver, "n": args.n, "m": args.m, "k": args.k,
        "ensemble": args.ensemble, "search": settings,
    }
    _write_manifest(run_dir, args, resolved, [result_path.name], _now(), _now())
    print("run dir: %s" % run_dir)
    return EXIT_OK if out.reason == REASON_RESIDUE else EXIT_NO_CONVERGENCE


# labels accepted by `sweep --solvers` and `phase --solver`
_LABEL_SPECS = {
    "omp": lambda: make_solver("omp"),
    "sp": lambda: make_solver("sp"),
    "iht": lambda: make_solver("iht"),
    "fbp": lambda: make_solver("fbp"),
    "mmp-df": lambda: make_solver("mmp-df"),
    "amul-aompe": lambda: make_solver("aomp", cost_model="amul", termination="residue"),
    "mul-aompe": lambda: make_solver("aomp", cost_model="mul", termination="residue"),
    "mul-aompk": lambda: make_solver("aomp", cost_model="mul", termination="sparsity"),
    "amul-aompk": lambda: make_solver("aomp", cost_model="amul", termination="sparsity"),
    "hybrid": lambda: make_solver("hybrid"),
}


def _solver_from_label(label):
    label = label.strip()
    if label not in _LABEL_SPECS:
        raise ValueError(
            "unknown solver label %r (known: %s)" % (label, ", ".join(sorted(_LABEL_SPECS)))
        )
    return _LABEL_SPECS[label]()


def _cmd_sweep(args):
    started = _now()
    solvers = [_solver_from_label(s) for s in args.solvers.split(",")]
    k_values = [int(k) for k in args.k_values.split(",")]
    result = sweep_k(
        solvers, args.n, args.m, k_values, args.ensemble,
        args.trials, args.seed, jobs=args.jobs,
    )
    run_dir = _make_run_dir(args)
    write_records_csv(result.records(), run_dir / "trials.csv")
    write_records_jsonl(result.records(), run_dir / "trials.jsonl")
    result.write_summary_csv(run_dir / "summary.csv")
    for row in result.summary_rows():
        print(
            "%-12s K=%-3d rate=%.3f anmse=%.3e mean_ms=%.2f"
            % (row["solver"], row["K"], row["rate"], row["anmse"], row["mean_time_ms"])
        )
    resolved = {
        "solvers": [s.label for s in solvers], "n": args.n, "m": args.m,
        "k_values": k_values, "ensemble": args.ensemble, "trials": args.trials,
    }
    _write_manifest(
        run_dir, args, resolved,
        ["trials.csv", "trials.jsonl", "summary.csv"], started, _now(),
    )
    print("run dir: %s" % run_dir)
    return EXIT_NO_CONVERGENCE


def _cmd_phase(args):
    started = _now()
    solver = _solver_from_label(args.solver)
    lambdas = [float(v) for v in args.lambdas.split(",")]
    rhos = [float(v) for v in args.rhos.split(",")]
    curve = phase_transition(
        solver, args.n, lambdas, rhos, args.trials, args.seed,
        ensemble=args.ensemble, jobs=args.jobs,
    )
    run_dir = _make_run_dir(args)
    curve.write_points_csv(run_dir / "phase_points.csv")
    curve.write_grid_csv(run_dir / "phase_grid.csv")
    for point in curve.points:
        star = "censored-%s" % point.censored if point.rho_star is None else "%.4f" % point.rho_star
        print("lambda=%.3f rho*=%s" % (point.lam, star))
    resolved = {
        "solver": solver.label, "n": args.n, "lambdas": lambdas,
        "rhos": rhos, "trials": args.trials, "ensemble": args.ensemble,
    }
    _write_manifest(
        run_dir, args, resolved,
        ["phase_points.csv", "phase_grid.csv"], started, _now(),
    )
    print("run dir: %s" % run_dir)
    return EXIT_NO_CONVERGENCE


def _cmd_image(args):
    started = _now()
    config, settings = _resolve_config(args)
    if args.kmax is None and "kmax" not in settings:
        config.kmax = 20
    if args.alpha_amul is None and "alpha_amul" not in settings:
        config.alpha_amul = 0.85
    if args.input:
        image = read_pgm(args.input)
    else:
        image = synthetic_image(seed=args.seed)

    if args.solver == "aomp":
        solver = make_solver("aomp", **{k: v for k, v in settings.items()})
        solver.params.setdefault("kmax", config.kmax)
        solver.params.setdefault("alpha_amul", config.alpha_amul)
    else:
        solver = make_solver(args.solver)
    result = recover_image(image, args.k, args.m, solver, args.seed)
    run_dir = _make_run_dir(args)
    write_pgm(run_dir / "input.pgm", image)
    write_pgm(run_dir / "sparsified.pgm", np.clip(result.sparsified, 0, 255))
    write_pgm(run_dir / "reconstruction.pgm", result.reconstruction)
    print("blocks: %d  failed: %d" % (result.blocks, result.failed_blocks))
    print("psnr vs sparsified input: %.2f dB" % result.psnr_db)
    resolved = {
        "solver": solver.label, "k": args.k, "m": args.m,
        "input": args.input or "synthetic", "search": settings,
    }
    _write_manifest(
        run_dir, args, resolved,
        ["input.pgm", "sparsified.pgm", "reconstruction.pgm"], started, _now(),
    )
    print("run dir: %s" % run_dir)
    return EXIT_OK if result.failed_blocks == 0 else EXIT_NO_CONVERGENCE


def _cmd_rip(args):
    started = _now()
    from .siggen import gen_matrix

    # unit-norm columns in expectation; the condition bounds assume that scale
    ens = gen_matrix(args.m, args.n, args.seed, entry_std=1.0 / math.sqrt(args.m))
    table = ric_table(ens.phi, args.levels)
    report = condition_report(table, args.k, args.branch, kmax=args.kmax)
    run_dir = _make_run_dir(args)
    payload = {
        "matrix": {"m": args.m, "n": args.n, "seed": args.seed, "ensemble": args.ensemble},
        "constants": table.to_dict(),
        "report": report,
    }
    path = run_dir / "rip_report.json"
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(payload, indent=2, sort_keys=True))
    resolved = {
        "n": args.n, "m": args.m, "k": args.k, "branch": args.branch,
        "kmax": args.kmax, "levels": args.levels,
    }
    _write_manifest(run_dir, args, resolved, [path.name], started, _now())
    print("run dir: %s" % run_dir)
    return EXIT_NO_CONVERGENCE


def _cmd_bench(args):
    started = _now()
    config, settings = _resolve_config(args)
    if args.kmax is None and "kmax" not in settings:
        lam = args.m / args.n
        config.kmax = max(args.k + 1, round((0.5 + 0.5 * lam) * args.m))
    rows = []
    same_support = 0
    for t in range(args.trials):
        from .siggen import derive_seed

        seed = derive_seed(args.seed, "trial", t)
        ens, inst = gen_problem(args.m, args.n, args.k, args.ensemble, seed)
        t0 = time.perf_counter()
        plain = aomp_recover(ens.phi, inst.y, config)
        t_plain = (time.perf_counter() - t0) * 1e3
        t0 = time.perf_counter()
        staged = hybrid_recover(ens.phi, inst.y, config, args.k)
        t_staged = (time.perf_counter() - t0) * 1e3
        same = sorted(plain.support) == sorted(staged.support)
        same_support += int(same)
        rows.append(
            {
                "seed": seed, "plain_ms": t_plain, "staged_ms": t_staged,
                "same_support": bool(same), "staged_stage": staged.hybrid_stage,
            }
        )
    mean_plain = float(np.mean([r["plain_ms"] for r in rows]))
    mean_staged = float(np.mean([r["staged_ms"] for r in rows]))
    print("plain search:  %.2f ms mean" % mean_plain)
    print("two-stage:     %.2f ms mean" % mean_staged)
    print("identical supports: %d/%d" % (same_support, args.trials))
    run_dir = _make_run_dir(args)
    path = run_dir / "bench.json"
    with open(path, "w") as fh:
        json.dump(
            {
                "rows": rows, "mean_plain_ms": mean_plain,
                "mean_staged_ms": mean_staged,
                "identical_supports": same_support, "trials": args.trials,
            },
            fh, indent=2, sort_keys=True,
        )
        fh.write("\n")
    resolved = {
        "n": args.n, "m": args.m, "k": args.k, "trials": args.trials,
        "ensemble": args.ensemble, "search": settings,
    }
    _write_manifest(run_dir, args, resolved, [path.name], started, _now())
    print("run dir: %s" % run_dir)
    return EXIT_NO_CONVERGENCE


_COMMANDS = {
    "recover": _cmd_recover,
    "sweep": _cmd_sweep,
    "phase": _cmd_phase,
    "image": _cmd_image,
    "rip": _cmd_rip,
    "bench": _cmd_bench,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version, 2 for usage errors
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
