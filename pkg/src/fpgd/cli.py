"""Command-line front end: generate instances, run solves and sweeps,
run verification suites.

One JSON config document drives everything; numeric defaults mirror the
solver defaults (C = 1/128, tol = 5e-6, noise 1e-3).  Exit codes:
0 converged / all checks passed, 2 iteration budget exhausted, 1 numeric
failure, 64 malformed config, missing file, or unknown suite.  Logging
level comes from FPGD_LOG (error | info | debug).
"""

import argparse
import concurrent.futures
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .diagnostics import SUITE_NAMES, relative_error, run_suite
from .problems import ProblemInstance, gen_phase_retrieval, gen_qst, gen_synthetic
from .solver import (
    SolverConfig,
    fgd_solve,
    projfgd_solve,
    summary_dict,
    write_summary_json,
    write_trace_csv,
)

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_MAX_ITERS = 2
EXIT_USAGE = 64

log = logging.getLogger("fpgd")


class ConfigError(Exception):
    """Malformed or incomplete run configuration."""


# ---------------------------------------------------------------------------
# RunConfig handling
# ---------------------------------------------------------------------------


def canonical_config_bytes(doc):
    """Canonical serialized form; loading and re-serializing a config file
    reproduces these bytes exactly."""
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode()


def load_config(path):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        with open(p) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return doc


def write_config(doc, path):
    with open(path, "wb") as fh:
        fh.write(canonical_config_bytes(doc))


def _require(doc, key, where):
    if key not in doc:
        raise ConfigError(f"missing key {key!r} in {where}")
    return doc[key]


def build_instance(problem, seed):
    kind = _require(problem, "kind", "problem")
    if kind == "qst":
        return gen_qst(
            q=int(_require(problem, "q", "problem")),
            r=int(_require(problem, "r", "problem")),
            c_sam=float(_require(problem, "c_sam", "problem")),
            noise_norm=float(problem.get("noise", 1e-3)),
            seed=seed,
        )
    if kind == "phase_retrieval":
        return gen_phase_retrieval(
            n=int(_require(problem, "n", "problem")),
            sparsity=int(_require(problem, "sparsity", "problem")),
            m=int(_require(problem, "m", "problem")),
            noise_norm=float(problem.get("noise", 0.0)),
            lam=problem.get("lam"),
            seed=seed,
        )
    if kind == "synthetic":
        return gen_synthetic(
            n=int(_require(problem, "n", "problem")),
            r=int(_require(problem, "r", "problem")),
            m=int(_require(problem, "m", "problem")),
            condition_number=float(problem.get("condition_number", 2.0)),
            noise_norm=float(problem.get("noise", 0.0)),
            seed=seed,
        )
    if kind == "files":
        ensemble = Path(_require(problem, "ensemble_file", "problem"))
        companion = Path(_require(problem, "companion_file", "problem"))
        for p in (ensemble, companion):
            if not p.exists():
                raise FileNotFoundError(f"instance file not found: {p}")
        return ProblemInstance.load(ensemble, companion)
    raise ConfigError(f"unknown problem kind {kind!r}")


def build_solver_config(solver, rank):
    cfg = SolverConfig(
        rank=rank,
        max_iters=int(solver.get("max_iters", 10000)),
        tol=float(solver.get("tol", 5e-6)),
        step_size_constant=(
            None
            if solver.get("step_size_constant") is None
            else float(solver["step_size_constant"])
        ),
        step_mode=solver.get("step_mode", "fixed_from_init"),
        record_truth_dist=bool(solver.get("record_truth_dist", False)),
    )
    algorithm = solver.get("algorithm", "projfgd")
    if algorithm not in ("projfgd", "fgd"):
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    return cfg, algorithm


def _status_exit(status):
    return {"converged": EXIT_OK, "max_iters": EXIT_MAX_ITERS}.get(status, EXIT_NUMERIC)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_solve(args):
    doc = load_config(args.config)
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    out = Path(args.out or doc.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    instance = build_instance(_require(doc, "problem", "config"), seed)
    solver_doc = doc.get("solver", {})
    cfg, algorithm = build_solver_config(solver_doc, rank=instance.rank)
    log.info("solving %s instance (n=%d, m=%d) with %s",
             instance.meta.get("kind", "file"), instance.dim,
             instance.objective.ensemble.m, algorithm)

    solve = projfgd_solve if algorithm == "projfgd" else fgd_solve
    u, trace = solve(instance, cfg)
    write_trace_csv(trace, out / "trace.csv")
    rel = relative_error(u @ u.conj().T, instance.truth_x)
    summary = summary_dict(trace, final_rel_error=rel, tol=cfg.tol, seed=seed)
    write_summary_json(summary, out / "summary.json")
    log.info("status=%s iters=%d rel_error=%.3e", trace.status, trace.n_iters, rel)
    print(json.dumps(summary, sort_keys=True))
    return _status_exit(trace.status)


def _cell_seed(root_seed, index):
    # Counter-based expansion: cells are independent and reproducible
    # regardless of execution order or parallelism.
    return int(np.random.SeedSequence([root_seed, index]).generate_state(1, np.uint64)[0])


def _run_sweep_cell(payload):
    q, r, c_sam, seed, noise, solver_json = payload
    solver_doc = json.loads(solver_json)
    try:
        instance = gen_qst(q=q, r=r, c_sam=c_sam, noise_norm=noise, seed=seed)
        cfg, algorithm = build_solver_config(solver_doc, rank=r)
        solve = projfgd_solve if algorithm == "projfgd" else fgd_solve
        u, trace = solve(instance, cfg)
        rel = relative_error(u @ u.conj().T, instance.truth_x)
        return {
            "q": q, "r": r, "c_sam": c_sam, "seed": seed,
            "iters": trace.n_iters, "rel_error": rel,
            "elapsed_ms": trace.elapsed_ms, "status": trace.status,
        }
    except Exception as exc:  # failure is recorded in-row, sweep continues
        log.error("sweep cell (q=%s, r=%s, c_sam=%s, seed=%s) failed: %s",
                  q, r, c_sam, seed, exc)
        return {
            "q": q, "r": r, "c_sam": c_sam, "seed": seed,
            "iters": -1, "rel_error": float("nan"),
            "elapsed_ms": float("nan"), "status": "error",
        }


def cmd_sweep(args):
    doc = load_config(args.config)
    root_seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    out = Path(args.out or doc.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    grid = _require(doc, "sweep", "config")
    qs = [int(v) for v in _require(grid, "q", "sweep")]
    rs = [int(v) for v in _require(grid, "r", "sweep")]
    c_sams = [float(v) for v in _require(grid, "c_sam", "sweep")]
    n_seeds = int(grid.get("seeds", 1))
    noise = float(grid.get("noise", 1e-3))
    solver_json = json.dumps(doc.get("solver", {}))

    cells = []
    index = 0
    for q in qs:
        for r in rs:
            for c_sam in c_sams:
                for _ in range(n_seeds):
                    cells.append((q, r, c_sam, _cell_seed(root_seed, index), noise, solver_json))
                    index += 1

    if args.jobs and args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_run_sweep_cell, cells))
    else:
        rows = [_run_sweep_cell(c) for c in cells]

    lines = ["q,r,c_sam,seed,iters,rel_error,elapsed_ms"]
    for row in rows:  # buffered and emitted in grid order
        lines.append(
            f"{row['q']},{row['r']},{row['c_sam']!r},{row['seed']},"
            f"{row['iters']},{row['rel_error']!r},{row['elapsed_ms']!r}"
        )
    with open(out / "sweep.csv", "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"{len(rows)} cells -> {out / 'sweep.csv'}")
    statuses = {row["status"] for row in rows}
    if "error" in statuses or "diverged" in statuses:
        return EXIT_NUMERIC
    if "max_iters" in statuses:
        return EXIT_MAX_ITERS
    return EXIT_OK


def cmd_verify(args):
    if args.suite not in SUITE_NAMES:
        print(f"unknown suite {args.suite!r}; choose from: {', '.join(SUITE_NAMES)}",
              file=sys.stderr)
        return EXIT_USAGE
    seed = args.seed if args.seed is not None else 0
    report = run_suite(args.suite, seed=seed)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"report_{args.suite}.json"
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(json.dumps({"suite": args.suite, "violations": report["violations"],
                      "report": str(path)}, sort_keys=True))
    return EXIT_OK if report["violations"] == 0 else EXIT_NUMERIC


def cmd_generate(args):
    doc = load_config(args.config)
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    out = Path(args.out or doc.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    instance = build_instance(_require(doc, "problem", "config"), seed)
    ensemble_path = out / "ensemble.json"
    companion_path = out / "instance.json"
    instance.save(ensemble_path, companion_path)
    print(json.dumps({"ensemble": str(ensemble_path), "companion": str(companion_path),
                      "dim": instance.dim, "m": instance.objective.ensemble.m,
                      "seed": seed}, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------


def _configure_logging():
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("FPGD_LOG", "error"), logging.ERROR
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fpgd",
        description="Factored projected gradient descent for constrained "
        "low-rank PSD recovery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True, jobs=False):
        if needs_config:
            p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="64-bit seed override")
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="parallel sweep cells")

    p_solve = sub.add_parser("solve", help="run one solve; writes trace.csv and summary.json")
    common(p_solve)
    p_sweep = sub.add_parser("sweep", help="run a (q, r, c_sam, seed) grid; writes sweep.csv")
    common(p_sweep, jobs=True)
    p_verify = sub.add_parser("verify", help="run a named verification suite")
    p_verify.add_argument("suite", help=f"one of: {', '.join(SUITE_NAMES)}")
    common(p_verify, needs_config=False)
    p_gen = sub.add_parser("generate", help="write ensemble.json and instance.json")
    common(p_gen)
    return parser


def main(argv=None):
    _configure_logging()
    args = build_parser().parse_args(argv)
    handler = {
        "solve": cmd_solve,
        "sweep": cmd_sweep,
        "verify": cmd_verify,
        "generate": cmd_generate,
    }[args.command]
    try:
        return handler(args)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
