"""Command-line front end: solve, gen, bench and metrics subcommands.

Results go to stdout as JSON (or CSV for bench), diagnostics to stderr.
Exit codes: 0 for optimal/infeasible terminations, 1 for limit or error
statuses, 2 for parse or validation failures.
"""
from __future__ import annotations

import argparse
import json
import sys

from .bench import (BUILTIN_CONFIGS, VIRTUAL, WALL, metrics_from_records,
                    records_from_csv, records_to_csv, run_suite)
from .errors import ConicError, ValidationError
from .generators import GenSpec
from .io import read_problem, write_problem
from .ipm import Solver, SolverSettings, TERMINAL_OK
from .kkt.system import FULL, MIXED

FAMILIES = ("portfolio", "huber", "entropy", "multistage")


def _result_doc(result) -> dict:
    doc = {
        "status": result.status,
        "obj_primal": result.obj_primal,
        "obj_dual": result.obj_dual,
        "iterations": result.iterations,
        "setup_seconds": result.setup_seconds,
        "solve_seconds": result.solve_seconds,
        "norm_rp": result.norm_rp,
        "norm_rd": result.norm_rd,
        "gap": result.gap,
        "tau": result.tau,
        "kappa": result.kappa,
        "x": result.x.tolist(),
        "z": result.z.tolist(),
        "s": result.s.tolist(),
        "certificate": None if result.certificate is None else result.certificate.tolist(),
    }
    return doc


def cmd_solve(args) -> int:
    try:
        problem, _meta = read_problem(args.path)
        settings = SolverSettings(
            eps_feas=args.eps_feas, eps_inf=args.eps_inf, max_iter=args.max_iter,
            time_limit=args.time_limit, precision=args.precision,
            verbose=args.verbose)
        solver = Solver(problem, settings)
    except (OSError, ValidationError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    result = solver.solve()
    print(json.dumps(_result_doc(result)))
    return 0 if result.status in TERMINAL_OK else 1


def cmd_gen(args) -> int:
    try:
        spec = GenSpec(family=args.family, n=args.n, seed=args.seed,
                       k=args.k, periods=args.periods, gamma=args.gamma)
        problem = spec.build()
    except (ConicError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    write_problem(problem, args.out, name=spec.name, seed=args.seed)
    print(json.dumps({"written": args.out, "name": spec.name,
                      "n": problem.n, "m": problem.m}))
    return 0


def _parse_int_list(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        if ":" in part:
            lo, hi = part.split(":")
            out.extend(range(int(lo), int(hi)))
        else:
            out.append(int(part))
    return out


def cmd_bench(args) -> int:
    families = [f.strip() for f in args.families.split(",")]
    for fam in families:
        if fam not in FAMILIES:
            print(f"error: unknown family {fam!r}", file=sys.stderr)
            return 2
    sizes = _parse_int_list(args.sizes)
    seeds = _parse_int_list(args.seeds)
    configs = []
    for label in args.configs.split(","):
        label = label.strip()
        if label not in BUILTIN_CONFIGS:
            print(f"error: unknown config {label!r} "
                  f"(have: {', '.join(BUILTIN_CONFIGS)})", file=sys.stderr)
            return 2
        cfg = BUILTIN_CONFIGS[label]
        if args.eps_feas is not None:
            cfg = type(cfg)(label=cfg.label, precision=cfg.precision,
                            eps_feas=args.eps_feas, eps_inf=cfg.eps_inf,
                            max_iter=cfg.max_iter)
        configs.append(cfg)
    specs = []
    for fam in families:
        for n in sizes:
            for seed in seeds:
                specs.append(GenSpec(family=fam, n=n, seed=seed,
                                     k=args.k, periods=args.periods))
    records = run_suite(specs, configs, time_limit=args.time_limit,
                        clock=args.clock, jobs=args.jobs)
    csv_text = records_to_csv(records)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    metrics = metrics_from_records(records)
    if args.metrics:
        with open(args.metrics, "w") as fh:
            json.dump(metrics, fh)
            fh.write("\n")
    n_solved = sum(1 for r in records if r.solved)
    print(f"{n_solved}/{len(records)} runs solved", file=sys.stderr)
    return 0


def cmd_metrics(args) -> int:
    try:
        with open(args.csv) as fh:
            records = records_from_csv(fh.read())
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    metrics = metrics_from_records(records)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(metrics, fh)
            fh.write("\n")
    else:
        print(json.dumps(metrics))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conic-ipm",
                                 description="conic interior-point solver and benchmarks")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem JSON file")
    p.add_argument("path")
    p.add_argument("--eps-feas", type=float, default=1e-6)
    p.add_argument("--eps-inf", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--time-limit", type=float, default=float("inf"))
    p.add_argument("--precision", choices=[FULL, MIXED], default=FULL)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="write a generator instance to a file")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--periods", type=int, default=1)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--families", default="portfolio")
    p.add_argument("--sizes", default="10")
    p.add_argument("--seeds", default="0")
    p.add_argument("--configs", default="full")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--periods", type=int, default=1)
    p.add_argument("--eps-feas", type=float, default=None)
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--clock", choices=[WALL, VIRTUAL], default=WALL)
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel runs (isolated; unsuitable for timing comparisons)")
    p.add_argument("--csv", default=None, help="write records CSV here (default stdout)")
    p.add_argument("--metrics", default=None, help="write metrics JSON here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("metrics", help="recompute metrics from a bench CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_metrics)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
