"""Benchmark suites over the generators, with CSV records and metrics.

Timing uses the wall clock by default.  The "virtual" clock replaces the
measured times with deterministic synthetic seconds derived from iteration
counts and problem size, which makes the CSV bit-reproducible across runs
(used by the reproducibility tests; never meaningful as real timing).
Failed solves carry total time equal to the configured time limit so the
aggregate metrics penalize them the way the benchmark protocol prescribes.
"""
from __future__ import annotations

import csv
import io as _io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .generators import GenSpec
from .ipm import Solver, SolverSettings, TERMINAL_OK
from .metrics import normalized_geomeans, perf_profiles

WALL = "wall"
VIRTUAL = "virtual"

CSV_FIELDS = ["problem", "config", "status", "total_seconds", "setup_seconds",
              "solve_seconds", "iterations", "norm_rp", "norm_rd", "gap"]


@dataclass(frozen=True)
class SolverConfig:
    label: str
    precision: str = "full"
    eps_feas: float = 1e-6
    eps_inf: float = 1e-8
    max_iter: int = 200

    def settings(self, time_limit: float) -> SolverSettings:
        return SolverSettings(eps_feas=self.eps_feas, eps_inf=self.eps_inf,
                              max_iter=self.max_iter, time_limit=time_limit,
                              precision=self.precision)


BUILTIN_CONFIGS = {
    "full": SolverConfig(label="full", precision="full"),
    "mixed": SolverConfig(label="mixed", precision="mixed"),
}


@dataclass
class BenchRecord:
    problem: str
    config: str
    status: str
    total_seconds: float
    setup_seconds: float
    solve_seconds: float
    iterations: int
    norm_rp: float
    norm_rd: float
    gap: float

    @property
    def solved(self) -> bool:
        return self.status in TERMINAL_OK


def run_one(spec: GenSpec, config: SolverConfig, time_limit: float,
            clock: str = WALL) -> BenchRecord:
    problem = spec.build()
    try:
        solver = Solver(problem, config.settings(time_limit))
        result = solver.solve()
        setup_s, solve_s = result.setup_seconds, result.solve_seconds
        iters = result.iterations
        status = result.status
        norm_rp, norm_rd, gap = result.norm_rp, result.norm_rd, result.gap
    except Exception:  # a crash is a failed run, never a failed suite
        setup_s = solve_s = 0.0
        iters = 0
        status = "error"
        norm_rp = norm_rd = gap = float("nan")
    if clock == VIRTUAL:
        setup_s = 1e-6 * (problem.n + problem.m)
        solve_s = 1e-3 * iters
    total = setup_s + solve_s
    if status not in TERMINAL_OK:
        total = time_limit
    return BenchRecord(problem=spec.name, config=config.label, status=status,
                       total_seconds=total, setup_seconds=setup_s,
                       solve_seconds=solve_s, iterations=iters,
                       norm_rp=norm_rp, norm_rd=norm_rd, gap=gap)


def _run_pair(args) -> BenchRecord:
    spec, config, time_limit, clock = args
    return run_one(spec, config, time_limit, clock)


def run_suite(specs: list[GenSpec], configs: list[SolverConfig],
              time_limit: float = 60.0, clock: str = WALL,
              jobs: int = 1) -> list[BenchRecord]:
    """Run every (problem, config) pair; per-run failures never abort the suite.

    jobs > 1 runs pairs in separate processes (isolated solver instances);
    that mode is for throughput only and unsuitable for timing comparisons.
    """
    pairs = [(spec, cfg, time_limit, clock) for spec in specs for cfg in configs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_pair, pairs))
    else:
        records = [_run_pair(p) for p in pairs]
    records.sort(key=lambda r: (r.problem, r.config))
    return records


def records_to_csv(records: list[BenchRecord]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        writer.writerow([r.problem, r.config, r.status, repr(r.total_seconds),
                         repr(r.setup_seconds), repr(r.solve_seconds),
                         r.iterations, repr(r.norm_rp), repr(r.norm_rd),
                         repr(r.gap)])
    return buf.getvalue()


def records_from_csv(text: str) -> list[BenchRecord]:
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or rows[0] != CSV_FIELDS:
        raise ValueError("unrecognized benchmark CSV header")
    out = []
    for row in rows[1:]:
        out.append(BenchRecord(
            problem=row[0], config=row[1], status=row[2],
            total_seconds=float(row[3]), setup_seconds=float(row[4]),
            solve_seconds=float(row[5]), iterations=int(row[6]),
            norm_rp=float(row[7]), norm_rd=float(row[8]), gap=float(row[9])))
    return out


def metrics_from_records(records: list[BenchRecord]) -> dict:
    """Shifted geomeans, normalized scores and both performance profiles."""
    times = {(r.problem, r.config): r.total_seconds for r in records}
    agg = normalized_geomeans(times)
    prof = perf_profiles(times)
    return {
        "geomean": agg["geomean"],
        "normalized": agg["normalized"],
        "ratios": {f"{p}::{s}": u for (p, s), u in prof.ratios.items()},
        "relative_profile": {"tau": prof.rel_grid.tolist(),
                             "fraction": {s: prof.rel[s] for s in prof.solvers}},
        "absolute_profile": {"tau": prof.abs_grid.tolist(),
                             "fraction": {s: prof.abs[s] for s in prof.solvers}},
    }
