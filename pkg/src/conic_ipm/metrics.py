"""Benchmark aggregation: shifted geometric means and performance profiles."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PROFILE_POINTS = 64


def shifted_geomean(times, k: float = 1.0) -> float:
    """(prod(t + k))^(1/N) - k over a nonempty list of times >= 0."""
    t = np.asarray(times, dtype=np.float64)
    if t.size == 0:
        raise ValueError("shifted_geomean needs at least one time")
    if np.any(t < 0):
        raise ValueError("times must be nonnegative")
    return float(np.prod(t + k) ** (1.0 / t.size) - k)


@dataclass
class ProfileResult:
    """Step-function samples of the relative and absolute performance profiles."""

    solvers: list[str]
    problems: list[str]
    ratios: dict = field(default_factory=dict)       # (problem, solver) -> u
    rel_grid: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rel: dict = field(default_factory=dict)          # solver -> fractions on rel_grid
    abs_grid: np.ndarray = field(default_factory=lambda: np.zeros(0))
    abs: dict = field(default_factory=dict)          # solver -> fractions on abs_grid


def perf_profiles(times: dict, solvers: list[str] | None = None) -> ProfileResult:
    """Profiles from a dense table times[(problem, solver)] of solve seconds.

    u_{p,s} = t_{p,s} / min_s' t_{p,s'}; the relative profile f_r(tau) is the
    fraction of problems with u <= tau, the absolute profile f_a(tau) the
    fraction with t <= tau seconds.  Both are sampled on log-spaced grids
    that include every breakpoint's neighborhood; ties in the per-problem
    minimum count every tying solver at tau = 1.
    """
    problems = sorted({p for p, _ in times})
    if solvers is None:
        solvers = sorted({s for _, s in times})
    if not problems or not solvers:
        raise ValueError("need at least one problem and one solver")
    out = ProfileResult(solvers=list(solvers), problems=problems)

    best = {p: min(times[(p, s)] for s in solvers) for p in problems}
    for p in problems:
        for s in solvers:
            denom = best[p] if best[p] > 0 else 1.0
            u = times[(p, s)] / denom if best[p] > 0 else (1.0 if times[(p, s)] == 0 else np.inf)
            out.ratios[(p, s)] = u

    finite_u = [u for u in out.ratios.values() if np.isfinite(u)]
    u_hi = max(finite_u) if finite_u else 1.0
    out.rel_grid = np.unique(np.concatenate(
        [[1.0], np.logspace(0.0, np.log10(max(u_hi, 1.0)) + 1e-9, PROFILE_POINTS)]))
    n_p = len(problems)
    for s in solvers:
        us = np.array([out.ratios[(p, s)] for p in problems])
        out.rel[s] = [float(np.count_nonzero(us <= tau)) / n_p for tau in out.rel_grid]

    all_t = np.array([times[(p, s)] for p in problems for s in solvers])
    t_lo = max(float(np.min(all_t)), 1e-9)
    t_hi = max(float(np.max(all_t)), t_lo)
    out.abs_grid = np.unique(np.concatenate(
        [[t_lo], np.logspace(np.log10(t_lo), np.log10(t_hi) + 1e-9, PROFILE_POINTS)]))
    for s in solvers:
        ts = np.array([times[(p, s)] for p in problems])
        out.abs[s] = [float(np.count_nonzero(ts <= tau)) / n_p for tau in out.abs_grid]
    return out


def normalized_geomeans(times: dict, k: float = 1.0) -> dict:
    """Per-solver shifted geomeans and their ratios to the best solver."""
    solvers = sorted({s for _, s in times})
    problems = sorted({p for p, _ in times})
    g = {s: shifted_geomean([times[(p, s)] for p in problems], k) for s in solvers}
    g_min = min(g.values())
    r = {s: (g[s] / g_min if g_min > 0 else (1.0 if g[s] == g_min else np.inf))
         for s in solvers}
    return {"geomean": g, "normalized": r}
