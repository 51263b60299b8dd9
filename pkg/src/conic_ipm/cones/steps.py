"""Step-length searches and the batched second-order-cone residual kernel."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import StepTooSmall
from ..problem import EXP, POW
from . import barriers
from .psdcone import step_to_boundary as psd_step_to_boundary
from .psdcone import triangle_dim
from .set import ConeSet

MIN_STEP = 1e-11
BACKTRACK = 0.8


@dataclass
class StepLengthRequest:
    """Current iterate, direction, and search controls.

    The iterate must be strictly interior (z in int K*, s in int K,
    tau > 0, kappa > 0); alpha_max in (0, 1].
    """

    z: np.ndarray
    s: np.ndarray
    dz: np.ndarray
    ds: np.ndarray
    tau: float
    kappa: float
    dtau: float
    dkappa: float
    alpha_max: float = 1.0
    backtrack: float = BACKTRACK


def _ray_bound(v: np.ndarray, dv: np.ndarray) -> float:
    """sup{a : v + a dv > 0} for positive v."""
    neg = dv < 0.0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _soc_bound(v: np.ndarray, dv: np.ndarray) -> float:
    """sup{a : v + a dv in K_soc} for strictly interior v.

    Boundary is the smallest positive root of the residual quadratic
    res(a) = c + b a + a^2 aa with c = res(v) > 0.
    """
    c = float(v[0] * v[0] - np.dot(v[1:], v[1:]))
    b = 2.0 * float(v[0] * dv[0] - np.dot(v[1:], dv[1:]))
    aa = float(dv[0] * dv[0] - np.dot(dv[1:], dv[1:]))
    roots = []
    if aa == 0.0:
        if b < 0.0:
            roots.append(-c / b)
    else:
        disc = b * b - 4.0 * aa * c
        if disc >= 0.0:
            sq = np.sqrt(disc)
            # stable quadratic roots
            qq = -0.5 * (b + np.copysign(sq, b)) if b != 0.0 else 0.5 * sq * (1 if aa > 0 else -1)
            if qq != 0.0:
                roots.extend([qq / aa, c / qq])
            else:
                roots.append(0.0)
    pos = [r for r in roots if r > 0.0]
    bound = min(pos) if pos else np.inf
    # guard the t > 0 half-space in case of roundoff near the boundary
    if dv[0] < 0.0:
        bound = min(bound, -v[0] / dv[0])
    return bound


def step_length(req: StepLengthRequest, cones: ConeSet) -> float:
    """Largest alpha in (0, alpha_max] keeping the iterate inside int F.

    Closed form for the nonnegative/second-order/PSD blocks and for tau and
    kappa; exponential and power blocks backtrack from that symmetric-cone
    bound with ratio `req.backtrack` until both sides pass strict membership.
    Raises StepTooSmall below 1e-11.
    """
    alpha = req.alpha_max
    if req.dtau < 0.0:
        alpha = min(alpha, -req.tau / req.dtau)
    if req.dkappa < 0.0:
        alpha = min(alpha, -req.kappa / req.dkappa)
    nn0, nnd = cones.nonneg_start, cones.nonneg_dim
    if nnd:
        alpha = min(alpha,
                    _ray_bound(req.z[nn0:nn0 + nnd], req.dz[nn0:nn0 + nnd]),
                    _ray_bound(req.s[nn0:nn0 + nnd], req.ds[nn0:nn0 + nnd]))
    for off, dim in cones.socs:
        alpha = min(alpha,
                    _soc_bound(req.z[off:off + dim], req.dz[off:off + dim]),
                    _soc_bound(req.s[off:off + dim], req.ds[off:off + dim]))
    for off, side in cones.psds:
        d = triangle_dim(side)
        alpha = min(alpha,
                    psd_step_to_boundary(req.z[off:off + d], req.dz[off:off + d], side),
                    psd_step_to_boundary(req.s[off:off + d], req.ds[off:off + d], side))
    if alpha < MIN_STEP:
        raise StepTooSmall(f"step length collapsed to {alpha:.3e}")

    if cones.exps or cones.pows:
        while alpha >= MIN_STEP:
            if _nonsym_feasible(req, cones, alpha):
                break
            alpha *= req.backtrack
        else:
            raise StepTooSmall("backtracking line search fell below the minimum step")
    return float(alpha)


def _nonsym_feasible(req: StepLengthRequest, cones: ConeSet, alpha: float) -> bool:
    for off in cones.exps:
        s_t = req.s[off:off + 3] + alpha * req.ds[off:off + 3]
        z_t = req.z[off:off + 3] + alpha * req.dz[off:off + 3]
        if not (barriers.exp_primal_interior(s_t) and barriers.exp_dual_interior(z_t)):
            return False
    for off, a in cones.pows:
        s_t = req.s[off:off + 3] + alpha * req.ds[off:off + 3]
        z_t = req.z[off:off + 3] + alpha * req.dz[off:off + 3]
        if not (barriers.pow_primal_interior(s_t, a)
                and barriers.pow_dual_interior(z_t, a)):
            return False
    return True


# ---------------------------------------------------------------------------
# batched SOC residuals with a fixed deterministic reduction order
# ---------------------------------------------------------------------------
#
# Reduction order for r[i] = t^2 - sum(u_j^2): the squares of u are summed
# left-to-right inside chunks of 8 consecutive entries (the final chunk may
# be short); the chunk partials are then combined pairwise per round,
# adjacent pairs left to right, with an odd trailing partial carried to the
# next round unchanged.  Every implementation of this kernel must reproduce
# these exact IEEE operations so results are bit-identical run to run.

@njit(cache=True)
def _soc_residual_kernel(x, offsets, dims, out):  # pragma: no cover - jit
    max_chunks = 1
    for i in range(offsets.shape[0]):
        c = (dims[i] - 1 + 7) // 8
        if c > max_chunks:
            max_chunks = c
    part = np.empty(max_chunks, dtype=np.float64)
    for i in range(offsets.shape[0]):
        off = offsets[i]
        n_u = dims[i] - 1
        nchunks = (n_u + 7) // 8
        for c in range(nchunks):
            lo = off + 1 + 8 * c
            hi = min(lo + 8, off + 1 + n_u)
            acc = 0.0
            for k in range(lo, hi):
                acc = acc + x[k] * x[k]
            part[c] = acc
        width = nchunks
        while width > 1:
            half = width // 2
            for c in range(half):
                part[c] = part[2 * c] + part[2 * c + 1]
            if width % 2 == 1:
                part[half] = part[width - 1]
                width = half + 1
            else:
                width = half
        t = x[off]
        out[i] = t * t - part[0] if n_u > 0 else t * t


def soc_residuals_batch(cones: ConeSet, x: np.ndarray) -> np.ndarray:
    """Per-cone residuals t^2 - |u|^2 under the fixed reduction order."""
    if not cones.socs:
        return np.zeros(0)
    offsets = np.array([off for off, _ in cones.socs], dtype=np.int64)
    dims = np.array([dim for _, dim in cones.socs], dtype=np.int64)
    out = np.empty(len(cones.socs), dtype=np.float64)
    _soc_residual_kernel(np.ascontiguousarray(x, dtype=np.float64), offsets, dims, out)
    return out
