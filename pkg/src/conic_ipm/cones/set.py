"""Structure-of-arrays cone bookkeeping and blockwise cone predicates.

A :class:`ConeSet` fixes the family-grouped layout of the m conic rows
(zero block, nonnegative block, then second-order, exponential, power and
PSD cones) and carries per-cone metadata.  All engine operations take
disjoint slices of iterate vectors, so per-family batches may run in any
order or concurrently; the set itself is immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BadConeSpec, DimensionMismatch, DomainError
from ..problem import EXP, NONNEG, POW, PSD, SOC, ZERO, ConeSpec
from . import barriers
from .psdcone import psd_grad, psd_min_eig, psd_value, smat, svec, triangle_dim

# unit interior point of the exponential cone and of its dual; the classic
# constant used by this solver family's cold start
EXP_UNIT = np.array([-1.051383945322714, 0.556409619469370, 1.258967884768947])


@dataclass
class ConeSet:
    """Family-grouped index ranges over the m conic rows."""

    m: int
    zero_dim: int
    nonneg_dim: int
    socs: list[tuple[int, int]] = field(default_factory=list)   # (offset, dim)
    exps: list[int] = field(default_factory=list)               # offset
    pows: list[tuple[int, float]] = field(default_factory=list)  # (offset, alpha)
    psds: list[tuple[int, int]] = field(default_factory=list)   # (offset, side)

    @property
    def nonneg_start(self) -> int:
        return self.zero_dim

    @property
    def degree(self) -> int:
        return (self.nonneg_dim + len(self.socs) + 3 * len(self.exps)
                + 3 * len(self.pows) + sum(side for _, side in self.psds))

    def block_cones(self):
        """Iterate (kind, offset, dim, param) over non-aggregated cones."""
        for off, dim in self.socs:
            yield SOC, off, dim, None
        for off in self.exps:
            yield EXP, off, 3, None
        for off, alpha in self.pows:
            yield POW, off, 3, alpha
        for off, side in self.psds:
            yield PSD, off, triangle_dim(side), side

    @staticmethod
    def from_specs(cones: list[ConeSpec]) -> "ConeSet":
        """Build from a family-ordered cone list (see reorder_cones)."""
        stage = 0
        order = {ZERO: 0, NONNEG: 1, SOC: 2, EXP: 3, POW: 4, PSD: 5}
        out = ConeSet(m=0, zero_dim=0, nonneg_dim=0)
        off = 0
        for spec in cones:
            if order[spec.kind] < stage:
                raise BadConeSpec(
                    "cone list is not family-ordered; run reorder_cones first")
            stage = order[spec.kind]
            if spec.kind == ZERO:
                out.zero_dim += spec.dim
            elif spec.kind == NONNEG:
                out.nonneg_dim += spec.dim
            elif spec.kind == SOC:
                out.socs.append((off, spec.dim))
            elif spec.kind == EXP:
                out.exps.append(off)
            elif spec.kind == POW:
                out.pows.append((off, spec.alpha))
            elif spec.kind == PSD:
                out.psds.append((off, spec.side))
            off += spec.dim
        out.m = off
        return out


def degree(cones: ConeSet) -> int:
    """Total barrier degree: nonneg dim + #SOC + PSD sides + 3 per exp/pow."""
    return cones.degree


def unit_init(cones: ConeSet) -> tuple[np.ndarray, np.ndarray]:
    """Canonical strictly interior starting pair (s0, z0); zero block gets 0."""
    s = np.zeros(cones.m)
    z = np.zeros(cones.m)
    nn0 = cones.nonneg_start
    s[nn0:nn0 + cones.nonneg_dim] = 1.0
    z[nn0:nn0 + cones.nonneg_dim] = 1.0
    for off, _ in cones.socs:
        s[off] = 1.0
        z[off] = 1.0
    for off in cones.exps:
        s[off:off + 3] = EXP_UNIT
        z[off:off + 3] = EXP_UNIT
    for off, alpha in cones.pows:
        pt = np.array([np.sqrt(1.0 + alpha), np.sqrt(2.0 - alpha), 0.0])
        s[off:off + 3] = pt
        z[off:off + 3] = pt
    for off, side in cones.psds:
        ident = svec(np.eye(side))
        s[off:off + triangle_dim(side)] = ident
        z[off:off + triangle_dim(side)] = ident
    return s, z


def _check_len(cones: ConeSet, v: np.ndarray) -> None:
    if len(v) != cones.m:
        raise DimensionMismatch(f"vector has length {len(v)}, cone set covers {cones.m}")


def _soc_member(blk: np.ndarray, strict: bool) -> bool:
    nrm = np.linalg.norm(blk[1:])
    return blk[0] > nrm if strict else blk[0] >= nrm


def _exp_member(blk, strict: bool) -> bool:
    x, y, z = blk
    if strict:
        return y > 0.0 and z > 0.0 and np.log(y) + x / y < np.log(z)
    if y > 0.0:
        return z > 0.0 and np.log(y) + x / y <= np.log(z)
    return y == 0.0 and x <= 0.0 and z >= 0.0


def _exp_dual_member(blk, strict: bool) -> bool:
    u, v, w = blk
    if strict:
        return u < 0.0 and w > 0.0 and np.log(-u) + v / u < 1.0 + np.log(w)
    if u < 0.0:
        return w > 0.0 and np.log(-u) + v / u <= 1.0 + np.log(w)
    return u == 0.0 and v >= 0.0 and w >= 0.0


def _pow_member(blk, alpha: float, strict: bool) -> bool:
    x, y, z = blk
    if strict:
        if x <= 0.0 or y <= 0.0:
            return False
        if z == 0.0:
            return True
        return alpha * np.log(x) + (1 - alpha) * np.log(y) > np.log(abs(z))
    if x < 0.0 or y < 0.0:
        return False
    if z == 0.0:
        return True
    if x == 0.0 or y == 0.0:
        return False
    return alpha * np.log(x) + (1 - alpha) * np.log(y) >= np.log(abs(z))


def _pow_dual_member(blk, alpha: float, strict: bool) -> bool:
    u, v, w = blk
    scaled = (u / alpha, v / (1 - alpha), w)
    return _pow_member(scaled, alpha, strict)


def is_in_cone(cones: ConeSet, v: np.ndarray, strict: bool = False) -> bool:
    """Blockwise membership in K.  The zero block requires v = 0 exactly."""
    _check_len(cones, v)
    if np.any(v[:cones.zero_dim] != 0.0):
        return False
    nn = v[cones.nonneg_start:cones.nonneg_start + cones.nonneg_dim]
    if nn.size and (np.any(nn <= 0.0) if strict else np.any(nn < 0.0)):
        return False
    for kind, off, dim, param in cones.block_cones():
        blk = v[off:off + dim]
        if kind == SOC and not _soc_member(blk, strict):
            return False
        if kind == EXP and not _exp_member(blk, strict):
            return False
        if kind == POW and not _pow_member(blk, param, strict):
            return False
        if kind == PSD:
            lam = psd_min_eig(blk, param)
            if lam <= 0.0 if strict else lam < 0.0:
                return False
    return True


def is_in_dual_cone(cones: ConeSet, v: np.ndarray, strict: bool = False) -> bool:
    """Blockwise membership in K*.  The zero block's dual is all of R^n."""
    _check_len(cones, v)
    nn = v[cones.nonneg_start:cones.nonneg_start + cones.nonneg_dim]
    if nn.size and (np.any(nn <= 0.0) if strict else np.any(nn < 0.0)):
        return False
    for kind, off, dim, param in cones.block_cones():
        blk = v[off:off + dim]
        if kind == SOC and not _soc_member(blk, strict):
            return False
        if kind == EXP and not _exp_dual_member(blk, strict):
            return False
        if kind == POW and not _pow_dual_member(blk, param, strict):
            return False
        if kind == PSD:
            lam = psd_min_eig(blk, param)
            if lam <= 0.0 if strict else lam < 0.0:
                return False
    return True


def membership_violation(cones: ConeSet, v: np.ndarray, dual: bool = False) -> float:
    """Max blockwise cone violation; 0 for members.  Used to grade certificates."""
    _check_len(cones, v)
    viol = 0.0
    if not dual and cones.zero_dim:
        viol = float(np.max(np.abs(v[:cones.zero_dim]), initial=0.0))
    nn = v[cones.nonneg_start:cones.nonneg_start + cones.nonneg_dim]
    if nn.size:
        viol = max(viol, float(-np.min(nn, initial=0.0)))
    for kind, off, dim, param in cones.block_cones():
        blk = v[off:off + dim]
        if kind == SOC:
            viol = max(viol, float(np.linalg.norm(blk[1:]) - blk[0]))
        elif kind == EXP:
            # the dual cone maps onto the primal via (u,v,w) -> (-v,-u,e*w)
            x, y, z = blk if not dual else (-blk[1], -blk[0], np.e * blk[2])
            viol = max(viol, -y, -z)
            if y > 0.0 and z > 0.0:
                viol = max(viol, y * (np.log(y) - np.log(z)) + x)
            elif y > 0.0:
                viol = max(viol, y * np.exp(min(x / y, 500.0)) - z)
            elif y == 0.0 and x > 0.0:
                viol = max(viol, x)
        elif kind == POW:
            alpha = param
            x, y, z = blk if not dual else (blk[0] / alpha, blk[1] / (1 - alpha), blk[2])
            viol = max(viol, -x, -y)
            if x > 0.0 and y > 0.0:
                lhs = np.exp(alpha * np.log(x) + (1 - alpha) * np.log(y))
                viol = max(viol, abs(z) - lhs)
            elif z != 0.0:
                viol = max(viol, abs(z))
        elif kind == PSD:
            viol = max(viol, -psd_min_eig(blk, param))
    return max(viol, 0.0)


def barrier_value(cones: ConeSet, z: np.ndarray) -> float:
    """Sum of the dual-side barriers f over all non-zero blocks."""
    _check_len(cones, z)
    nn = z[cones.nonneg_start:cones.nonneg_start + cones.nonneg_dim]
    if nn.size and np.any(nn <= 0.0):
        raise DomainError("nonnegative block not strictly interior")
    total = barriers.nonneg_value(nn) if nn.size else 0.0
    for kind, off, dim, param in cones.block_cones():
        blk = z[off:off + dim]
        if kind == SOC:
            if not _soc_member(blk, strict=True):
                raise DomainError("second-order block not strictly interior")
            total += barriers.soc_value(blk)
        elif kind == EXP:
            total += barriers.exp_dual_value(blk)
        elif kind == POW:
            total += barriers.pow_dual_value(blk, param)
        elif kind == PSD:
            total += psd_value(blk, param)
    return float(total)


def barrier_gradient(cones: ConeSet, z: np.ndarray) -> np.ndarray:
    """Blockwise gradient of the dual-side barrier; zero block maps to 0."""
    _check_len(cones, z)
    g = np.zeros(cones.m)
    nn0, nnd = cones.nonneg_start, cones.nonneg_dim
    nn = z[nn0:nn0 + nnd]
    if nn.size:
        if np.any(nn <= 0.0):
            raise DomainError("nonnegative block not strictly interior")
        g[nn0:nn0 + nnd] = barriers.nonneg_grad(nn)
    for kind, off, dim, param in cones.block_cones():
        blk = z[off:off + dim]
        if kind == SOC:
            if not _soc_member(blk, strict=True):
                raise DomainError("second-order block not strictly interior")
            g[off:off + dim] = barriers.soc_grad(blk)
        elif kind == EXP:
            g[off:off + dim] = barriers.exp_dual_grad(blk)
        elif kind == POW:
            g[off:off + dim] = barriers.pow_dual_grad(blk, param)
        elif kind == PSD:
            g[off:off + dim] = psd_grad(blk, param)
    return g
