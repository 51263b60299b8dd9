"""Scaling-matrix updates and the correction terms built from them.

Symmetric cones (nonnegative, second-order, PSD) use Nesterov-Todd scaling:
the KKT block H satisfies H z = s exactly at the scaling point and factors
as H = W'W with lambda = W z = W^-T s.

Exponential and power cones use a quasi-Newton scaling assembled from the
primal-dual pair and its shadow pair (conjugate-gradient images): H is the
symmetric positive-definite rank-3 sum

    H = s s'/<s,z> + ds ds'/<ds,dz> + p p'/<p, Ha^-1 p>,

with ds = s - mu_c*st, dz = z - mu_c*zt, p orthogonal to span{z, zt} and
Ha = mu * hess f(z), which satisfies both central-path identities
H z = s and H zt = st exactly.  Near the central path (where ds, dz vanish
and the pair degenerates to rank one) it falls back to the Hessian scaling
plus a rank-one fix that keeps H z = s.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, ScalingFailure
from ..problem import EXP, POW
from . import barriers
from .psdcone import congruence_matrix, nt_factor, smat, svec, triangle_dim
from .set import ConeSet, is_in_cone, is_in_dual_cone

_BFGS_GUARD = 1e-8


# ---------------------------------------------------------------------------
# second-order cone helpers
# ---------------------------------------------------------------------------

def _soc_res(x: np.ndarray) -> float:
    return float(x[0] * x[0] - np.dot(x[1:], x[1:]))


def soc_apply_wbar(w: np.ndarray, x: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Apply the normalized NT factor (or its inverse) of a second-order cone."""
    sgn = -1.0 if inverse else 1.0
    w0, w1 = w[0], w[1:]
    x0, x1 = x[0], x[1:]
    c = float(w1 @ x1)
    out = np.empty_like(x)
    out[0] = w0 * x0 + sgn * c
    out[1:] = sgn * x0 * w1 + x1 + (c / (1.0 + w0)) * w1
    return out


def _soc_jordan(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = np.empty_like(u)
    out[0] = float(u @ v)
    out[1:] = u[0] * v[1:] + v[0] * u[1:]
    return out


def _soc_arrow_solve(lam: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Solve lam o u = r for the second-order cone Jordan product."""
    res = _soc_res(lam)
    u = np.empty_like(r)
    u[0] = (lam[0] * r[0] - float(lam[1:] @ r[1:])) / res
    u[1:] = (r[1:] - u[0] * lam[1:]) / lam[0]
    return u


@dataclass
class SocScaling:
    w: np.ndarray       # normalized scaling point, w0^2 - |w1|^2 = 1
    eta: float          # (res_s / res_z)^(1/4)
    lam: np.ndarray     # W z = W^-T s


def _soc_update(s: np.ndarray, z: np.ndarray) -> SocScaling:
    res_s, res_z = _soc_res(s), _soc_res(z)
    if res_s <= 0.0 or res_z <= 0.0 or s[0] <= 0.0 or z[0] <= 0.0:
        raise ScalingFailure("second-order block lost the cone interior")
    a, b = np.sqrt(res_s), np.sqrt(res_z)
    sb, zb = s / a, z / b
    gamma = np.sqrt((1.0 + float(sb @ zb)) / 2.0)
    w = (sb + np.concatenate(([zb[0]], -zb[1:]))) / (2.0 * gamma)
    eta = np.sqrt(a / b)
    lam = eta * soc_apply_wbar(w, z)
    return SocScaling(w=w, eta=eta, lam=lam)


def _soc_dense(sc: SocScaling, dim: int) -> np.ndarray:
    h = 2.0 * np.outer(sc.w, sc.w)
    h[np.diag_indices(dim)] += 1.0
    h[0, 0] -= 2.0
    return sc.eta ** 2 * h


# ---------------------------------------------------------------------------
# nonsymmetric (exp/pow) scaling
# ---------------------------------------------------------------------------

@dataclass
class NsymScaling:
    h: np.ndarray        # 3x3 SPD scaling block
    grad_z: np.ndarray   # grad f(z)
    hess_z: np.ndarray   # hess f(z)
    s_tilde: np.ndarray  # -grad f(z)
    z_tilde: np.ndarray  # -grad f*(s)
    mu_cone: float
    mu_tilde: float


def _bfgs_update(s, z, mu, grad_z, hess_z, z_tilde) -> tuple[np.ndarray, float, float]:
    st = -grad_z
    zt = z_tilde
    mu_c = float(s @ z) / 3.0
    mu_t = float(st @ zt) / 3.0
    ds = s - mu_c * st
    dz = z - mu_c * zt
    dot_d = float(ds @ dz)
    nrm = float(np.linalg.norm(ds) * np.linalg.norm(dz))
    h_a = mu * hess_z
    h1 = np.outer(s, s) / float(s @ z)

    h = None
    if dot_d > _BFGS_GUARD * nrm and nrm > 0.0:
        # secant part on the well-separated pair plus the curvature of h_a
        # restricted to the complement of span{z, dz} (Schur form: only a
        # 2x2 system is inverted)
        zbar = np.column_stack([z, dz])
        haz = h_a @ zbar
        m2 = zbar.T @ haz
        m2 = 0.5 * (m2 + m2.T)
        try:
            t3 = h_a - haz @ np.linalg.solve(m2, haz.T)
            h = h1 + np.outer(ds, ds) / dot_d + t3
            h = 0.5 * (h + h.T)
            np.linalg.cholesky(h)
        except np.linalg.LinAlgError:
            h = None
    if h is None:
        # dual scaling with a rank-one fix preserving H z = s
        haz = h_a @ z
        h = h_a - np.outer(haz, haz) / float(z @ haz) + h1
        h = 0.5 * (h + h.T)
        try:
            np.linalg.cholesky(h)
        except np.linalg.LinAlgError:
            # so close to the central path that the fix cancels out in
            # floating point; the plain Hessian scaling is exact there
            h = 0.5 * (h_a + h_a.T)
            try:
                np.linalg.cholesky(h)
            except np.linalg.LinAlgError:
                raise ScalingFailure(
                    "nonsymmetric scaling block is not positive definite") from None
    return h, mu_c, mu_t


def _nsym_update(kind, alpha, s, z, mu) -> NsymScaling:
    if kind == EXP:
        if not barriers.exp_primal_interior(s) or not barriers.exp_dual_interior(z):
            raise ScalingFailure("exponential block lost the cone interior")
        grad_z = barriers.exp_dual_grad(z)
        hess_z = barriers.exp_dual_hess(z)
        zt = barriers.exp_conjugate_dual_point(s)
    else:
        if (not barriers.pow_primal_interior(s, alpha)
                or not barriers.pow_dual_interior(z, alpha)):
            raise ScalingFailure("power block lost the cone interior")
        grad_z = barriers.pow_dual_grad(z, alpha)
        hess_z = barriers.pow_dual_hess(z, alpha)
        zt = barriers.pow_conjugate_dual_point(s, alpha)
    h, mu_c, mu_t = _bfgs_update(s, z, mu, grad_z, hess_z, zt)
    return NsymScaling(h=h, grad_z=grad_z, hess_z=hess_z, s_tilde=-grad_z,
                       z_tilde=zt, mu_cone=mu_c, mu_tilde=mu_t)


@dataclass
class PsdScaling:
    r: np.ndarray
    rinv: np.ndarray
    lam: np.ndarray   # singular values: the scaled point is diag(lam)
    side: int


# ---------------------------------------------------------------------------
# the scaling state
# ---------------------------------------------------------------------------

@dataclass
class ScalingState:
    cones: ConeSet
    mu: float
    nn_h: np.ndarray                       # s/z on the nonnegative block
    nn_w: np.ndarray                       # sqrt(s/z)
    nn_lam: np.ndarray                     # sqrt(s*z)
    socs: list[SocScaling] = field(default_factory=list)
    nsyms: list[NsymScaling] = field(default_factory=list)   # exps then pows
    psds: list[PsdScaling] = field(default_factory=list)

    def kkt_values(self):
        """Diagonal over the zero+nonneg span and dense blocks per cone."""
        diag = np.zeros(self.cones.zero_dim + self.cones.nonneg_dim)
        diag[self.cones.zero_dim:] = self.nn_h
        blocks = []
        for (off, dim), sc in zip(self.cones.socs, self.socs):
            blocks.append((off, _soc_dense(sc, dim)))
        for off, ns in zip(self.cones.exps, self.nsyms[:len(self.cones.exps)]):
            blocks.append((off, ns.h))
        for (off, _), ns in zip(self.cones.pows, self.nsyms[len(self.cones.exps):]):
            blocks.append((off, ns.h))
        for (off, side), ps in zip(self.cones.psds, self.psds):
            q = ps.r @ ps.r.T
            blocks.append((off, congruence_matrix(q)))
        return diag, blocks

    def dense(self) -> np.ndarray:
        """Full m-by-m H for small problems (tests and direction oracles)."""
        h = np.zeros((self.cones.m, self.cones.m))
        diag, blocks = self.kkt_values()
        for i, v in enumerate(diag):
            h[i, i] = v
        for off, blk in blocks:
            d = blk.shape[0]
            h[off:off + d, off:off + d] = blk
        return h


def update_scaling(cones: ConeSet, s: np.ndarray, z: np.ndarray, mu: float) -> ScalingState:
    """Refresh every scaling block at the pair (s, z) with complementarity mu."""
    nn0, nnd = cones.nonneg_start, cones.nonneg_dim
    s_nn, z_nn = s[nn0:nn0 + nnd], z[nn0:nn0 + nnd]
    if nnd and (np.any(s_nn <= 0.0) or np.any(z_nn <= 0.0)):
        raise ScalingFailure("nonnegative block lost the cone interior")
    state = ScalingState(
        cones=cones, mu=mu,
        nn_h=s_nn / z_nn if nnd else np.zeros(0),
        nn_w=np.sqrt(s_nn / z_nn) if nnd else np.zeros(0),
        nn_lam=np.sqrt(s_nn * z_nn) if nnd else np.zeros(0),
    )
    for off, dim in cones.socs:
        state.socs.append(_soc_update(s[off:off + dim], z[off:off + dim]))
    for off in cones.exps:
        state.nsyms.append(_nsym_update(EXP, None, s[off:off + 3], z[off:off + 3], mu))
    for off, alpha in cones.pows:
        state.nsyms.append(_nsym_update(POW, alpha, s[off:off + 3], z[off:off + 3], mu))
    for off, side in cones.psds:
        d = triangle_dim(side)
        r, rinv, lam = nt_factor(s[off:off + d], z[off:off + d], side)
        state.psds.append(PsdScaling(r=r, rinv=rinv, lam=lam, side=side))
    return state


def apply_H(state: ScalingState, v: np.ndarray) -> np.ndarray:
    """Blockwise H v; the zero block maps to 0."""
    cones = state.cones
    out = np.zeros_like(v)
    nn0, nnd = cones.nonneg_start, cones.nonneg_dim
    out[nn0:nn0 + nnd] = state.nn_h * v[nn0:nn0 + nnd]
    for (off, dim), sc in zip(cones.socs, state.socs):
        blk = v[off:off + dim]
        jblk = -blk.copy()
        jblk[0] = blk[0]
        out[off:off + dim] = sc.eta ** 2 * (2.0 * sc.w * float(sc.w @ blk) - jblk)
    nexp = len(cones.exps)
    for off, ns in zip(cones.exps, state.nsyms[:nexp]):
        out[off:off + 3] = ns.h @ v[off:off + 3]
    for (off, _), ns in zip(cones.pows, state.nsyms[nexp:]):
        out[off:off + 3] = ns.h @ v[off:off + 3]
    for (off, side), ps in zip(cones.psds, state.psds):
        d = triangle_dim(side)
        q = ps.r @ ps.r.T
        out[off:off + d] = svec(q @ smat(v[off:off + d], side) @ q)
    return out


def combined_ds(state: ScalingState, cones: ConeSet, s: np.ndarray, z: np.ndarray,
                dz_a: np.ndarray, ds_a: np.ndarray, sigma: float, mu: float) -> np.ndarray:
    """Right-hand side d_s of the combined (predictor+corrector) step.

    Symmetric blocks: W'(lam \\ (lam o lam + eta - sigma*mu*e)) with the
    Mehrotra correction eta = (W^-1 ds_a) o (W dz_a).  Nonsymmetric blocks:
    s + sigma*mu*grad f(z) + eta with the third-order correction
    eta = -1/2 hess'(z)[dz_a, hess(z)^-1 ds_a].  Zero block: 0.
    """
    out = np.zeros(cones.m)
    nn0, nnd = cones.nonneg_start, cones.nonneg_dim
    if nnd:
        lam2 = s[nn0:nn0 + nnd] * z[nn0:nn0 + nnd]
        eta = ds_a[nn0:nn0 + nnd] * dz_a[nn0:nn0 + nnd]
        out[nn0:nn0 + nnd] = state.nn_w * (lam2 + eta - sigma * mu) / state.nn_lam
    for (off, dim), sc in zip(cones.socs, state.socs):
        wi_ds = soc_apply_wbar(sc.w, ds_a[off:off + dim], inverse=True) / sc.eta
        w_dz = sc.eta * soc_apply_wbar(sc.w, dz_a[off:off + dim])
        rhs = _soc_jordan(sc.lam, sc.lam) + _soc_jordan(wi_ds, w_dz)
        rhs[0] -= sigma * mu
        u = _soc_arrow_solve(sc.lam, rhs)
        out[off:off + dim] = sc.eta * soc_apply_wbar(sc.w, u)
    nexp = len(cones.exps)
    nsym_iter = ([(off, ns) for off, ns in zip(cones.exps, state.nsyms[:nexp])]
                 + [(off, ns) for (off, _), ns in zip(cones.pows, state.nsyms[nexp:])])
    for off, ns in nsym_iter:
        third = _nsym_third(cones, off, z[off:off + 3], dz_a[off:off + 3])
        try:
            w = np.linalg.solve(ns.hess_z, ds_a[off:off + 3])
            eta = -0.5 * third @ w
        except np.linalg.LinAlgError:
            # the correction is a heuristic accelerator; drop it rather
            # than fail when the Hessian is numerically singular
            eta = 0.0
        out[off:off + 3] = s[off:off + 3] + sigma * mu * ns.grad_z + eta
    for (off, side), ps in zip(cones.psds, state.psds):
        d = triangle_dim(side)
        a = ps.rinv @ smat(ds_a[off:off + d], side) @ ps.rinv.T
        b = ps.r.T @ smat(dz_a[off:off + d], side) @ ps.r
        eta_m = 0.5 * (a @ b + b @ a)
        rhs_m = np.diag(ps.lam ** 2) + eta_m - sigma * mu * np.eye(side)
        u = 2.0 * rhs_m / np.add.outer(ps.lam, ps.lam)
        out[off:off + d] = svec(ps.r @ u @ ps.r.T)
    return out


def _nsym_third(cones: ConeSet, off: int, z_blk: np.ndarray, u: np.ndarray) -> np.ndarray:
    if off in cones.exps:
        return barriers.exp_dual_third(z_blk, u)
    alpha = dict(cones.pows)[off]
    return barriers.pow_dual_third(z_blk, u, alpha)


def shadow_iterates(cones: ConeSet, s: np.ndarray, z: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray, float]:
    """Gradient-mapped pair st = -grad f(z), zt = -grad f*(s) and its mu.

    Zero blocks map to 0.  Raises DomainError off the strict interior.
    """
    if not is_in_cone(cones, s, strict=True):
        raise DomainError("s is not strictly interior to K")
    if not is_in_dual_cone(cones, z, strict=True):
        raise DomainError("z is not strictly interior to K*")
    st = np.zeros(cones.m)
    zt = np.zeros(cones.m)
    nn0, nnd = cones.nonneg_start, cones.nonneg_dim
    st[nn0:nn0 + nnd] = 1.0 / z[nn0:nn0 + nnd]
    zt[nn0:nn0 + nnd] = 1.0 / s[nn0:nn0 + nnd]
    for off, dim in cones.socs:
        zb, sb = z[off:off + dim], s[off:off + dim]
        st[off:off + dim] = -barriers.soc_grad(zb)
        zt[off:off + dim] = -barriers.soc_conjugate_grad(sb)
    for off in cones.exps:
        st[off:off + 3] = -barriers.exp_dual_grad(z[off:off + 3])
        zt[off:off + 3] = barriers.exp_conjugate_dual_point(s[off:off + 3])
    for off, alpha in cones.pows:
        st[off:off + 3] = -barriers.pow_dual_grad(z[off:off + 3], alpha)
        zt[off:off + 3] = barriers.pow_conjugate_dual_point(s[off:off + 3], alpha)
    for off, side in cones.psds:
        d = triangle_dim(side)
        st[off:off + d] = svec(np.linalg.inv(smat(z[off:off + d], side)))
        zt[off:off + d] = svec(np.linalg.inv(smat(s[off:off + d], side)))
    nu = cones.degree
    mu_tilde = float(st @ zt) / nu if nu else 0.0
    return st, zt, mu_tilde


def neighborhood_ok(cones: ConeSet, s: np.ndarray, z: np.ndarray,
                    mu: float, beta: float) -> bool:
    """Central-path proximity: nu_i / <grad f*(s_i), grad f(z_i)> >= beta*mu per cone."""
    thresh = beta * mu
    nn0, nnd = cones.nonneg_start, cones.nonneg_dim
    if nnd:
        s_nn, z_nn = s[nn0:nn0 + nnd], z[nn0:nn0 + nnd]
        if np.any(s_nn <= 0.0) or np.any(z_nn <= 0.0):
            raise DomainError("nonnegative block not strictly interior")
        if nnd / float(np.sum(1.0 / (s_nn * z_nn))) < thresh:
            return False
    for off, dim in cones.socs:
        sb, zb = s[off:off + dim], z[off:off + dim]
        rs, rz = _soc_res(sb), _soc_res(zb)
        if rs <= 0.0 or rz <= 0.0 or sb[0] <= 0.0 or zb[0] <= 0.0:
            raise DomainError("second-order block not strictly interior")
        if rs * rz / float(sb @ zb) < thresh:
            return False
    for off in cones.exps:
        zt = barriers.exp_conjugate_dual_point(s[off:off + 3])
        st = -barriers.exp_dual_grad(z[off:off + 3])
        if 3.0 / float(st @ zt) < thresh:
            return False
    for off, alpha in cones.pows:
        zt = barriers.pow_conjugate_dual_point(s[off:off + 3], alpha)
        st = -barriers.pow_dual_grad(z[off:off + 3], alpha)
        if 3.0 / float(st @ zt) < thresh:
            return False
    for off, side in cones.psds:
        d = triangle_dim(side)
        try:
            sinv = np.linalg.inv(smat(s[off:off + d], side))
            zinv = np.linalg.inv(smat(z[off:off + d], side))
        except np.linalg.LinAlgError:
            raise DomainError("PSD block not strictly interior") from None
        if side / float(np.sum(sinv * zinv.T)) < thresh:
            return False
    return True
