"""Seeded generators for the four synthetic benchmark families.

Instances are pure functions of (sizes, seed).  Randomness comes from the
counter-based Philox4x64-10 generator keyed by the seed, with a fixed,
documented draw order per family, so instances are bit-reproducible and
portable across processes.

Families and their canonical conic forms:

* portfolio:   max mu'x - gamma x'Sigma'x over the simplex, Sigma = FF' + D,
               lifted with y = F'x so P stays diagonal.
* huber:       robust least squares with the Huber loss split into a
               quadratic part u and a linear part v:
               min |u|^2 + 2T 1'v  s.t.  |Ax - b| <= u + v, v >= 0 (T = 1).
* entropy:     max -sum x_i log x_i over the simplex with Ax <= b, one
               exponential cone per entropy term.
* multistage:  T-period portfolio with transaction costs, factor exposures
               and one second-order risk cone per period.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConicError
from .problem import (ConeSpec, ProblemData, exp_cone, nonneg_cone, soc_cone,
                      zero_cone)
from .sparse import CsrMatrix


class InfeasibleBoxBudget(ConicError):
    """The multistage budget cannot fit inside the allocation box."""


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def _csr(mat) -> CsrMatrix:
    return CsrMatrix.from_scipy(sp.csr_matrix(mat))


@dataclass(frozen=True)
class GenSpec:
    """One benchmark instance request: family, sizes and seed."""

    family: str
    n: int
    seed: int
    k: int = 0
    periods: int = 0
    gamma: float = 1.0

    def build(self) -> ProblemData:
        if self.family == "portfolio":
            return gen_portfolio(self.n, self.gamma, self.seed)
        if self.family == "huber":
            return gen_huber(self.n, self.seed)
        if self.family == "entropy":
            return gen_entropy(self.n, self.seed)
        if self.family == "multistage":
            return gen_multistage_portfolio(self.n, self.k, self.periods, self.seed)
        raise ValueError(f"unknown family {self.family!r}")

    @property
    def name(self) -> str:
        if self.family == "multistage":
            return f"multistage_n{self.n}_k{self.k}_T{self.periods}_s{self.seed}"
        return f"{self.family}_n{self.n}_s{self.seed}"


def gen_portfolio(n: int, gamma: float = 1.0, seed: int = 0,
                  mu: np.ndarray | None = None,
                  factor: np.ndarray | None = None,
                  dvec: np.ndarray | None = None) -> ProblemData:
    """Factor-model portfolio QP over the simplex.

    Draw order: F (n x p standard normals, p = round(0.1 n), at least 1),
    D (n uniforms mapped to (0,1] plus 1e-3), mu (n standard normals times
    0.1).  The keyword arguments override the draws (test hook: mu = 0,
    Sigma = I via factor = 0, dvec = 1 recovers the symmetric instance).
    """
    if n < 2:
        raise ValueError("portfolio requires n >= 2")
    rng = _rng(seed)
    p = max(1, _round_half_up(0.1 * n))
    f_draw = rng.standard_normal((n, p))
    d_draw = (1.0 - rng.random(n)) + 1e-3
    mu_draw = 0.1 * rng.standard_normal(n)
    f = f_draw if factor is None else np.asarray(factor, dtype=np.float64)
    d = d_draw if dvec is None else np.asarray(dvec, dtype=np.float64)
    mu_vec = mu_draw if mu is None else np.asarray(mu, dtype=np.float64)
    p = f.shape[1]

    pmat = sp.diags(np.concatenate([2.0 * gamma * d, 2.0 * gamma * np.ones(p)]))
    q = np.concatenate([-mu_vec, np.zeros(p)])
    ones_row = sp.csr_matrix(np.concatenate([np.ones(n), np.zeros(p)]))
    factor_rows = sp.hstack([sp.csr_matrix(f.T), -sp.identity(p)])
    nonneg_rows = sp.hstack([-sp.identity(n), sp.csr_matrix((n, p))])
    a = sp.vstack([ones_row, factor_rows, nonneg_rows])
    b = np.concatenate([[1.0], np.zeros(p), np.zeros(n)])
    cones = [zero_cone(1 + p), nonneg_cone(n)]
    return ProblemData(_csr(pmat), _csr(a), q, b, cones)


def gen_huber(n: int, seed: int = 0, noise: float = 0.1,
              outlier_frac: float = 0.1) -> ProblemData:
    """Huber fitting QP with threshold T = 1 and m = round(1.5 n) rows.

    Draw order: A (m x n standard normals), x_true (n standard normals over
    sqrt(n)), noise vector (m standard normals), outlier uniforms (m in
    [0,1) for selection, then m in [-1,1) for magnitudes).  Setting
    noise = 0 and outlier_frac = 0 gives the exact-recovery instance; the
    draws are always consumed so instances stay comparable across hooks.
    """
    if n < 1:
        raise ValueError("huber requires n >= 1")
    rng = _rng(seed)
    m = _round_half_up(1.5 * n)
    a = rng.standard_normal((m, n))
    x_true = rng.standard_normal(n) / np.sqrt(n)
    eps = rng.standard_normal(m)
    sel = rng.random(m)
    mag = 2.0 * rng.random(m) - 1.0
    b = a @ x_true + noise * eps
    mask = sel < outlier_frac
    b = b + np.where(mask, 10.0 * mag, 0.0)

    big_t = 1.0
    pmat = sp.diags(np.concatenate([np.zeros(n), 2.0 * np.ones(m), np.zeros(m)]))
    q = np.concatenate([np.zeros(n + m), 2.0 * big_t * np.ones(m)])
    eye_m = sp.identity(m)
    zero_nm = sp.csr_matrix((m, n))
    rows1 = sp.hstack([sp.csr_matrix(a), -eye_m, -eye_m])
    rows2 = sp.hstack([sp.csr_matrix(-a), -eye_m, -eye_m])
    rows3 = sp.hstack([zero_nm, sp.csr_matrix((m, m)), -eye_m])
    a_c = sp.vstack([rows1, rows2, rows3])
    b_c = np.concatenate([b, -b, np.zeros(m)])
    return ProblemData(_csr(pmat), _csr(a_c), q, b_c, [nonneg_cone(3 * m)])


def gen_entropy(n: int, seed: int = 0, include_ineq: bool = True) -> ProblemData:
    """Entropy maximization over the simplex with m = round(0.5 n) inequalities.

    Draw order: A (m x n normals with variance n), v (n uniforms).  The
    right-hand side b = A v / 1'v makes v / 1'v feasible by construction.
    include_ineq = False drops the Ax <= b block (test hook; the optimum is
    then uniform with entropy log n); draws are consumed either way.
    """
    if n < 2:
        raise ValueError("entropy requires n >= 2")
    rng = _rng(seed)
    m = _round_half_up(0.5 * n)
    a = np.sqrt(n) * rng.standard_normal((m, n))
    v = rng.random(n)
    b_ineq = a @ (v / np.sum(v))

    # variables (x, t); one exponential cone (t_i, x_i, 1) per term
    q = np.concatenate([np.zeros(n), -np.ones(n)])
    rows = [sp.csr_matrix(np.concatenate([np.ones(n), np.zeros(n)]))]
    rhs = [np.array([1.0])]
    cones: list[ConeSpec] = [zero_cone(1)]
    if include_ineq:
        rows.append(sp.hstack([sp.csr_matrix(a), sp.csr_matrix((m, n))]))
        rhs.append(b_ineq)
        cones.append(nonneg_cone(m))
    exp_rows = sp.lil_matrix((3 * n, 2 * n))
    exp_rhs = np.zeros(3 * n)
    for i in range(n):
        exp_rows[3 * i, n + i] = -1.0      # s1 = t_i
        exp_rows[3 * i + 1, i] = -1.0      # s2 = x_i
        exp_rhs[3 * i + 2] = 1.0           # s3 = 1
        cones.append(exp_cone())
    rows.append(sp.csr_matrix(exp_rows))
    rhs.append(exp_rhs)
    a_c = sp.vstack(rows)
    b_c = np.concatenate(rhs)
    pmat = sp.csr_matrix((2 * n, 2 * n))
    return ProblemData(_csr(pmat), _csr(a_c), q, b_c, cones)


MULTISTAGE_COST = 1e-3
MULTISTAGE_GAMMA = 1.0
MULTISTAGE_INFLOW = 1.0
MULTISTAGE_BOX = 0.1


def gen_multistage_portfolio(n: int, k: int, periods: int, seed: int = 0) -> ProblemData:
    """Multistage portfolio SOCP over `periods` stages.

    Variables per period: allocations x_t (n), factor exposures y_t (k),
    trade volumes z_t (n) and the risk proxy r_t.  Constraints: trade rows
    z_t >= |x_t - x_{t-1}|, one budget row per period, factor rows
    y_t = F_t x_t, boxes x_t in [0, 0.1], y_t in [0, 0.1], and the risk cone
    (r_t; U y_t; D_sqrt * x_t) in K_soc^{n+k+1}.  r_t >= 0 is implied by the
    cone and not emitted as a row.

    Draw order: x0 (n uniforms, normalized to the simplex), D_sqrt (n
    uniforms in [0.1, 1.1)), G (k x k normals, U = upper Cholesky factor of
    GG'/k + 1e-3 I), then per period F_t (k x n folded normals, rows scaled
    to sum 0.5 so the factor box is feasible for every box-feasible x) and
    mu_t (n standard normals).
    """
    if not (n >= k >= 1) or periods < 1:
        raise ValueError("multistage requires n >= k >= 1 and periods >= 1")
    rng = _rng(seed)
    x0 = rng.random(n)
    x0 = x0 / np.sum(x0)
    budget = MULTISTAGE_INFLOW + float(np.sum(x0))
    if MULTISTAGE_BOX * n < budget - 1e-9:
        raise InfeasibleBoxBudget(
            f"box capacity {MULTISTAGE_BOX * n:.3f} cannot hold budget {budget:.3f}")
    d_sqrt = 0.1 + rng.random(n)
    g = rng.standard_normal((k, k))
    cov = g @ g.T / k + 1e-3 * np.eye(k)
    u_fac = np.linalg.cholesky(cov).T
    f_list, mu_list = [], []
    for _ in range(periods):
        f_t = np.abs(rng.standard_normal((k, n)))
        f_t = 0.5 * f_t / f_t.sum(axis=1, keepdims=True)
        f_list.append(f_t)
        mu_list.append(rng.standard_normal(n))

    per = 2 * n + k + 1                # variables per period: x, y, z, r
    nvar = periods * per

    def xcol(t):
        return t * per

    def ycol(t):
        return t * per + n

    def zcol(t):
        return t * per + n + k

    def rcol(t):
        return t * per + 2 * n + k

    data_rows = []
    rhs_parts = []
    cones: list[ConeSpec] = []

    def add_block(mat, rhs):
        data_rows.append(sp.csr_matrix(mat))
        rhs_parts.append(np.atleast_1d(np.asarray(rhs, dtype=np.float64)))

    eye_n = sp.identity(n)
    eye_k = sp.identity(k)

    # zero rows: budget (1 per period) then factor rows (k per period)
    zero_rows = 0
    for t in range(periods):
        row = sp.lil_matrix((1, nvar))
        row[0, xcol(t):xcol(t) + n] = 1.0
        if t == 0:
            add_block(row, [budget])
        else:
            row[0, xcol(t - 1):xcol(t - 1) + n] = -1.0
            add_block(row, [0.0])
        zero_rows += 1
    for t in range(periods):
        blk = sp.lil_matrix((k, nvar))
        blk[:, xcol(t):xcol(t) + n] = f_list[t]
        blk[:, ycol(t):ycol(t) + k] = -eye_k.toarray()
        add_block(blk, np.zeros(k))
        zero_rows += k
    cones.append(zero_cone(zero_rows))

    # nonnegative rows: trade volumes then boxes
    nonneg_rows = 0
    for t in range(periods):
        up = sp.lil_matrix((n, nvar))
        up[:, xcol(t):xcol(t) + n] = eye_n.toarray()
        up[:, zcol(t):zcol(t) + n] = -eye_n.toarray()
        dn = sp.lil_matrix((n, nvar))
        dn[:, xcol(t):xcol(t) + n] = -eye_n.toarray()
        dn[:, zcol(t):zcol(t) + n] = -eye_n.toarray()
        if t == 0:
            add_block(up, x0)
            add_block(dn, -x0)
        else:
            up[:, xcol(t - 1):xcol(t - 1) + n] = -eye_n.toarray()
            dn[:, xcol(t - 1):xcol(t - 1) + n] = eye_n.toarray()
            add_block(up, np.zeros(n))
            add_block(dn, np.zeros(n))
        nonneg_rows += 2 * n
    for t in range(periods):
        lo_x = sp.lil_matrix((n, nvar))
        lo_x[:, xcol(t):xcol(t) + n] = -eye_n.toarray()
        hi_x = sp.lil_matrix((n, nvar))
        hi_x[:, xcol(t):xcol(t) + n] = eye_n.toarray()
        lo_y = sp.lil_matrix((k, nvar))
        lo_y[:, ycol(t):ycol(t) + k] = -eye_k.toarray()
        hi_y = sp.lil_matrix((k, nvar))
        hi_y[:, ycol(t):ycol(t) + k] = eye_k.toarray()
        add_block(lo_x, np.zeros(n))
        add_block(hi_x, MULTISTAGE_BOX * np.ones(n))
        add_block(lo_y, np.zeros(k))
        add_block(hi_y, MULTISTAGE_BOX * np.ones(k))
        nonneg_rows += 2 * n + 2 * k
    cones.append(nonneg_cone(nonneg_rows))

    # one risk cone per period: s = (r_t, U y_t, D_sqrt * x_t)
    for t in range(periods):
        blk = sp.lil_matrix((n + k + 1, nvar))
        blk[0, rcol(t)] = -1.0
        blk[1:k + 1, ycol(t):ycol(t) + k] = -u_fac
        blk[k + 1:, xcol(t):xcol(t) + n] = -np.diag(d_sqrt)
        add_block(blk, np.zeros(n + k + 1))
        cones.append(soc_cone(n + k + 1))

    a_c = sp.vstack(data_rows)
    b_c = np.concatenate(rhs_parts)
    q = np.zeros(nvar)
    for t in range(periods):
        q[xcol(t):xcol(t) + n] = -mu_list[t]
        q[zcol(t):zcol(t) + n] = MULTISTAGE_COST
        q[rcol(t)] = MULTISTAGE_GAMMA
    pmat = sp.csr_matrix((nvar, nvar))
    return ProblemData(_csr(pmat), _csr(a_c), q, b_c, cones)
