"""Canonical problem representation and preprocessing.

A problem is

    minimize    (1/2) x'Px + q'x
    subject to  Ax + s = b,   s in K,

with K an ordered Cartesian product of atomic cones.  P is stored
structurally full (both triangles); downstream KKT assembly consumes only
its upper triangle.

Preprocessing consists of cone reordering (zero and nonnegative cones are
each merged into one leading block, remaining cones grouped by family) and
Ruiz equilibration of ``[P A'; A 0]`` with block-uniform row scaling so a
scaled slack stays inside the same cone.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import BadConeSpec, DimensionMismatch, NonFiniteData, NonSymmetricP
from .sparse import CsrMatrix

ZERO = "zero"
NONNEG = "nonneg"
SOC = "soc"
EXP = "exp"
POW = "pow"
PSD = "psd"

FAMILY_ORDER = (ZERO, NONNEG, SOC, EXP, POW, PSD)

PSD_MAX_SIDE = 32

SCALE_MIN = 1e-4
SCALE_MAX = 1e4
RUIZ_ITERS = 10


@dataclass(frozen=True)
class ConeSpec:
    """One atomic cone: kind plus its row dimension.

    ``alpha`` is only meaningful for power cones, ``side`` only for PSD
    cones (dim is then side*(side+1)/2 in triangular storage).
    """

    kind: str
    dim: int
    alpha: float | None = None
    side: int | None = None


def zero_cone(dim: int) -> ConeSpec:
    return ConeSpec(ZERO, dim)


def nonneg_cone(dim: int) -> ConeSpec:
    return ConeSpec(NONNEG, dim)


def soc_cone(dim: int) -> ConeSpec:
    return ConeSpec(SOC, dim)


def exp_cone() -> ConeSpec:
    return ConeSpec(EXP, 3)


def pow_cone(alpha: float) -> ConeSpec:
    return ConeSpec(POW, 3, alpha=alpha)


def psd_cone(side: int) -> ConeSpec:
    return ConeSpec(PSD, side * (side + 1) // 2, side=side)


@dataclass
class ProblemData:
    """Sparse quadratic-conic problem in canonical form."""

    P: CsrMatrix
    A: CsrMatrix
    q: np.ndarray
    b: np.ndarray
    cones: list[ConeSpec] = field(default_factory=list)

    def __post_init__(self):
        self.q = np.ascontiguousarray(self.q, dtype=np.float64)
        self.b = np.ascontiguousarray(self.b, dtype=np.float64)

    @property
    def n(self) -> int:
        return self.P.nrows

    @property
    def m(self) -> int:
        return self.A.nrows

    def cone_dim(self) -> int:
        return sum(c.dim for c in self.cones)

    def copy(self) -> "ProblemData":
        return ProblemData(self.P.copy(), self.A.copy(), self.q.copy(),
                           self.b.copy(), list(self.cones))


@dataclass
class Equilibration:
    """Diagonal scalings produced by :func:`equilibrate`.

    The scaled problem is P' = c*Dc*P*Dc, A' = Dr*A*Dc, q' = c*Dc*q,
    b' = Dr*b.  Solutions map back via x = Dc*x', z = Dr*z'/c, s = s'/Dr.
    """

    d_row: np.ndarray
    d_col: np.ndarray
    c_obj: float

    @staticmethod
    def identity(m: int, n: int) -> "Equilibration":
        return Equilibration(np.ones(m), np.ones(n), 1.0)


def _check_cone(spec: ConeSpec) -> None:
    if spec.dim <= 0:
        raise BadConeSpec(f"cone {spec.kind} has nonpositive dim {spec.dim}")
    if spec.kind == SOC and spec.dim < 2:
        raise BadConeSpec(f"second-order cone needs dim >= 2, got {spec.dim}")
    elif spec.kind == EXP and spec.dim != 3:
        raise BadConeSpec("exponential cone must have dim 3")
    elif spec.kind == POW:
        if spec.dim != 3:
            raise BadConeSpec("power cone must have dim 3")
        if spec.alpha is None or not (0.0 < spec.alpha < 1.0):
            raise BadConeSpec(f"power cone exponent must lie strictly in (0,1), got {spec.alpha}")
    elif spec.kind == PSD:
        if spec.side is None or spec.side < 1 or spec.side > PSD_MAX_SIDE:
            raise BadConeSpec(f"PSD side must lie in [1, {PSD_MAX_SIDE}], got {spec.side}")
        if spec.dim != spec.side * (spec.side + 1) // 2:
            raise BadConeSpec("PSD triangle dim must equal side*(side+1)/2")
    elif spec.kind not in FAMILY_ORDER:
        raise BadConeSpec(f"unknown cone kind {spec.kind!r}")


def validate(problem: ProblemData) -> None:
    """Check every structural invariant; raise on the first violation."""
    P, A = problem.P, problem.A
    if P.nrows != P.ncols:
        raise DimensionMismatch(f"P must be square, got {P.nrows}x{P.ncols}")
    n = P.nrows
    if A.ncols != n:
        raise DimensionMismatch(f"A has {A.ncols} columns but P is {n}x{n}")
    if len(problem.q) != n:
        raise DimensionMismatch(f"q has length {len(problem.q)}, expected {n}")
    if len(problem.b) != A.nrows:
        raise DimensionMismatch(f"b has length {len(problem.b)}, expected {A.nrows}")
    P.check("P")
    A.check("A")
    for spec in problem.cones:
        _check_cone(spec)
    total = problem.cone_dim()
    if total != A.nrows:
        raise DimensionMismatch(f"cones cover {total} rows but A has {A.nrows}")
    psp = P.to_scipy()
    dif = psp - psp.T
    if dif.nnz and np.max(np.abs(dif.data)) != 0.0:
        raise NonSymmetricP("P must be symmetric (stored full, exact symmetry)")
    for name, arr in (("P", P.values), ("A", A.values), ("q", problem.q), ("b", problem.b)):
        if arr.size and not np.all(np.isfinite(arr)):
            raise NonFiniteData(f"{name} contains a non-finite entry")


def reorder_cones(problem: ProblemData) -> tuple[ProblemData, np.ndarray]:
    """Merge zero/nonneg cones and group remaining cones by family.

    Returns the permuted problem and the row permutation ``perm`` such that
    new row i is old row perm[i] (A' = A[perm], b' = b[perm]).  Within a
    family the original relative order of cones is preserved, so the map is
    idempotent.
    """
    ranges: dict[str, list[tuple[int, ConeSpec]]] = {k: [] for k in FAMILY_ORDER}
    offset = 0
    for spec in problem.cones:
        ranges[spec.kind].append((offset, spec))
        offset += spec.dim

    perm_parts = []
    new_cones: list[ConeSpec] = []
    zero_dim = sum(s.dim for _, s in ranges[ZERO])
    if zero_dim:
        new_cones.append(zero_cone(zero_dim))
    nonneg_dim = sum(s.dim for _, s in ranges[NONNEG])
    if nonneg_dim:
        new_cones.append(nonneg_cone(nonneg_dim))
    for kind in FAMILY_ORDER:
        for off, spec in ranges[kind]:
            perm_parts.append(np.arange(off, off + spec.dim, dtype=np.int64))
            if kind not in (ZERO, NONNEG):
                new_cones.append(spec)

    perm = (np.concatenate(perm_parts) if perm_parts
            else np.zeros(0, dtype=np.int64))
    a_perm = CsrMatrix.from_scipy(problem.A.to_scipy()[perm, :]) if problem.m else problem.A.copy()
    out = ProblemData(problem.P.copy(), a_perm, problem.q.copy(),
                      problem.b[perm].copy(), new_cones)
    return out, perm


def _block_slices(cones: list[ConeSpec]) -> list[tuple[ConeSpec, int, int]]:
    out = []
    off = 0
    for spec in cones:
        out.append((spec, off, off + spec.dim))
        off += spec.dim
    return out


def equilibrate(problem: ProblemData, iters: int = RUIZ_ITERS
                ) -> tuple[ProblemData, Equilibration]:
    """Ruiz-equilibrate ``[P A'; A 0]`` under the max norm.

    Rows belonging to one SOC/EXP/POW/PSD block share a single scalar so the
    scaled slack stays in the same cone.  Accumulated scalings are clipped to
    [1e-4, 1e4]; the cost scaling c normalizes the scaled q to unit max norm
    (clipped the same way).  Zero rows and columns keep scale 1.
    """
    n, m = problem.n, problem.m
    pc = problem.P.to_scipy().tocsc(copy=True)
    ac = problem.A.to_scipy().tocsc(copy=True)
    qc = problem.q.copy()
    bc = problem.b.copy()
    d_col = np.ones(n)
    d_row = np.ones(m)
    blocks = _block_slices(problem.cones)

    def col_max(mat):
        out = np.zeros(mat.shape[1])
        if mat.nnz:
            absmat = sp.csc_matrix((np.abs(mat.data), mat.indices, mat.indptr), shape=mat.shape)
            out = np.asarray(absmat.max(axis=0).todense()).ravel()
        return out

    def row_max(mat):
        out = np.zeros(mat.shape[0])
        if mat.nnz:
            csr = mat.tocsr()
            absmat = sp.csr_matrix((np.abs(csr.data), csr.indices, csr.indptr), shape=csr.shape)
            out = np.asarray(absmat.max(axis=1).todense()).ravel()
        return out

    for _ in range(iters):
        cnorm = np.maximum(col_max(pc), col_max(ac))
        rnorm = row_max(ac)
        for spec, lo, hi in blocks:
            if spec.kind not in (ZERO, NONNEG) and hi > lo:
                rnorm[lo:hi] = rnorm[lo:hi].max()
        cstep = np.where(cnorm > 0, 1.0 / np.sqrt(np.where(cnorm > 0, cnorm, 1.0)), 1.0)
        rstep = np.where(rnorm > 0, 1.0 / np.sqrt(np.where(rnorm > 0, rnorm, 1.0)), 1.0)
        new_dcol = np.clip(d_col * cstep, SCALE_MIN, SCALE_MAX)
        new_drow = np.clip(d_row * rstep, SCALE_MIN, SCALE_MAX)
        cstep = new_dcol / d_col
        rstep = new_drow / d_row
        d_col, d_row = new_dcol, new_drow
        dc = sp.diags(cstep)
        dr = sp.diags(rstep)
        pc = (dc @ pc @ dc).tocsc()
        ac = (dr @ ac @ dc).tocsc()
        qc *= cstep
        bc *= rstep

    qmax = np.max(np.abs(qc)) if n else 0.0
    c_obj = 1.0 if qmax == 0.0 else float(np.clip(1.0 / qmax, SCALE_MIN, SCALE_MAX))
    pc = pc * c_obj
    qc = qc * c_obj

    scaled = ProblemData(CsrMatrix.from_scipy(pc.tocsr()), CsrMatrix.from_scipy(ac.tocsr()),
                         qc, bc, list(problem.cones))
    # keep the scaled pattern identical to the input pattern (scaling can
    # never drop entries; from_scipy only sorts)
    return scaled, Equilibration(d_row, d_col, c_obj)


def scale_values(problem: ProblemData, e: Equilibration) -> ProblemData:
    """Apply an existing equilibration to fresh values with the same pattern."""
    dc = sp.diags(e.d_col)
    dr = sp.diags(e.d_row)
    pc = (dc @ problem.P.to_scipy() @ dc) * e.c_obj
    ac = dr @ problem.A.to_scipy() @ dc
    return ProblemData(CsrMatrix.from_scipy(pc.tocsr()), CsrMatrix.from_scipy(ac.tocsr()),
                       e.c_obj * e.d_col * problem.q, e.d_row * problem.b,
                       list(problem.cones))


def unscale_solution(x: np.ndarray, z: np.ndarray, s: np.ndarray,
                     e: Equilibration) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Map a scaled-space solution back to the original problem's variables."""
    return e.d_col * x, e.d_row * z / e.c_obj, s / e.d_row
