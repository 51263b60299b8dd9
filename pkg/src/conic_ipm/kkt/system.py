"""Assembly, factorization and refined solves of the quasi-definite KKT matrix

    K = [ P   A' ]
        [ A  -H  ]

stored as its upper triangle with value slots for every possible scaling
entry (diagonal on the zero/nonnegative rows, dense small blocks per
second-order/exponential/power/PSD cone).  The symbolic analysis (fill
reducing permutation, elimination tree, L pattern) runs once; value updates
scatter in place and reuse it.

Solves run iterative refinement: residuals are always measured against the
unregularized full-precision K, corrections go through the regularized
factors, which in mixed mode are computed from a float32 shadow copy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConicError, FactorizationFailure, PatternMismatch
from ..sparse import CsrMatrix
from ..cones.set import ConeSet
from . import ldl
from .ordering import minimum_degree

FULL = "full"
MIXED = "mixed"

_EPS32 = float(np.finfo(np.float32).eps)
_EPS64 = float(np.finfo(np.float64).eps)


def default_static_reg(precision: str) -> float:
    """1e-8 in full precision, sqrt(reduced machine epsilon) in mixed."""
    return 1e-8 if precision == FULL else float(np.sqrt(np.finfo(np.float32).eps))


def default_dynamic_reg(precision: str) -> float:
    """Square of the active machine epsilon."""
    return _EPS64 ** 2 if precision == FULL else _EPS32 ** 2


@dataclass
class RefinementSettings:
    t_abs: float = 1e-12
    t_rel: float = 1e-12
    t_max: int = 10

    def __post_init__(self):
        if self.t_abs <= 0 or self.t_rel <= 0 or self.t_max < 1:
            raise ValueError("refinement tolerances must be positive, t_max >= 1")


@dataclass
class RefineResult:
    x: np.ndarray
    steps: int
    stalled: bool
    residual: float


class KKTSystem:
    """Quasi-definite KKT matrix with reusable symbolic factorization."""

    def __init__(self, P: CsrMatrix, A: CsrMatrix, cones: ConeSet,
                 precision: str = FULL,
                 delta_s: float | None = None, delta_d: float | None = None):
        if precision not in (FULL, MIXED):
            raise ValueError(f"unknown precision mode {precision!r}")
        self.n = P.nrows
        self.m = A.nrows
        self.dim = self.n + self.m
        self.precision = precision
        self.delta_s = default_static_reg(precision) if delta_s is None else delta_s
        self.delta_d = default_dynamic_reg(precision) if delta_d is None else delta_d
        self.num_symbolic = 0
        self.num_numeric = 0
        self._factor_fresh = False
        self._symbolic_done = False
        self._build_pattern(P, A, cones)
        self.set_matrices(P, A)

    # -- pattern construction -------------------------------------------------

    def _build_pattern(self, P: CsrMatrix, A: CsrMatrix, cones: ConeSet) -> None:
        n, m = self.n, self.m
        self._p_pattern = (P.rowptr.copy(), P.colidx.copy())
        self._a_pattern = (A.rowptr.copy(), A.colidx.copy())
        rows: list[set[int]] = [set() for _ in range(self.dim)]
        for i in range(n):
            rows[i].add(i)
            for p in range(P.rowptr[i], P.rowptr[i + 1]):
                j = int(P.colidx[p])
                if j >= i:
                    rows[i].add(j)
        for r in range(m):
            for p in range(A.rowptr[r], A.rowptr[r + 1]):
                rows[int(A.colidx[p])].add(n + r)
        lin = cones.zero_dim + cones.nonneg_dim
        for r in range(lin):
            rows[n + r].add(n + r)
        self._block_meta = []
        for _, off, d, _ in cones.block_cones():
            self._block_meta.append((off, d))
            for rl in range(d):
                for cl in range(rl, d):
                    rows[n + off + rl].add(n + off + cl)

        rowptr = np.zeros(self.dim + 1, dtype=np.int64)
        cols_sorted = []
        lookup: list[dict[int, int]] = []
        nnz = 0
        for i in range(self.dim):
            cols = sorted(rows[i])
            cols_sorted.append(cols)
            lookup.append({c: nnz + k for k, c in enumerate(cols)})
            nnz += len(cols)
            rowptr[i + 1] = nnz
        self.rowptr = rowptr
        self.colidx = np.array([c for cols in cols_sorted for c in cols], dtype=np.int64)
        self.values = np.zeros(nnz)
        self.values32: np.ndarray | None = None

        p_map = np.full(P.nnz, -1, dtype=np.int64)
        for i in range(n):
            for p in range(P.rowptr[i], P.rowptr[i + 1]):
                j = int(P.colidx[p])
                if j >= i:
                    p_map[p] = lookup[i][j]
        self._p_src = np.where(p_map >= 0)[0]
        self._p_dst = p_map[self._p_src]

        a_map = np.empty(A.nnz, dtype=np.int64)
        for r in range(m):
            for p in range(A.rowptr[r], A.rowptr[r + 1]):
                a_map[p] = lookup[int(A.colidx[p])][n + r]
        self._a_map = a_map

        self._hdiag_slots = np.array(
            [lookup[n + r][n + r] for r in range(lin)], dtype=np.int64)
        self._hblock_slots = []
        for off, d in self._block_meta:
            slots = np.array([lookup[n + off + rl][n + off + cl]
                              for rl in range(d) for cl in range(rl, d)], dtype=np.int64)
            self._hblock_slots.append(slots)
        self._triu_cache = {d: np.triu_indices(d) for _, d in self._block_meta}

    # -- value scatter --------------------------------------------------------

    def set_matrices(self, P: CsrMatrix | None = None, A: CsrMatrix | None = None) -> None:
        """Scatter new P and/or A values; patterns must match the assembled ones."""
        if P is not None:
            if (not np.array_equal(P.rowptr, self._p_pattern[0])
                    or not np.array_equal(P.colidx, self._p_pattern[1])):
                raise PatternMismatch("P sparsity pattern changed since assembly")
            self.values[self._p_dst] = P.values[self._p_src]
        if A is not None:
            if (not np.array_equal(A.rowptr, self._a_pattern[0])
                    or not np.array_equal(A.colidx, self._a_pattern[1])):
                raise PatternMismatch("A sparsity pattern changed since assembly")
            self.values[self._a_map] = A.values
        self._after_value_change()

    def set_scaling(self, diag: np.ndarray, blocks) -> None:
        """Scatter -H: diagonal over the zero/nonneg rows plus dense cone blocks."""
        if len(diag) != len(self._hdiag_slots):
            raise PatternMismatch("scaling diagonal does not match the cone layout")
        self.values[self._hdiag_slots] = -diag
        if len(blocks) != len(self._hblock_slots):
            raise PatternMismatch("scaling block count does not match the cone layout")
        for (off_blk, blk), slots, (off, d) in zip(blocks, self._hblock_slots,
                                                   self._block_meta):
            if off_blk != off or blk.shape != (d, d):
                raise PatternMismatch("scaling block offset/shape mismatch")
            iu, ju = self._triu_cache[d]
            self.values[slots] = -blk[iu, ju]
        self._after_value_change()

    def _after_value_change(self) -> None:
        self._factor_fresh = False
        if self.precision == MIXED:
            self.values32 = self.values.astype(np.float32)

    # -- symbolic / numeric factorization ------------------------------------

    def symbolic_factor(self) -> None:
        """Fill-reducing permutation, elimination tree and L structure (idempotent)."""
        if self._symbolic_done:
            return
        dim = self.dim
        perm = minimum_degree(dim, self.rowptr, self.colidx)
        iperm = np.empty(dim, dtype=np.int64)
        iperm[perm] = np.arange(dim, dtype=np.int64)
        self.perm, self.iperm = perm, iperm

        cols: list[list[tuple[int, int]]] = [[] for _ in range(dim)]
        for i in range(dim):
            pi = iperm[i]
            for p in range(self.rowptr[i], self.rowptr[i + 1]):
                pj = iperm[self.colidx[p]]
                r, c = (pi, pj) if pi <= pj else (pj, pi)
                cols[c].append((r, p))
        cp = np.zeros(dim + 1, dtype=np.int64)
        ci = np.empty(len(self.colidx), dtype=np.int64)
        gather = np.empty(len(self.colidx), dtype=np.int64)
        static_pos = np.empty(dim, dtype=np.int64)
        k = 0
        for c in range(dim):
            for r, src in sorted(cols[c]):
                ci[k] = r
                gather[k] = src
                if r == c:
                    static_pos[c] = k
                k += 1
            cp[c + 1] = k
        self._cp, self._ci, self._gather, self._static_pos = cp, ci, gather, static_pos
        self._signs = np.where(perm < self.n, 1, -1).astype(np.int8)

        parent = np.empty(dim, dtype=np.int64)
        lnz = np.empty(dim, dtype=np.int64)
        flag = np.empty(dim, dtype=np.int64)
        ldl.ldl_symbolic(dim, cp, ci, parent, lnz, flag)
        lp = np.zeros(dim + 1, dtype=np.int64)
        np.cumsum(lnz, out=lp[1:])
        self._parent, self._lp = parent, lp
        self._li = np.empty(int(lp[-1]), dtype=np.int64)
        self._flag = flag
        self._lnz_count = np.empty(dim, dtype=np.int64)
        self._pattern = np.empty(dim, dtype=np.int64)
        self._lx = {}
        self._d = {}
        self._y = {}
        for dt in ((np.float64,) if self.precision == FULL else (np.float32,)):
            self._lx[dt] = np.empty(int(lp[-1]), dtype=dt)
            self._d[dt] = np.empty(dim, dtype=dt)
            self._y[dt] = np.zeros(dim, dtype=dt)
        self.num_symbolic += 1
        self._symbolic_done = True

    @property
    def _active_dtype(self):
        return np.float64 if self.precision == FULL else np.float32

    def numeric_factor(self) -> None:
        """Regularized LDL' of the currently scattered values."""
        if not self._symbolic_done:
            self.symbolic_factor()
        dt = self._active_dtype
        source = self.values if self.precision == FULL else self.values32
        cx = source[self._gather].astype(dt, copy=True)
        cx[self._static_pos] += (self._signs * dt(self.delta_s)).astype(dt)
        status = ldl.ldl_numeric(
            self.dim, self._cp, self._ci, cx, self._lp, self._parent,
            self._lnz_count, self._li, self._lx[dt], self._d[dt], self._y[dt],
            self._pattern, self._flag, self._signs,
            dt(self.delta_s), dt(self.delta_d))
        if status < 0:
            raise FactorizationFailure("zero pivot after regularization")
        self.last_bumped_pivots = int(status)
        self.num_numeric += 1
        self._factor_fresh = True

    def _factor_solve(self, rhs: np.ndarray) -> np.ndarray:
        dt = self._active_dtype
        xp = rhs[self.perm].astype(dt, copy=True)
        ldl.ldl_solve(self.dim, self._lp, self._li, self._lx[dt], self._d[dt], xp)
        out = np.empty(self.dim)
        out[self.perm] = xp.astype(np.float64)
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Unregularized full-precision K x (upper-triangle symmetric matvec)."""
        out = np.empty(self.dim)
        ldl.symm_matvec_upper(self.dim, self.rowptr, self.colidx, self.values, x, out)
        return out

    def solve_refined(self, b: np.ndarray,
                      settings: RefinementSettings | None = None) -> RefineResult:
        """Iteratively refined solve of K x = b against the unregularized K.

        Corrections go through the regularized (possibly reduced-precision)
        factors; residuals and iterates stay in full precision.  Stops at
        ||b - Kx||_inf <= t_abs + t_rel ||b||_inf or after t_max steps and
        returns the best iterate by residual norm; a residual that grows on
        two consecutive steps sets the stalled flag.
        """
        if not self._factor_fresh:
            raise ConicError("numeric factorization is stale; call numeric_factor first")
        st = settings or RefinementSettings()
        target = st.t_abs + st.t_rel * (float(np.max(np.abs(b))) if len(b) else 0.0)
        x = np.zeros(self.dim)
        r = b.copy()
        best_x, best_norm = x.copy(), np.inf
        prev_norm = np.inf
        increases = 0
        for step in range(1, st.t_max + 1):
            x = x + self._factor_solve(r)
            r = b - self.matvec(x)
            rn = float(np.max(np.abs(r))) if len(r) else 0.0
            if rn < best_norm:
                best_x, best_norm = x.copy(), rn
            if rn <= target:
                return RefineResult(x=x, steps=step, stalled=False, residual=rn)
            if rn > prev_norm:
                increases += 1
                if increases >= 2:
                    return RefineResult(x=best_x, steps=step, stalled=True,
                                        residual=best_norm)
            else:
                increases = 0
            prev_norm = rn
        return RefineResult(x=best_x, steps=st.t_max, stalled=False, residual=best_norm)


def assemble(P: CsrMatrix, A: CsrMatrix, cones: ConeSet,
             precision: str = FULL, delta_s: float | None = None,
             delta_d: float | None = None) -> KKTSystem:
    """Build the KKT system with slots for all possible scaling entries."""
    return KKTSystem(P, A, cones, precision=precision, delta_s=delta_s, delta_d=delta_d)
