"""Compressed sparse row matrices in canonical form.

All problem matrices are carried as :class:`CsrMatrix`: sorted, duplicate-free
CSR with explicit dimension checks.  Conversion to ``scipy.sparse`` is used for
bulk arithmetic; the canonical arrays are what gets serialized and scattered
into the KKT system.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError


@dataclass
class CsrMatrix:
    """CSR matrix with sorted, unique column indices per row."""

    nrows: int
    ncols: int
    rowptr: np.ndarray
    colidx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.rowptr = np.ascontiguousarray(self.rowptr, dtype=np.int64)
        self.colidx = np.ascontiguousarray(self.colidx, dtype=np.int64)
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)

    @property
    def nnz(self) -> int:
        return int(self.rowptr[-1])

    def check(self, name: str = "matrix") -> None:
        """Raise ValidationError unless the CSR invariants hold."""
        if self.rowptr.shape != (self.nrows + 1,):
            raise ValidationError(f"{name}: rowptr must have length nrows+1")
        if self.rowptr[0] != 0 or self.rowptr[-1] != len(self.colidx):
            raise ValidationError(f"{name}: rowptr[0]=0 and rowptr[-1]=nnz required")
        if np.any(np.diff(self.rowptr) < 0):
            raise ValidationError(f"{name}: rowptr must be nondecreasing")
        if len(self.colidx) != len(self.values):
            raise ValidationError(f"{name}: colidx and values length mismatch")
        if self.nnz and (self.colidx.min() < 0 or self.colidx.max() >= self.ncols):
            raise ValidationError(f"{name}: column index out of range")
        for i in range(self.nrows):
            cols = self.colidx[self.rowptr[i]:self.rowptr[i + 1]]
            if cols.size > 1 and np.any(np.diff(cols) <= 0):
                raise ValidationError(
                    f"{name}: row {i} columns must be strictly increasing (no duplicates)"
                )

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values.copy(), self.colidx.copy(), self.rowptr.copy()),
            shape=(self.nrows, self.ncols),
        )

    def toarray(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def copy(self) -> "CsrMatrix":
        return CsrMatrix(self.nrows, self.ncols, self.rowptr.copy(),
                         self.colidx.copy(), self.values.copy())

    def with_values(self, values: np.ndarray) -> "CsrMatrix":
        """Same pattern, new values."""
        if len(values) != self.nnz:
            raise ValidationError("value array length does not match pattern")
        return CsrMatrix(self.nrows, self.ncols, self.rowptr.copy(),
                         self.colidx.copy(), np.asarray(values, dtype=np.float64).copy())

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.to_scipy() @ x

    @staticmethod
    def from_scipy(a) -> "CsrMatrix":
        a = sp.csr_matrix(a)
        a.sort_indices()
        a.sum_duplicates()
        return CsrMatrix(a.shape[0], a.shape[1], a.indptr.astype(np.int64),
                         a.indices.astype(np.int64), a.data.astype(np.float64))

    @staticmethod
    def from_dense(a) -> "CsrMatrix":
        return CsrMatrix.from_scipy(sp.csr_matrix(np.asarray(a, dtype=np.float64)))

    @staticmethod
    def zeros(nrows: int, ncols: int) -> "CsrMatrix":
        return CsrMatrix(nrows, ncols, np.zeros(nrows + 1, dtype=np.int64),
                         np.zeros(0, dtype=np.int64), np.zeros(0))
