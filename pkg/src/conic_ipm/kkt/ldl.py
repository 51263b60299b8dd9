"""Up-looking sparse LDL' kernels (jit-compiled, dtype-generic).

The factorization consumes the upper triangle of a symmetric matrix in
compressed-sparse-column form (column j holds rows <= j) and produces unit
lower-triangular L stored by columns plus the diagonal D.  There is no
pivoting: quasi-definiteness plus signed regularization guarantees a
factorization in any symmetric order.

Dynamic regularization: a pivot whose magnitude falls below
delta_s + delta_d * max_i |D_ii| (running maximum over pivots computed so
far) is replaced by that bound, signed by its block (+ for x rows, - for z
rows).  The kernels are sequential, so factors are bitwise deterministic.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def ldl_symbolic(n, cp, ci, parent, lnz, flag):  # pragma: no cover - jit
    """Elimination tree and per-column counts of L (Davis's up-looking scheme)."""
    for j in range(n):
        parent[j] = -1
        flag[j] = j
        lnz[j] = 0
        for p in range(cp[j], cp[j + 1]):
            i = ci[p]
            while flag[i] != j:
                if parent[i] == -1:
                    parent[i] = j
                lnz[i] += 1
                flag[i] = j
                i = parent[i]


@njit(cache=True)
def ldl_numeric(n, cp, ci, cx, lp, parent, lnz_count, li, lx, d, y, pattern,
                flag, signs, delta_s, delta_d):  # pragma: no cover - jit
    """Numeric factorization with the signed dynamic-regularization rule.

    Returns the number of dynamically regularized pivots, or -1 if a pivot
    is exactly zero even after regularization.
    """
    n_bumped = 0
    run_max = 0.0
    for j in range(n):
        y[j] = 0.0
        top = n
        flag[j] = j
        lnz_count[j] = 0
        for p in range(cp[j], cp[j + 1]):
            i = ci[p]
            y[i] += cx[p]
            length = 0
            while flag[i] != j:
                pattern[length] = i
                length += 1
                flag[i] = j
                i = parent[i]
            while length > 0:
                length -= 1
                top -= 1
                pattern[top] = pattern[length]
        dj = y[j]
        y[j] = 0.0
        for t in range(top, n):
            i = pattern[t]
            yi = y[i]
            y[i] = 0.0
            p2 = lp[i] + lnz_count[i]
            for p in range(lp[i], p2):
                y[li[p]] -= lx[p] * yi
            l_ji = yi / d[i]
            dj -= l_ji * yi
            li[p2] = j
            lx[p2] = l_ji
            lnz_count[i] += 1
        bound = delta_s + delta_d * run_max
        if abs(dj) < bound:
            dj = bound if signs[j] > 0 else -bound
            n_bumped += 1
        if dj == 0.0:
            return -1
        d[j] = dj
        if abs(dj) > run_max:
            run_max = abs(dj)
    return n_bumped


@njit(cache=True)
def ldl_solve(n, lp, li, lx, d, x):  # pragma: no cover - jit
    """In-place solve of L D L' x = b given the factors."""
    for j in range(n):
        xj = x[j]
        for p in range(lp[j], lp[j + 1]):
            x[li[p]] -= lx[p] * xj
    for j in range(n):
        x[j] /= d[j]
    for j in range(n - 1, -1, -1):
        xj = x[j]
        for p in range(lp[j], lp[j + 1]):
            xj -= lx[p] * x[li[p]]
        x[j] = xj


@njit(cache=True)
def symm_matvec_upper(n, rowptr, colidx, vals, x, out):  # pragma: no cover - jit
    """out = K x for K symmetric with only the upper triangle stored."""
    for i in range(n):
        out[i] = 0.0
    for i in range(n):
        xi = x[i]
        acc = 0.0
        for p in range(rowptr[i], rowptr[i + 1]):
            j = colidx[p]
            v = vals[p]
            acc += v * x[j]
            if j != i:
                out[j] += v * xi
        out[i] += acc
