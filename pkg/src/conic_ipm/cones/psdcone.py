"""Dense PSD-cone kernels over isometric triangular storage.

A side-n symmetric matrix is stored as the length n(n+1)/2 vector of its
lower triangle in column-major order with off-diagonal entries scaled by
sqrt(2), so matrix Frobenius inner products equal vector dot products and
every scaling operator stays symmetric in vector coordinates.
"""
from __future__ import annotations

import numpy as np

from ..errors import DomainError, ScalingFailure

_SQRT2 = np.sqrt(2.0)


def triangle_dim(side: int) -> int:
    return side * (side + 1) // 2


def svec(x: np.ndarray) -> np.ndarray:
    """Vectorize a symmetric matrix (lower triangle, column-major, sqrt2 off-diag)."""
    n = x.shape[0]
    out = np.empty(triangle_dim(n))
    k = 0
    for j in range(n):
        out[k] = x[j, j]
        k += 1
        for i in range(j + 1, n):
            out[k] = _SQRT2 * x[i, j]
            k += 1
    return out


def smat(v: np.ndarray, side: int) -> np.ndarray:
    """Inverse of :func:`svec`."""
    x = np.zeros((side, side))
    k = 0
    for j in range(side):
        x[j, j] = v[k]
        k += 1
        for i in range(j + 1, side):
            x[i, j] = v[k] / _SQRT2
            x[j, i] = x[i, j]
            k += 1
    return x


def congruence_matrix(r: np.ndarray) -> np.ndarray:
    """Matrix of X -> R' X R in svec coordinates (R square, any)."""
    n = r.shape[0]
    d = triangle_dim(n)
    out = np.empty((d, d))
    e = np.zeros(d)
    for k in range(d):
        e[k] = 1.0
        out[:, k] = svec(r.T @ smat(e, n) @ r)
        e[k] = 0.0
    return out


def psd_value(v: np.ndarray, side: int) -> float:
    x = smat(v, side)
    try:
        l = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        raise DomainError("point outside the PSD cone interior") from None
    return -2.0 * float(np.sum(np.log(np.diag(l))))


def psd_grad(v: np.ndarray, side: int) -> np.ndarray:
    x = smat(v, side)
    try:
        xinv = np.linalg.inv(np.linalg.cholesky(x))
    except np.linalg.LinAlgError:
        raise DomainError("point outside the PSD cone interior") from None
    return svec(-(xinv.T @ xinv))


def psd_hess(v: np.ndarray, side: int) -> np.ndarray:
    """Dense Hessian of -logdet in svec coordinates: u -> svec(X^-1 U X^-1)."""
    x = smat(v, side)
    xinv = np.linalg.inv(x)
    d = triangle_dim(side)
    out = np.empty((d, d))
    e = np.zeros(d)
    for k in range(d):
        e[k] = 1.0
        out[:, k] = svec(xinv @ smat(e, side) @ xinv)
        e[k] = 0.0
    return out


def psd_min_eig(v: np.ndarray, side: int) -> float:
    return float(np.linalg.eigvalsh(smat(v, side))[0])


def nt_factor(s: np.ndarray, z: np.ndarray, side: int):
    """Nesterov-Todd factor R with R'ZR = inv(R) S inv(R)' = diag(lam).

    Built from Cholesky factors of the matricized iterates and an SVD of
    their product, so W: X -> R'XR maps z to the scaled point and
    H = W'W maps z to s exactly.
    """
    sm = smat(s, side)
    zm = smat(z, side)
    try:
        ls = np.linalg.cholesky(sm)
        lz = np.linalg.cholesky(zm)
    except np.linalg.LinAlgError:
        raise ScalingFailure("PSD iterate lost positive definiteness") from None
    u, sig, vt = np.linalg.svd(lz.T @ ls)
    if np.min(sig) <= 0.0:
        raise ScalingFailure("degenerate NT scaling point for a PSD block")
    r = ls @ vt.T @ np.diag(1.0 / np.sqrt(sig))
    rinv = np.diag(np.sqrt(sig)) @ vt @ np.linalg.inv(ls)
    return r, rinv, sig


def step_to_boundary(v: np.ndarray, dv: np.ndarray, side: int) -> float:
    """sup{a >= 0 : mat(v) + a mat(dv) psd} for strictly interior v."""
    x = smat(v, side)
    d = smat(dv, side)
    try:
        l = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        raise DomainError("point outside the PSD cone interior") from None
    linv = np.linalg.inv(l)
    w = np.linalg.eigvalsh(linv @ d @ linv.T)
    lam_min = w[0]
    if lam_min >= 0.0:
        return np.inf
    return -1.0 / lam_min
