"""Barrier calculus for the atomic cones.

All interior-point barriers here are the dual-side functions f defined on
int K*: the nonnegative, second-order and PSD cones are self-dual, the
exponential and power cones use their dual-cone barriers

    exp:  f(z) = -log(z2 - z1 - z1 log(z3/-z1)) - log(-z1) - log(z3)
    pow:  f(z) = -log((z1/a)^(2a) (z2/(1-a))^(2(1-a)) - z3^2)
                 - (1-a) log(z1) - a log(z2)

with degree 3 each.  For the nonsymmetric cones this module also provides
third-order directional derivatives (for the higher-order correction term)
and conjugate gradients obtained by inverting grad f(w) = -s through the
analytic reduction of each system to one monotone scalar equation.
"""
from __future__ import annotations

import numpy as np

from ..errors import DomainError, ScalingFailure

CONJUGATE_TOL = 1e-10
CONJUGATE_MAX_ITERS = 100


# ---------------------------------------------------------------------------
# nonnegative orthant
# ---------------------------------------------------------------------------

def nonneg_value(z: np.ndarray) -> float:
    return -float(np.sum(np.log(z)))


def nonneg_grad(z: np.ndarray) -> np.ndarray:
    return -1.0 / z


def nonneg_hess(z: np.ndarray) -> np.ndarray:
    return np.diag(1.0 / (z * z))


# ---------------------------------------------------------------------------
# second-order cone, f(z) = -1/2 log(z0^2 - |z1:|^2)
# ---------------------------------------------------------------------------

def soc_residual(z: np.ndarray) -> float:
    return float(z[0] * z[0] - np.dot(z[1:], z[1:]))


def _jmul(z: np.ndarray) -> np.ndarray:
    out = -z.copy()
    out[0] = z[0]
    return out


def soc_value(z: np.ndarray) -> float:
    return -0.5 * np.log(soc_residual(z))


def soc_grad(z: np.ndarray) -> np.ndarray:
    return -_jmul(z) / soc_residual(z)


def soc_hess(z: np.ndarray) -> np.ndarray:
    res = soc_residual(z)
    jz = _jmul(z)
    h = 2.0 * np.outer(jz, jz) / (res * res)
    h[np.diag_indices_from(h)] += 1.0 / res
    h[0, 0] -= 2.0 / res
    return h


def soc_conjugate_grad(s: np.ndarray) -> np.ndarray:
    """grad f*(s) = -J s / (s0^2 - |s1:|^2)."""
    return -_jmul(s) / soc_residual(s)


# ---------------------------------------------------------------------------
# dual exponential cone
# ---------------------------------------------------------------------------

def exp_dual_interior(z) -> bool:
    z1, z2, z3 = z
    if z1 >= 0.0 or z3 <= 0.0:
        return False
    return z2 - z1 - z1 * np.log(z3 / -z1) > 0.0


def _exp_parts(z):
    z1, z2, z3 = float(z[0]), float(z[1]), float(z[2])
    if z1 >= 0.0 or z3 <= 0.0:
        raise DomainError("point outside the dual exponential cone interior")
    l = np.log(z3 / -z1)
    psi = z2 - z1 - z1 * l
    if psi <= 0.0:
        raise DomainError("point outside the dual exponential cone interior")
    return z1, z2, z3, l, psi


def exp_dual_value(z: np.ndarray) -> float:
    z1, _, z3, _, psi = _exp_parts(z)
    return -np.log(psi) - np.log(-z1) - np.log(z3)


def exp_dual_grad(z: np.ndarray) -> np.ndarray:
    z1, _, z3, l, psi = _exp_parts(z)
    r = 1.0 / psi
    return np.array([r * l - 1.0 / z1, -r, r * z1 / z3 - 1.0 / z3])


def exp_dual_hess(z: np.ndarray) -> np.ndarray:
    z1, _, z3, l, psi = _exp_parts(z)
    r = 1.0 / psi
    gpsi = np.array([-l, 1.0, -z1 / z3])
    hpsi = np.array([[1.0 / z1, 0.0, -1.0 / z3],
                     [0.0, 0.0, 0.0],
                     [-1.0 / z3, 0.0, z1 / (z3 * z3)]])
    h = r * r * np.outer(gpsi, gpsi) - r * hpsi
    h[0, 0] += 1.0 / (z1 * z1)
    h[2, 2] += 1.0 / (z3 * z3)
    return h


def exp_dual_third(z: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Directional derivative of the Hessian: d/dt hess(z + t u) at t=0."""
    z1, _, z3, l, psi = _exp_parts(z)
    u1, _, u3 = float(u[0]), float(u[1]), float(u[2])
    r = 1.0 / psi
    gpsi = np.array([-l, 1.0, -z1 / z3])
    hpsi = np.array([[1.0 / z1, 0.0, -1.0 / z3],
                     [0.0, 0.0, 0.0],
                     [-1.0 / z3, 0.0, z1 / (z3 * z3)]])
    tpsi_u = np.array([[-u1 / (z1 * z1), 0.0, u3 / (z3 * z3)],
                       [0.0, 0.0, 0.0],
                       [u3 / (z3 * z3), 0.0,
                        u1 / (z3 * z3) - 2.0 * z1 * u3 / (z3 ** 3)]])
    gu = float(gpsi @ u)
    hu = hpsi @ u
    t = -2.0 * r ** 3 * gu * np.outer(gpsi, gpsi)
    t += r * r * (np.outer(hu, gpsi) + np.outer(gpsi, hu) + gu * hpsi)
    t -= r * tpsi_u
    t[0, 0] += -2.0 * u1 / z1 ** 3
    t[2, 2] += -2.0 * u3 / z3 ** 3
    return t


def exp_primal_interior(s) -> bool:
    x, y, z = s
    if y <= 0.0 or z <= 0.0:
        return False
    return y * np.log(z / y) - x > 0.0


def exp_primal_grad(s: np.ndarray) -> np.ndarray:
    """Gradient of the primal exp-cone barrier (Newton warm start only)."""
    x, y, z = float(s[0]), float(s[1]), float(s[2])
    if y <= 0.0 or z <= 0.0:
        raise DomainError("point outside the exponential cone interior")
    l = np.log(z / y)
    w = y * l - x
    if w <= 0.0:
        raise DomainError("point outside the exponential cone interior")
    return np.array([1.0 / w, -(l - 1.0) / w - 1.0 / y, -y / (z * w) - 1.0 / z])


# ---------------------------------------------------------------------------
# dual power cone with exponent a in (0,1)
# ---------------------------------------------------------------------------

def pow_dual_interior(z, alpha: float) -> bool:
    z1, z2, z3 = z
    if z1 <= 0.0 or z2 <= 0.0:
        return False
    lw = 2.0 * alpha * np.log(z1 / alpha) + 2.0 * (1 - alpha) * np.log(z2 / (1 - alpha))
    return np.exp(lw) - z3 * z3 > 0.0


def _pow_parts(z, alpha):
    z1, z2, z3 = float(z[0]), float(z[1]), float(z[2])
    if z1 <= 0.0 or z2 <= 0.0:
        raise DomainError("point outside the dual power cone interior")
    beta = 1.0 - alpha
    omega = np.exp(2.0 * alpha * np.log(z1 / alpha) + 2.0 * beta * np.log(z2 / beta))
    phi = omega - z3 * z3
    if phi <= 0.0:
        raise DomainError("point outside the dual power cone interior")
    return z1, z2, z3, beta, omega, phi


def pow_dual_value(z: np.ndarray, alpha: float) -> float:
    z1, z2, _, beta, _, phi = _pow_parts(z, alpha)
    return -np.log(phi) - beta * np.log(z1) - alpha * np.log(z2)


def pow_dual_grad(z: np.ndarray, alpha: float) -> np.ndarray:
    z1, z2, z3, beta, omega, phi = _pow_parts(z, alpha)
    r = 1.0 / phi
    gphi = np.array([2.0 * alpha * omega / z1, 2.0 * beta * omega / z2, -2.0 * z3])
    return -r * gphi + np.array([-beta / z1, -alpha / z2, 0.0])


def _pow_hphi(z1, z2, alpha, beta, omega):
    return np.array([
        [2.0 * alpha * (2 * alpha - 1) * omega / (z1 * z1),
         4.0 * alpha * beta * omega / (z1 * z2), 0.0],
        [4.0 * alpha * beta * omega / (z1 * z2),
         2.0 * beta * (2 * beta - 1) * omega / (z2 * z2), 0.0],
        [0.0, 0.0, -2.0],
    ])


def pow_dual_hess(z: np.ndarray, alpha: float) -> np.ndarray:
    z1, z2, z3, beta, omega, phi = _pow_parts(z, alpha)
    r = 1.0 / phi
    gphi = np.array([2.0 * alpha * omega / z1, 2.0 * beta * omega / z2, -2.0 * z3])
    h = r * r * np.outer(gphi, gphi) - r * _pow_hphi(z1, z2, alpha, beta, omega)
    h[0, 0] += beta / (z1 * z1)
    h[1, 1] += alpha / (z2 * z2)
    return h


def pow_dual_third(z: np.ndarray, u: np.ndarray, alpha: float) -> np.ndarray:
    z1, z2, z3, beta, omega, phi = _pow_parts(z, alpha)
    u1, u2, _ = float(u[0]), float(u[1]), float(u[2])
    r = 1.0 / phi
    gphi = np.array([2.0 * alpha * omega / z1, 2.0 * beta * omega / z2, -2.0 * z3])
    hphi = _pow_hphi(z1, z2, alpha, beta, omega)
    # third partials of phi (all z3 mixed terms vanish)
    p111 = 2 * alpha * (2 * alpha - 1) * (2 * alpha - 2) * omega / z1 ** 3
    p112 = 4 * alpha * (2 * alpha - 1) * beta * omega / (z1 * z1 * z2)
    p122 = 4 * alpha * beta * (2 * beta - 1) * omega / (z1 * z2 * z2)
    p222 = 2 * beta * (2 * beta - 1) * (2 * beta - 2) * omega / z2 ** 3
    tphi_u = np.array([
        [p111 * u1 + p112 * u2, p112 * u1 + p122 * u2, 0.0],
        [p112 * u1 + p122 * u2, p122 * u1 + p222 * u2, 0.0],
        [0.0, 0.0, 0.0],
    ])
    gu = float(gphi @ u)
    hu = hphi @ u
    t = -2.0 * r ** 3 * gu * np.outer(gphi, gphi)
    t += r * r * (np.outer(hu, gphi) + np.outer(gphi, hu) + gu * hphi)
    t -= r * tphi_u
    t[0, 0] += -2.0 * beta * u1 / z1 ** 3
    t[1, 1] += -2.0 * alpha * u2 / z2 ** 3
    return t


def pow_primal_interior(s, alpha: float) -> bool:
    x, y, z = s
    if x <= 0.0 or y <= 0.0:
        return False
    return np.exp(2 * alpha * np.log(x) + 2 * (1 - alpha) * np.log(y)) - z * z > 0.0


def pow_primal_grad(s: np.ndarray, alpha: float) -> np.ndarray:
    """Gradient of the primal power-cone barrier (Newton warm start only)."""
    x, y, z = float(s[0]), float(s[1]), float(s[2])
    beta = 1.0 - alpha
    if x <= 0.0 or y <= 0.0:
        raise DomainError("point outside the power cone interior")
    e = np.exp(2 * alpha * np.log(x) + 2 * beta * np.log(y))
    w = e - z * z
    if w <= 0.0:
        raise DomainError("point outside the power cone interior")
    gw = np.array([2 * alpha * e / x, 2 * beta * e / y, -2 * z])
    return -gw / w + np.array([-beta / x, -alpha / y, 0.0])


# ---------------------------------------------------------------------------
# conjugate gradients: inversion of the equation grad f(w) = -s
# ---------------------------------------------------------------------------
#
# The 3-d gradient systems collapse analytically to one strictly monotone
# scalar equation apiece, which stays well conditioned arbitrarily close to
# the cone boundary (where the conjugate point has entries ~1/distance and
# a direct 3-d Newton runs into numerically singular Hessians).  The scalar
# root is bracketed by geometric expansion and polished to machine
# precision; the recovered w is interior by construction.

def _bracket_root(f, t0: float):
    """Bracket the sign change of a decreasing f on (0, inf) starting at t0."""
    lo = hi = t0
    for _ in range(CONJUGATE_MAX_ITERS):
        if f(lo) > 0.0:
            break
        lo /= 10.0
        if lo < 1e-300:
            raise ScalingFailure("conjugate-gradient bracketing failed (low end)")
    for _ in range(CONJUGATE_MAX_ITERS):
        if f(hi) < 0.0:
            break
        hi *= 10.0
        if hi > 1e300:
            raise ScalingFailure("conjugate-gradient bracketing failed (high end)")
    return lo, hi


def _solve_decreasing(f, t0: float) -> float:
    from scipy.optimize import brentq
    lo, hi = _bracket_root(f, t0)
    return float(brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                        maxiter=CONJUGATE_MAX_ITERS))


def exp_conjugate_dual_point(s: np.ndarray) -> np.ndarray:
    """Return w = -grad f*(s) for the exponential cone, s strictly interior.

    With t = -w1, the gradient system grad f(w) = -s reduces to the strictly
    decreasing scalar equation

        s2 log((1 + s2 t)/(s3 t)) + 1/t + s1 = 0,

    whose ends have opposite signs exactly when s is strictly interior; the
    remaining coordinates follow in closed form and are interior for any
    positive root.
    """
    if not exp_primal_interior(s):
        raise DomainError("point outside the exponential cone interior")
    s1, s2, s3 = float(s[0]), float(s[1]), float(s[2])

    def f(t):
        return s2 * (np.log1p(s2 * t) - np.log(s3 * t)) + 1.0 / t + s1

    t = _solve_decreasing(f, 1.0 / (1.0 + abs(s1) + s2 + s3))
    w1 = -t
    w3 = (1.0 + s2 * t) / s3
    w2 = 1.0 / s2 + w1 + w1 * np.log(w3 / t)
    return np.array([w1, w2, w3])


def pow_conjugate_dual_point(s: np.ndarray, alpha: float) -> np.ndarray:
    """Return w = -grad f*(s) for the power cone, s strictly interior.

    With u = omega/(omega - w3^2) > 1 (u = 1 when s3 = 0, which yields the
    closed form w = ((1+a)/s1, (2-a)/s2, 0)), the gradient system reduces to

        2a log(2au+b) + 2b log(2bu+a) - log(4u(u-1)) + 2 log|s3|
            - 2a log(a s1) - 2b log(b s2) = 0,   b = 1 - a,

    which is positive near u = 1 and negative at infinity exactly when s is
    strictly interior; any root reconstructs an interior conjugate point.
    """
    if not pow_primal_interior(s, alpha):
        raise DomainError("point outside the power cone interior")
    s1, s2, s3 = float(s[0]), float(s[1]), float(s[2])
    beta = 1.0 - alpha
    if s3 == 0.0:
        return np.array([(1.0 + alpha) / s1, (2.0 - alpha) / s2, 0.0])
    const = (2.0 * np.log(abs(s3)) - 2.0 * alpha * np.log(alpha * s1)
             - 2.0 * beta * np.log(beta * s2) - np.log(4.0))

    def g(v):  # v = u - 1 > 0
        u = 1.0 + v
        return (2.0 * alpha * np.log(2.0 * alpha * u + beta)
                + 2.0 * beta * np.log(2.0 * beta * u + alpha)
                - np.log(u) - np.log(v) + const)

    v = _solve_decreasing(g, 1.0)
    u = 1.0 + v
    w1 = (2.0 * alpha * u + beta) / s1
    w2 = (2.0 * beta * u + alpha) / s2
    w3 = -2.0 * v / s3
    return np.array([w1, w2, w3])
