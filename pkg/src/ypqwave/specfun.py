"""Orthogonal polynomials, Legendre functions and Gauss-Jacobi quadrature.

Every normalization constant built from factorials is assembled in log
space (lgamma) and exponentiated last, so index ranges that would overflow
a double factorial-wise remain usable.

All functions are pure; quadrature rules are immutable after construction
and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DegreeOrderError, EigenFailure

__all__ = [
    "QuadratureRule",
    "jacobi_poly",
    "jacobi_poly_deriv",
    "jacobi_norm_integral",
    "gegenbauer",
    "gegenbauer_deriv",
    "assoc_legendre",
    "assoc_legendre_derivs",
    "gauss_jacobi",
    "rule_on_01",
    "rule_on_interval",
]


def jacobi_poly(alpha: float, beta: float, j: int, x):
    """P_j^(alpha,beta)(x) by the standard three-term recurrence.

    Stable on x in [-1, 1] for degrees well beyond 200.  Accepts scalar or
    ndarray argument.
    """
    x = np.asarray(x, dtype=float)
    p0 = np.ones_like(x)
    if j == 0:
        return p0 if p0.ndim else float(p0)
    p1 = 0.5 * (alpha - beta) + 0.5 * (alpha + beta + 2.0) * x
    if j == 1:
        return p1 if p1.ndim else float(p1)
    for n in range(2, j + 1):
        s = 2.0 * n + alpha + beta
        c1 = 2.0 * n * (n + alpha + beta) * (s - 2.0)
        c2 = (s - 1.0) * (alpha * alpha - beta * beta)
        c3 = (s - 2.0) * (s - 1.0) * s
        c4 = 2.0 * (n + alpha - 1.0) * (n + beta - 1.0) * s
        p0, p1 = p1, ((c2 + c3 * x) * p1 - c4 * p0) / c1
    return p1 if p1.ndim else float(p1)


def jacobi_poly_all(alpha: float, beta: float, j_max: int, x) -> np.ndarray:
    """All of P_0 .. P_{j_max}^(alpha,beta) at x, one recurrence sweep.

    Returns an array of shape (j_max+1, len(x)).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((j_max + 1, x.size))
    out[0] = 1.0
    if j_max >= 1:
        out[1] = 0.5 * (alpha - beta) + 0.5 * (alpha + beta + 2.0) * x
    for n in range(2, j_max + 1):
        s = 2.0 * n + alpha + beta
        c1 = 2.0 * n * (n + alpha + beta) * (s - 2.0)
        c2 = (s - 1.0) * (alpha * alpha - beta * beta)
        c3 = (s - 2.0) * (s - 1.0) * s
        c4 = 2.0 * (n + alpha - 1.0) * (n + beta - 1.0) * s
        out[n] = ((c2 + c3 * x) * out[n - 1] - c4 * out[n - 2]) / c1
    return out


def jacobi_deriv_all(alpha: float, beta: float, j_max: int, x,
                     order: int = 1) -> np.ndarray:
    """order-th derivatives of P_0 .. P_{j_max}^(alpha,beta) at x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((j_max + 1, x.size))
    if j_max >= order:
        shifted = jacobi_poly_all(alpha + order, beta + order, j_max - order, x)
        for j in range(order, j_max + 1):
            scale = 1.0
            for i in range(order):
                scale *= 0.5 * (j + alpha + beta + 1.0 + i)
            out[j] = scale * shifted[j - order]
    return out


def jacobi_poly_deriv(alpha: float, beta: float, j: int, x, order: int = 1):
    """order-th derivative of P_j^(alpha,beta), via the shift identity
    d/dx P_j^(a,b) = (j+a+b+1)/2 * P_{j-1}^(a+1,b+1)."""
    if order == 0:
        return jacobi_poly(alpha, beta, j, x)
    if j < order:
        x = np.asarray(x, dtype=float)
        z = np.zeros_like(x)
        return z if z.ndim else 0.0
    scale = 1.0
    for i in range(order):
        scale *= 0.5 * (j + alpha + beta + 1.0 + i)
    return scale * jacobi_poly(alpha + order, beta + order, j - order, x)


def jacobi_norm_integral(a_exp: int, b_exp: int, j: int) -> float:
    """Closed form of the weighted square norm on the unit interval:

        int_0^1 z^a (1-z)^b P_j^(a,b)(1-2z)^2 dz
            = (j+a)! (j+b)! / ((2j+a+b+1) j! (j+a+b)!)
    """
    lg = (math.lgamma(j + a_exp + 1) + math.lgamma(j + b_exp + 1)
          - math.lgamma(j + 1) - math.lgamma(j + a_exp + b_exp + 1))
    return math.exp(lg) / (2 * j + a_exp + b_exp + 1)


def gegenbauer(order: float, degree: int, x):
    """Gegenbauer polynomial C_degree^(order)(x) by recurrence."""
    x = np.asarray(x, dtype=float)
    c0 = np.ones_like(x)
    if degree == 0:
        return c0 if c0.ndim else float(c0)
    c1 = 2.0 * order * x
    if degree == 1:
        return c1 if c1.ndim else float(c1)
    for r in range(2, degree + 1):
        c0, c1 = c1, (2.0 * (r + order - 1.0) * x * c1 - (r + 2.0 * order - 2.0) * c0) / r
    return c1 if c1.ndim else float(c1)


def gegenbauer_deriv(order: float, degree: int, x, nth: int = 1):
    """nth derivative of C_degree^(order), via d/dx C_r^(l) = 2l C_{r-1}^(l+1)."""
    if nth == 0:
        return gegenbauer(order, degree, x)
    if degree < nth:
        x = np.asarray(x, dtype=float)
        z = np.zeros_like(x)
        return z if z.ndim else 0.0
    scale = 1.0
    for i in range(nth):
        scale *= 2.0 * (order + i)
    return scale * gegenbauer(order + nth, degree - nth, x)


def assoc_legendre(l: int, m: int, x):
    """Associated Legendre function P_l^m(x) with Condon-Shortley phase.

    Negative m is handled by the reflection formula
    P_l^(-m) = (-1)^m (l-m)!/(l+m)! P_l^m.
    """
    if abs(m) > l:
        raise DegreeOrderError(f"order |m|={abs(m)} exceeds degree l={l}")
    x = np.asarray(x, dtype=float)
    if m < 0:
        ma = -m
        fac = (-1.0) ** ma * math.exp(math.lgamma(l - ma + 1) - math.lgamma(l + ma + 1))
        out = fac * _assoc_legendre_pos(l, ma, x)
    else:
        out = _assoc_legendre_pos(l, m, x)
    return out if out.ndim else float(out)


def _assoc_legendre_pos(l: int, m: int, x: np.ndarray) -> np.ndarray:
    # P_m^m = (-1)^m (2m-1)!! (1-x^2)^{m/2}, then upward in degree.
    pmm = np.ones_like(x)
    if m > 0:
        somx2 = np.sqrt(np.maximum(0.0, (1.0 - x) * (1.0 + x)))
        fact = 1.0
        for _ in range(m):
            pmm = pmm * (-fact) * somx2
            fact += 2.0
    if l == m:
        return pmm
    pmmp1 = x * (2.0 * m + 1.0) * pmm
    if l == m + 1:
        return pmmp1
    for ll in range(m + 2, l + 1):
        pmm, pmmp1 = pmmp1, (x * (2.0 * ll - 1.0) * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m)
    return pmmp1


def assoc_legendre_derivs(l: int, m: int, x):
    """(P, dP/dx, d2P/dx2) for P_l^m, from recurrence identities.

    Uses (1-x^2) P' = (l+m) P_{l-1}^m - l x P, differentiated once more for
    the second derivative; both identities are independent of the Legendre
    differential equation, so they are safe inside residual oracles.
    Requires |x| < 1.
    """
    x = np.asarray(x, dtype=float)
    one = 1.0 - x * x
    p = assoc_legendre(l, m, x)
    pm1 = assoc_legendre(l - 1, m, x) if abs(m) <= l - 1 else np.zeros_like(x)
    dp = ((l + m) * pm1 - l * x * p) / one
    if abs(m) <= l - 2:
        pm2 = assoc_legendre(l - 2, m, x)
        dpm1 = ((l - 1 + m) * pm2 - (l - 1) * x * pm1) / one
    else:
        dpm1 = ((l - 1 + m) * 0.0 - (l - 1) * x * pm1) / one
    d2p = (2.0 * x * dp + (l + m) * dpm1 - l * p - l * x * dp) / one
    return p, dp, d2p


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1, 1].

    Exact for polynomial integrands of degree <= 2*len(nodes) - 1.
    """

    nodes: np.ndarray
    weights: np.ndarray
    alpha_exp: float
    beta_exp: float

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def gauss_jacobi(alpha: float, beta: float, n: int) -> QuadratureRule:
    """Golub-Welsch rule from the symmetric tridiagonal recurrence matrix.

    alpha, beta > -1, n >= 1.  Nodes ascend; weights are positive and sum
    to the zeroth moment 2^(a+b+1) B(a+1, b+1).
    """
    if n < 1:
        raise ValueError("need at least one node")
    ab = alpha + beta
    mu0 = math.exp((ab + 1.0) * math.log(2.0)
                   + math.lgamma(alpha + 1.0) + math.lgamma(beta + 1.0)
                   - math.lgamma(ab + 2.0))
    diag = np.empty(n)
    diag[0] = (beta - alpha) / (ab + 2.0)
    k = np.arange(1, n, dtype=float)
    diag[1:] = (beta * beta - alpha * alpha) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
    off = np.empty(max(n - 1, 0))
    if n > 1:
        # k = 1 written in cancelled form so alpha+beta = -1 stays finite
        off[0] = math.sqrt(4.0 * (1.0 + alpha) * (1.0 + beta)
                           / ((ab + 2.0) ** 2 * (ab + 3.0)))
        if n > 2:
            k = np.arange(2, n, dtype=float)
            num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab)
            den = (2.0 * k + ab) ** 2 * (2.0 * k + ab + 1.0) * (2.0 * k + ab - 1.0)
            off[1:] = np.sqrt(num / den)
    try:
        vals, vecs = eigh_tridiagonal(diag, off)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - signals a bug
        raise EigenFailure(str(exc)) from exc
    weights = mu0 * vecs[0, :] ** 2
    return QuadratureRule(nodes=vals, weights=weights, alpha_exp=alpha, beta_exp=beta)


def rule_on_01(a_exp: float, b_exp: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights with int_0^1 z^a (1-z)^b f(z) dz = sum w_i f(z_i).

    The weight factors z^a and (1-z)^b are absorbed into the weights.
    """
    rule = gauss_jacobi(b_exp, a_exp, n)
    z = 0.5 * (1.0 + rule.nodes)
    w = rule.weights * 0.5 ** (a_exp + b_exp + 1.0)
    return z, w


def rule_on_interval(lo: float, hi: float, exp_lo: float, exp_hi: float,
                     n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights with
    int_lo^hi (y-lo)^exp_lo (hi-y)^exp_hi f(y) dy = sum w_i f(y_i)."""
    rule = gauss_jacobi(exp_hi, exp_lo, n)
    half = 0.5 * (hi - lo)
    y = lo + half * (1.0 + rule.nodes)
    w = rule.weights * half ** (exp_lo + exp_hi + 1.0)
    return y, w
