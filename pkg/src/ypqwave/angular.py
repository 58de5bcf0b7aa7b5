"""Closed-form eigenbasis of the weighted angular operator

    T v = v'' + cot(theta) v' - ((n + 2m cos(theta))/sin(theta))^2 v

on L^2((0, pi), sin(theta) dtheta).  With a = |n+2m| and b = |n-2m| the
normalized eigenfunctions are

    v_{nmj}(theta) = C_{nmj} sin^a(theta/2) cos^b(theta/2)
                     P_j^(a,b)(cos theta),

with eigenvalue T v = -Lambda v,

    Lambda_{nmj} = d(d+1) - 4m^2,    d = j + (a+b)/2 = j + max(|n|, |2m|).

These are the spin-weighted harmonics (Wigner little-d functions) with
spin 2m and azimuthal index n, which pins the eigenvalue: substituting
the closed form into T and differentiating analytically reproduces
-Lambda v to machine precision for every index, and the full-Laplacian
point residual downstream depends on this identity.  (A frequently quoted
variant, 2(2j(j+1) + (a+b)(2j+1) + ab + 2m^2 + n^2) = 4d(d+1) - 4m^2
+ 8m^2, does not annihilate the residual for m != 0 and is not used.)

Norms are evaluated with Gauss-Jacobi rules after z = sin^2(theta/2),
which turns the integrand into polynomial times the exact Jacobi weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import (gauss_jacobi, jacobi_poly, jacobi_poly_deriv,
                      jacobi_norm_integral)

__all__ = ["AngularMode", "angular_eigenvalue", "angular_mode", "angular_gram"]


def angular_eigenvalue(n: int, m: int, j: int) -> float:
    """Lambda_{nmj} = d(d+1) - 4m^2 with d = j + (|n+2m| + |n-2m|)/2.

    Integer arithmetic throughout, cast at the end.  Nonnegative, zero
    exactly at (n, m, j) = (0, 0, 0), and strictly increasing in j.
    """
    a = abs(n + 2 * m)
    b = abs(n - 2 * m)
    d = j + (a + b) // 2
    return float(d * (d + 1) - 4 * m * m)


def _norm_const(a: int, b: int, j: int) -> float:
    lg = (math.lgamma(j + 1) + math.lgamma(j + a + b + 1)
          - math.lgamma(j + a + 1) - math.lgamma(j + b + 1))
    return math.sqrt(0.5 * (2 * j + a + b + 1) * math.exp(lg))


@dataclass(frozen=True)
class AngularMode:
    """One normalized angular eigenfunction."""

    n: int
    m: int
    j: int
    lambda_cap: float
    norm_const: float

    @property
    def a_exp(self) -> int:
        return abs(self.n + 2 * self.m)

    @property
    def b_exp(self) -> int:
        return abs(self.n - 2 * self.m)

    def value(self, theta):
        th = np.asarray(theta, dtype=float)
        s = np.sin(0.5 * th)
        c = np.cos(0.5 * th)
        out = (self.norm_const * s ** self.a_exp * c ** self.b_exp
               * jacobi_poly(self.a_exp, self.b_exp, self.j, np.cos(th)))
        return out if out.ndim else float(out)

    def __call__(self, theta):
        return self.value(theta)

    def value_and_derivs(self, theta):
        """(v, v', v'') at interior points, by analytic differentiation of
        the closed form; no finite differences."""
        th = np.asarray(theta, dtype=float)
        a, b, j = self.a_exp, self.b_exp, self.j
        s = np.sin(0.5 * th)
        c = np.cos(0.5 * th)
        x = np.cos(th)
        envelope = self.norm_const * s ** a * c ** b
        g = 0.5 * (a * c / s - b * s / c)
        gp = -a / (4.0 * s * s) - b / (4.0 * c * c)
        pj = jacobi_poly(a, b, j, x)
        pd = jacobi_poly_deriv(a, b, j, x, 1)
        pdd = jacobi_poly_deriv(a, b, j, x, 2)
        sin_th = np.sin(th)
        q = -sin_th * pd
        qp = -np.cos(th) * pd + sin_th * sin_th * pdd
        v = envelope * pj
        vp = envelope * (g * pj + q)
        vpp = envelope * ((g * g + gp) * pj + 2.0 * g * q + qp)
        return v, vp, vpp

    def operator_residual(self, theta):
        """T v + Lambda v at interior points (zero for an eigenfunction)."""
        th = np.asarray(theta, dtype=float)
        v, vp, vpp = self.value_and_derivs(th)
        pot = ((self.n + 2.0 * self.m * np.cos(th)) / np.sin(th)) ** 2
        return vpp + vp / np.tan(th) - pot * v + self.lambda_cap * v


def angular_mode(n: int, m: int, j: int) -> AngularMode:
    a = abs(n + 2 * m)
    b = abs(n - 2 * m)
    return AngularMode(n=n, m=m, j=j,
                       lambda_cap=angular_eigenvalue(n, m, j),
                       norm_const=_norm_const(a, b, j))


def angular_gram(n: int, m: int, j_max: int, n_nodes: int | None = None) -> np.ndarray:
    """Gram matrix of {v_{nmj}}_{j<=j_max} under sin(theta) dtheta.

    Substituting z = sin^2(theta/2) gives polynomial integrands against the
    exact Jacobi weight, so the rule below is exact.
    """
    if j_max > 100:
        raise ValueError("j_max above 100 not supported")
    a = abs(n + 2 * m)
    b = abs(n - 2 * m)
    rule = gauss_jacobi(a, b, n_nodes or j_max + 4)
    consts = np.array([_norm_const(a, b, j) for j in range(j_max + 1)])
    basis = np.vstack([jacobi_poly(a, b, j, rule.nodes) for j in range(j_max + 1)])
    # int_0^pi v_j v_k sin dtheta = 2 C_j C_k 2^{-a-b-1} int (1-x)^a (1+x)^b P_j P_k dx
    scaled = basis * rule.weights
    gram = (scaled @ basis.T) * 2.0 ** (-a - b)
    return consts[:, None] * gram * consts[None, :]


def legendre_norm_consistency(j: int) -> float:
    """|quadrature norm - 1| for the n=m=0 mode, a Legendre cross-check."""
    mode = angular_mode(0, 0, j)
    analytic = 2.0 * mode.norm_const ** 2 * jacobi_norm_integral(0, 0, j)
    return abs(analytic - 1.0)
