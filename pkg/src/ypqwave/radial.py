"""Eigensolver for the singular radial Sturm-Liouville operator

    (S u)(y) = (1/rho) (rho w r u')' - V(y) u,
    V = (sigma l / tau)^2 / w + 9 (2m + h sigma l/tau)^2 / r
        + 6 Lambda / (1 - y),

on L^2((y_minus, y_plus), rho dy), rho = (1-y)/18.  The solver returns
the eigenvalues ell_k >= 0 of -S (ascending, simple) with normalized
eigenfunctions.

The combination rho*w*r collapses to (a - 3y^2 + 2y^3)/9, whose simple
zeros at the interval endpoints make both endpoints regular singular
points with half-integer characteristic exponents

    nu_minus = |m + q sigma l / 4|        at y_minus,
    nu_plus  = |m + (q - 2p) sigma l / 4| at y_plus.

(The q-anchored exponent belongs to the negative root; see the geometry
module docstring for the endpoint orientation, and note the potential
carries 2m + h sigma l/tau, fixing the sign convention of the alpha
frequency so the two formulas above hold verbatim.)

Discretization: Galerkin in the endpoint-weighted Jacobi basis

    phi_k(y) = (y - y_minus)^nu_minus (y_plus - y)^nu_plus
               P_k^(2 nu_plus, 2 nu_minus)(t(y)),

t affine onto [-1,1].  The weight bakes the endpoint decay into every
trial function and leaves no room for log-singular solutions, which
selects the Friedrichs extension when an exponent vanishes.  All matrix
entries are Gauss-Jacobi integrals of (smooth analytic factor) x (exact
Jacobi weight); the lone 1/r potential singularity cancels analytically
against the basis weight before any node is evaluated.

Problems and modes are immutable; independent (m, l, Lambda) solves can
run concurrently without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .errors import NotConverged, OutOfRange, QuadratureUnderflow
from .geometry import GeometryParams
from .specfun import (jacobi_deriv_all, jacobi_poly_all, rule_on_interval)

__all__ = ["RadialProblem", "RadialMode", "char_exponents", "radial_problem",
           "assemble_galerkin", "solve_radial"]

_NEG_TOL = 1e-9
_CONV_REL = 1e-8
_QUAD_PAD = 32


def char_exponents(gp: GeometryParams, m: int, l: int) -> tuple[float, float]:
    """(nu_minus, nu_plus): endpoint exponents at y_minus and y_plus.

    Both are integer multiples of 1/2 because sigma is even and divisible
    by q and 2p - q.
    """
    nu_minus = abs(m + gp.q * gp.sigma * l / 4.0)
    nu_plus = abs(m + (gp.q - 2 * gp.p) * gp.sigma * l / 4.0)
    return nu_minus, nu_plus


@dataclass(frozen=True)
class RadialProblem:
    """One (m, l, Lambda) sector of the radial operator."""

    gp: GeometryParams
    m: int
    l: int
    lambda_cap: float
    nu_minus: float
    nu_plus: float

    @property
    def alpha_freq(self) -> float:
        """sigma*l/tau, the frequency entering the potential."""
        return self.gp.sigma * self.l / self.gp.tau

    def potential_charge(self, y):
        """2m + h(y) sigma l / tau, whose endpoint values are +-2 nu."""
        a = self.gp.a
        h = (a - 2.0 * y + y * y) / (6.0 * (a - y * y))
        return 2.0 * self.m + h * self.alpha_freq


def radial_problem(gp: GeometryParams, m: int, l: int,
                   lambda_cap: float) -> RadialProblem:
    if lambda_cap < 0:
        raise ValueError("Lambda must be nonnegative")
    nu_minus, nu_plus = char_exponents(gp, m, l)
    return RadialProblem(gp=gp, m=m, l=l, lambda_cap=float(lambda_cap),
                         nu_minus=nu_minus, nu_plus=nu_plus)


def _basis_data(prob: RadialProblem, n_basis: int, n_nodes: int):
    """Quadrature nodes and assembled basis tables for one problem."""
    gp = prob.gp
    ym, yp = gp.y_minus, gp.y_plus
    y3 = gp.y_third
    a = gp.a
    nm, npl = prob.nu_minus, prob.nu_plus
    delta = yp - ym
    mu = prob.alpha_freq

    # mass-type rule: full basis weight (y-ym)^{2nm} (yp-y)^{2npl}
    y_b, w_b = rule_on_interval(ym, yp, 2.0 * nm, 2.0 * npl, n_nodes)
    if not np.all(np.isfinite(w_b)) or np.any(w_b <= 0.0):
        raise QuadratureUnderflow(
            f"degenerate weights for exponents ({2*nm}, {2*npl})")

    # derivative/centrifugal rule: exponent 2nu-1, lifted to 1 when nu = 0
    d_lo = 1 if nm == 0.0 else 0
    d_hi = 1 if npl == 0.0 else 0
    c_lo = 2.0 * nm - 1.0 + 2.0 * d_lo
    c_hi = 2.0 * npl - 1.0 + 2.0 * d_hi
    y_d, w_d = rule_on_interval(ym, yp, c_lo, c_hi, n_nodes)

    t_b = (2.0 * y_b - yp - ym) / delta
    t_d = (2.0 * y_d - yp - ym) / delta
    jmax = n_basis - 1
    p_b = jacobi_poly_all(2.0 * npl, 2.0 * nm, jmax, t_b)
    p_d = jacobi_poly_all(2.0 * npl, 2.0 * nm, jmax, t_d)
    dp_d = jacobi_deriv_all(2.0 * npl, 2.0 * nm, jmax, t_d)

    # R_k = (nm (yp-y) - npl (y-ym)) P_k + (y-ym)(yp-y) (2/delta) P_k',
    # divided by the structural factors it always contains when nu = 0
    pref = nm * (yp - y_d) - npl * (y_d - ym)
    bil = (y_d - ym) * (yp - y_d) * (2.0 / delta)
    r_mat = pref[None, :] * p_d + bil[None, :] * dp_d
    div = np.ones_like(y_d)
    if d_lo:
        div = div * (y_d - ym)
    if d_hi:
        div = div * (yp - y_d)
    r_mat = r_mat / div[None, :]

    # smooth factors
    rho_b = (1.0 - y_b) / 18.0
    a2_b = a - y_b * y_b
    f_mass = rho_b + (mu * mu) * (1.0 - y_b) ** 2 / (36.0 * a2_b) \
        + prob.lambda_cap / 3.0
    # second rule: kinetic factor (2/9)(y3-y) and centrifugal
    a2_d = a - y_d * y_d
    rho_d = (1.0 - y_d) / 18.0
    pol = 12.0 * prob.m * a2_d + mu * (a - 2.0 * y_d + y_d * y_d)
    pol = pol / div
    f_kin = (2.0 / 9.0) * (y3 - y_d)
    f_cent = rho_d * pol * pol / (8.0 * a2_d * (y3 - y_d))

    return (y_b, w_b, p_b, rho_b, f_mass, w_d, r_mat, p_d, f_kin, f_cent)


def assemble_galerkin(prob: RadialProblem, n_basis: int,
                      n_nodes: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Stiffness and mass matrices (A, B) of the weak form of -S.

    A_jk = int [rho w r phi_j' phi_k' + V phi_j phi_k rho] dy,
    B_jk = int phi_j phi_k rho dy.  Both exactly symmetric; B positive
    definite.  n_basis >= 4.
    """
    if n_basis < 4:
        raise ValueError("n_basis must be at least 4")
    nq = n_nodes or n_basis + _QUAD_PAD
    (y_b, w_b, p_b, rho_b, f_mass, w_d, r_mat, p_d, f_kin, f_cent) = \
        _basis_data(prob, n_basis, nq)
    b_mat = (p_b * (w_b * rho_b)) @ p_b.T
    a_mat = (p_b * (w_b * (f_mass - rho_b))) @ p_b.T
    a_mat += (r_mat * (w_d * f_kin)) @ r_mat.T
    a_mat += (p_d * (w_d * f_cent)) @ p_d.T
    return a_mat, b_mat


@dataclass(frozen=True)
class RadialMode:
    """One normalized eigenfunction of -S with eigenvalue ell."""

    problem: RadialProblem
    k: int
    ell: float
    coeffs: np.ndarray
    grid_norm_residual: float

    def _weight_and_powers(self, y: np.ndarray, order: int):
        gp = self.problem.gp
        nm, npl = self.problem.nu_minus, self.problem.nu_plus
        dl = y - gp.y_minus
        dr = gp.y_plus - y
        wgt = dl ** nm * dr ** npl
        if order == 0:
            return wgt, None, None
        lw1 = nm / dl - npl / dr
        lw2 = (nm * (nm - 1.0) / dl ** 2 - 2.0 * nm * npl / (dl * dr)
               + npl * (npl - 1.0) / dr ** 2)
        return wgt, wgt * lw1, wgt * lw2

    def value(self, y):
        yv = np.atleast_1d(np.asarray(y, dtype=float))
        self._check_range(yv)
        out = self._eval(yv, 0)[0]
        return out if np.ndim(y) else float(out[0])

    def value_and_derivs(self, y):
        yv = np.atleast_1d(np.asarray(y, dtype=float))
        self._check_range(yv)
        return self._eval(yv, 2)

    def _check_range(self, yv: np.ndarray) -> None:
        gp = self.problem.gp
        if np.any(yv <= gp.y_minus) or np.any(yv >= gp.y_plus):
            raise OutOfRange("y outside the open radial interval")

    def _eval(self, yv: np.ndarray, order: int):
        gp = self.problem.gp
        nm, npl = self.problem.nu_minus, self.problem.nu_plus
        delta = gp.y_plus - gp.y_minus
        t = (2.0 * yv - gp.y_plus - gp.y_minus) / delta
        jmax = len(self.coeffs) - 1
        pv = self.coeffs @ jacobi_poly_all(2.0 * npl, 2.0 * nm, jmax, t)
        wgt, dwgt, d2wgt = self._weight_and_powers(yv, order)
        g = wgt * pv
        if order == 0:
            return (g,)
        dp = self.coeffs @ jacobi_deriv_all(2.0 * npl, 2.0 * nm, jmax, t)
        d2p = self.coeffs @ jacobi_deriv_all(2.0 * npl, 2.0 * nm, jmax, t, 2)
        sc = 2.0 / delta
        g1 = dwgt * pv + wgt * dp * sc
        g2 = d2wgt * pv + 2.0 * dwgt * dp * sc + wgt * d2p * sc * sc
        return g, g1, g2

    def operator_residual(self, y):
        """(-S - ell) applied to the eigenfunction at interior points,
        relative to ell*|g| + 1; analytic derivatives throughout."""
        yv = np.atleast_1d(np.asarray(y, dtype=float))
        g, g1, g2 = self.value_and_derivs(yv)
        prob = self.problem
        gp = prob.gp
        a = gp.a
        c3 = a - 3.0 * yv ** 2 + 2.0 * yv ** 3
        c = c3 / 9.0
        cp = (6.0 * yv * yv - 6.0 * yv) / 9.0
        rho = (1.0 - yv) / 18.0
        w = 2.0 * (a - yv * yv) / (1.0 - yv)
        r = c3 / (a - yv * yv)
        mu = prob.alpha_freq
        charge = prob.potential_charge(yv)
        pot = mu * mu / w + 9.0 * charge * charge / r \
            + 6.0 * prob.lambda_cap / (1.0 - yv)
        left = -((c * g2 + cp * g1) / rho) + pot * g
        return (left - self.ell * g) / (abs(self.ell) * np.abs(g) + 1.0)


def solve_radial(prob: RadialProblem, k_max: int, n_basis: int) -> list[RadialMode]:
    """First k_max+1 eigenpairs of A c = ell B c, ascending.

    n_basis >= k_max + 8.  An internal re-solve with 25% more basis
    functions must move the two largest requested eigenvalues by less
    than 1e-8 (relative, floored at 1); otherwise NotConverged.  Small
    negative eigenvalues within 1e-9 are clamped to zero.
    """
    if n_basis < k_max + 8:
        raise ValueError("n_basis must be at least k_max + 8")
    ell_a, _, _ = _solve_once(prob, k_max, n_basis)
    n_big = int(np.ceil(1.25 * n_basis))
    ell_b, vecs, resid = _solve_once(prob, k_max, n_big)
    for k in (max(k_max - 1, 0), k_max):
        drift = abs(ell_a[k] - ell_b[k]) / max(1.0, abs(ell_b[k]))
        if drift > _CONV_REL:
            raise NotConverged(
                f"eigenvalue {k} moved by {drift:.2e} under basis refinement")
    modes = []
    for k in range(k_max + 1):
        ell = ell_b[k]
        if ell < -_NEG_TOL:
            raise NotConverged(f"eigenvalue {k} = {ell} below -{_NEG_TOL}")
        modes.append(RadialMode(problem=prob, k=k, ell=max(ell, 0.0),
                                coeffs=vecs[:, k].copy(),
                                grid_norm_residual=resid[k]))
    return modes


def _solve_once(prob: RadialProblem, k_max: int, n_basis: int):
    a_mat, b_mat = assemble_galerkin(prob, n_basis)
    vals, vecs = eigh(a_mat, b_mat)
    vals = vals[:k_max + 1]
    vecs = vecs[:, :k_max + 1]
    # fix sign for reproducibility: dominant coefficient positive
    for k in range(vecs.shape[1]):
        lead = np.argmax(np.abs(vecs[:, k]))
        if vecs[lead, k] < 0.0:
            vecs[:, k] = -vecs[:, k]
    resid = _norm_residuals(prob, vecs, n_basis)
    return vals, vecs, resid


def _norm_residuals(prob: RadialProblem, vecs: np.ndarray, n_basis: int):
    """|B-norm on an independent finer grid - 1| per column."""
    gp = prob.gp
    nm, npl = prob.nu_minus, prob.nu_plus
    y, w = rule_on_interval(gp.y_minus, gp.y_plus, 2.0 * nm, 2.0 * npl,
                            n_basis + _QUAD_PAD + 17)
    t = (2.0 * y - gp.y_plus - gp.y_minus) / (gp.y_plus - gp.y_minus)
    basis = jacobi_poly_all(2.0 * npl, 2.0 * nm, n_basis - 1, t)
    rho = (1.0 - y) / 18.0
    vals = vecs.T @ basis
    norms = (vals * vals) @ (w * rho)
    return np.abs(norms - 1.0)
