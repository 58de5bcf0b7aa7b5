"""Independent shooting verification for the radial eigenproblem.

Clearing denominators turns the radial eigenvalue equation into an ODE
with polynomial coefficients,

    P u'' + Q u' + R u = 0,
    P = 72 A2 C3^2,   Q = 72 A2 C3 C3',
    R = 36 ell (1-y) A2 C3 - 216 Lambda A2 C3 - 18 mu^2 (1-y)^2 C3
        - 9 (1-y) pol^2,

with A2 = a - y^2, C3 = a - 3y^2 + 2y^3, mu = sigma l / tau and
pol = 12 m A2 + mu (a - 2y + y^2).  Both interval endpoints are regular
singular points (C3 has simple zeros there), so power series
u = dist^nu * sum a_k dist^k launched from each endpoint converge on a
neighbourhood; the series recursion below uses the exact shifted
polynomial coefficients and truncates when terms drop below 1e-16
relative.  The two local solutions are integrated to the midpoint with a
high-order adaptive integrator and an eigenvalue is a zero of their
Wronskian mismatch.  Nothing here shares code with the Galerkin path.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import BracketError
from .radial import RadialProblem

__all__ = ["shooting_matcher", "shooting_oracle", "shooting_spectrum"]

# small enough that interior zeros of the first handful of excitations
# stay visible to the oscillation counter, large enough for fast series
_LAUNCH_FRACTION = 0.02
_SERIES_TOL = 1e-16
_SERIES_MAX = 400


def _ode_polys(prob: RadialProblem, ell: float):
    gp = prob.gp
    a = gp.a
    mu = prob.alpha_freq
    a2 = Polynomial([a, 0.0, -1.0])
    c3 = Polynomial([a, 0.0, -3.0, 2.0])
    c3p = c3.deriv()
    one_my = Polynomial([1.0, -1.0])
    pol = 12.0 * prob.m * a2 + mu * Polynomial([a, -2.0, 1.0])
    p_poly = 72.0 * a2 * c3 * c3
    q_poly = 72.0 * a2 * c3 * c3p
    r_poly = (36.0 * ell * one_my * a2 * c3
              - 216.0 * prob.lambda_cap * a2 * c3
              - 18.0 * mu * mu * one_my * one_my * c3
              - 9.0 * one_my * pol * pol)
    return p_poly, q_poly, r_poly


def _frobenius_state(prob: RadialProblem, ell: float, endpoint: int,
                     dist: float) -> np.ndarray:
    """(u, du/dy)/dist^nu at distance `dist` inside the interval from the
    chosen endpoint (-1 for y_minus, +1 for y_plus)."""
    gp = prob.gp
    if endpoint == -1:
        y0, sgn, nu = gp.y_minus, 1.0, prob.nu_minus
    else:
        y0, sgn, nu = gp.y_plus, -1.0, prob.nu_plus
    p_poly, q_poly, r_poly = _ode_polys(prob, ell)
    shift = Polynomial([y0, sgn])
    pz = p_poly(shift).coef
    qz = sgn * q_poly(shift).coef
    rz = r_poly(shift).coef
    pz = np.pad(pz, (0, 16))
    qz = np.pad(qz, (0, 16))
    rz = np.pad(rz, (0, 16))

    def indicial(x: float) -> float:
        return pz[2] * x * (x - 1.0) + qz[1] * x + rz[0]

    coeffs = [1.0]
    s0 = 1.0
    s1 = nu
    for s in range(1, _SERIES_MAX):
        acc = 0.0
        for k in range(max(0, s - 6), s):
            acc += coeffs[k] * (pz[s + 2 - k] * (nu + k) * (nu + k - 1.0)
                                + qz[s + 1 - k] * (nu + k) + rz[s - k])
        a_s = -acc / indicial(nu + s)
        coeffs.append(a_s)
        term = a_s * dist ** s
        s0 += term
        s1 += (nu + s) * term
        if abs(term) < _SERIES_TOL * (abs(s0) + 1e-300) and s > 8:
            break
    # u = dist^nu * s0; du/dzeta = dist^(nu-1) * s1; du/dy = sgn du/dzeta
    return np.array([s0, sgn * s1 / dist])


def shooting_matcher(prob: RadialProblem, ell: float,
                     return_paths: bool = False):
    """Wronskian mismatch of the two endpoint solutions at the midpoint.

    Zero exactly at eigenvalues of -S.  With return_paths=True the dense
    sample values of both half-solutions are returned as well (used for
    oscillation counting).
    """
    gp = prob.gp
    delta = gp.y_plus - gp.y_minus
    d0 = _LAUNCH_FRACTION * delta
    y_mid = 0.5 * (gp.y_minus + gp.y_plus)
    p_poly, q_poly, r_poly = _ode_polys(prob, ell)

    def rhs(y, state):
        u, du = state
        py = p_poly(y)
        return [du, -(q_poly(y) * du + r_poly(y) * u) / py]

    paths = []
    states = []
    for endpoint in (-1, 1):
        y_start = gp.y_minus + d0 if endpoint == -1 else gp.y_plus - d0
        s0 = _frobenius_state(prob, ell, endpoint, d0)
        nrm = np.hypot(*s0)
        sol = solve_ivp(rhs, (y_start, y_mid), s0 / nrm, method="DOP853",
                        rtol=1e-12, atol=1e-14, dense_output=return_paths)
        if not sol.success:  # pragma: no cover - smooth interior ODE
            raise BracketError(f"integration failed: {sol.message}")
        state = sol.y[:, -1]
        scale = np.hypot(*state)
        states.append(state / scale)
        if return_paths:
            ys = np.linspace(y_start, y_mid, 400)
            paths.append((ys, sol.sol(ys)[0] / scale))
    (ul, dul), (ur, dur) = states
    mism = ul * dur - dul * ur
    if return_paths:
        return mism, paths
    return mism


def _oscillation_count(prob: RadialProblem, ell: float) -> int:
    """Interior zeros of the matched eigenfunction at an eigenvalue."""
    _, paths = shooting_matcher(prob, ell, return_paths=True)
    (yl, vl), (yr, vr) = paths
    # match amplitudes at the midpoint and traverse left to right
    if abs(vr[-1]) > 1e-13:
        vr = vr * (vl[-1] / vr[-1])
    seq = np.concatenate([vl, vr[::-1][1:]])
    seq = seq[np.abs(seq) > 1e-11 * np.abs(seq).max()]
    return int(np.sum(seq[1:] * seq[:-1] < 0.0))


def shooting_oracle(prob: RadialProblem, ell_guess_bracket: tuple[float, float],
                    k_target: int) -> float:
    """Eigenvalue inside the bracket, located by bisection on the
    Wronskian mismatch; the oscillation count must equal k_target."""
    lo, hi = ell_guess_bracket
    flo = shooting_matcher(prob, lo)
    fhi = shooting_matcher(prob, hi)
    if flo * fhi > 0.0:
        raise BracketError(f"no sign change of the matcher on [{lo}, {hi}]")
    ell = brentq(lambda e: shooting_matcher(prob, e), lo, hi,
                 xtol=1e-13, rtol=1e-12)
    count = _oscillation_count(prob, ell)
    if count != k_target:
        raise BracketError(
            f"bracket isolated excitation {count}, requested {k_target}")
    return float(ell)


def shooting_spectrum(prob: RadialProblem, k_max: int,
                      ell_hi: float = 64.0) -> list[float]:
    """First k_max+1 eigenvalues by scanning the matcher, with no input
    from the Galerkin side.  Expands and densifies the scan until the
    oscillation counts come out as 0, 1, ..., k_max."""
    n_scan = 24 * (k_max + 2)
    for _ in range(10):
        grid = np.linspace(0.0, ell_hi, n_scan)
        grid[0] = -1e-7
        vals = np.array([shooting_matcher(prob, e) for e in grid])
        roots = []
        for i in range(len(grid) - 1):
            if vals[i] == 0.0:
                roots.append(grid[i])
            elif vals[i] * vals[i + 1] < 0.0:
                roots.append(brentq(lambda e: shooting_matcher(prob, e),
                                    grid[i], grid[i + 1],
                                    xtol=1e-13, rtol=1e-12))
        if len(roots) >= k_max + 1:
            counts = [_oscillation_count(prob, e) for e in roots[:k_max + 1]]
            if counts == list(range(k_max + 1)):
                return [float(e) for e in roots[:k_max + 1]]
            n_scan *= 2
        else:
            ell_hi *= 2.0
    raise BracketError("scan failed to isolate the requested excitations")
