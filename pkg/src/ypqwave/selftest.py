"""Invariant suite behind the `selftest` subcommand.

Each check re-derives its expected values from an independent route
(closed forms, exact moments, shooting, trig identities) and prints one
pass/fail line; exit status 0 only if everything passes.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time
from fractions import Fraction

import numpy as np

from .angular import angular_gram, angular_mode
from .ads import (SpectralCoefficients, ads_gram, ads_radial_mode,
                  s3_laplace_residual)
from .cache import CacheKey, cache_get_or_solve
from .config import parse_config
from .errors import ConfigError
from .geometry import eval_profiles, profile_h, solve_geometry
from .propagator import CauchyData, KGPropagator, SourceTerm, TruncationSpec
from .radial import radial_problem, solve_radial
from .shooting import shooting_oracle
from .specfun import gauss_jacobi, jacobi_norm_integral, jacobi_poly, rule_on_01
from .spectrum import (TruncationPolicy, build_modes, enumerate_modes,
                       basis_gram, laplacian_residual, random_points)

__all__ = ["run_selftest"]


def _label_lattice(p_top: int = 6):
    return [(p, q) for p in range(2, p_top + 1) for q in range(p + 1, 2 * p)
            if math.gcd(p, q) == 1]


def _check_geometry(fast: bool):
    worst = 0.0
    for (p, q) in _label_lattice(4 if fast else 6):
        gp = solve_geometry(p, q)
        if not (0.0 < gp.a < 1.0 and gp.y_minus < 0.0 < gp.y_plus < 1.0):
            return False, f"ordering broken for ({p}, {q})"
        if gp.tau <= 0.0 or gp.sigma % 2:
            return False, f"tau/sigma invariants broken for ({p}, {q})"
        hm, hp = profile_h(gp.y_minus, gp.a), profile_h(gp.y_plus, gp.a)
        worst = max(worst, abs((hm - hp) / (2.0 * hm) - p / q))
        for y in (gp.y_minus, gp.y_plus):
            worst = max(worst, abs(gp.a - 3.0 * y * y + 2.0 * y ** 3))
            worst = max(worst, abs(profile_h(y, gp.a) - (y - 1.0) / (6.0 * y)))
    return worst < 1e-12, f"max residual {worst:.2e}"


def _check_profiles(fast: bool):
    gp = solve_geometry(2, 3)
    pv = eval_profiles(gp, 0.0)
    if abs(pv.w - 2.0 * gp.a) > 1e-14 or abs(pv.r - 1.0) > 1e-14:
        return False, "midpoint profile values off"
    worst = 0.0
    for y in np.linspace(gp.y_minus + 0.05, gp.y_plus - 0.05, 7):
        h = 1e-6
        fd = (eval_profiles(gp, y + h).r - eval_profiles(gp, y - h).r) / (2 * h)
        a = gp.a
        num, den = a - 3 * y * y + 2 * y ** 3, a - y * y
        exact = (6 * y * y - 6 * y) / den + 2 * y * num / den ** 2
        worst = max(worst, abs(fd - exact))
    return worst < 1e-8, f"max derivative mismatch {worst:.2e}"


def _check_quadrature(fast: bool):
    rule = gauss_jacobi(1.0, 2.0, 8)
    worst = 0.0
    for k in range(14):
        quad = rule.integrate(rule.nodes ** k)
        exact = float(_jacobi_moment(1, 2, k))
        worst = max(worst, abs(quad - exact) / max(abs(exact), 1e-300))
    two = gauss_jacobi(0.0, 0.0, 2)
    worst = max(worst, abs(two.nodes[1] - 1.0 / math.sqrt(3.0)),
                abs(two.weights[0] - 1.0))
    return worst < 1e-12, f"max relative moment error {worst:.2e}"


def _jacobi_moment(alpha: int, beta: int, k: int) -> Fraction:
    """int_-1^1 (1-x)^alpha (1+x)^beta x^k dx, exact (binomial expansion
    of x = (1+x) - 1 into Beta-function pieces)."""
    total = Fraction(0)
    for i in range(k + 1):
        bpart = Fraction(math.factorial(alpha) * math.factorial(beta + i),
                         math.factorial(alpha + beta + i + 1))
        total += (math.comb(k, i) * (-1) ** (k - i)
                  * Fraction(2) ** (alpha + beta + i + 1) * bpart)
    return total


def _check_jacobi_norms(fast: bool):
    worst = 0.0
    for (a, b, j) in [(0, 0, 0), (1, 1, 0), (2, 3, 4), (5, 2, 7)]:
        z, w = rule_on_01(a, b, j + 6)
        quad = float(np.dot(w, jacobi_poly(a, b, j, 1.0 - 2.0 * z) ** 2))
        closed = jacobi_norm_integral(a, b, j)
        worst = max(worst, abs(quad - closed) / closed)
    return worst < 1e-12, f"max relative error {worst:.2e}"


def _check_angular(fast: bool):
    worst_gram = 0.0
    for (n, m) in [(0, 0), (1, -2), (2, 1)]:
        g = angular_gram(n, m, 6)
        worst_gram = max(worst_gram, np.abs(g - np.eye(7)).max())
    th = np.pi * (1.0 + np.cos(np.pi * (2 * np.arange(40) + 1) / 80.0)) / 2.0
    worst_res = 0.0
    for (n, m, j) in [(2, 1, 3), (0, 0, 4), (1, -1, 2)]:
        md = angular_mode(n, m, j)
        worst_res = max(worst_res, np.abs(md.operator_residual(th)).max())
    ok = worst_gram < 1e-11 and worst_res < 1e-7
    return ok, f"gram {worst_gram:.2e}, residual {worst_res:.2e}"


def _check_radial_kernel(fast: bool):
    gp = solve_geometry(2, 3)
    modes = solve_radial(radial_problem(gp, 0, 0, 0.0), 2, 16)
    coeff_tail = np.abs(modes[0].coeffs[1:]).max()
    ok = modes[0].ell < 1e-9 and coeff_tail < 1e-9
    return ok, f"ell0 {modes[0].ell:.2e}, nonconstant part {coeff_tail:.2e}"


def _check_radial_oracle(fast: bool):
    gp = solve_geometry(2, 3)
    prob = radial_problem(gp, 1, 0, 6.0)
    k_top = 1 if fast else 3
    modes = solve_radial(prob, k_top, 28)
    worst = 0.0
    for md in modes:
        pad = 0.03 * max(1.0, md.ell)
        ell = shooting_oracle(prob, (md.ell - pad, md.ell + pad), md.k)
        worst = max(worst, abs(ell - md.ell) / max(1.0, abs(ell)))
    return worst < 1e-6, f"max relative disagreement {worst:.2e}"


def _check_radial_slopes(fast: bool):
    gp = solve_geometry(2, 3)
    prob = radial_problem(gp, 0, 1, 0.0)
    md = solve_radial(prob, 0, 24)[0]
    worst = 0.0
    for (end, nu) in ((-1, prob.nu_minus), (1, prob.nu_plus)):
        delta = gp.y_plus - gp.y_minus
        d = np.logspace(-4, -3, 12) * delta
        y = gp.y_minus + d if end == -1 else gp.y_plus - d
        slope = np.polyfit(np.log(d), np.log(np.abs(md.value(y))), 1)[0]
        worst = max(worst, abs(slope - nu))
    return worst < 0.05, f"max slope error {worst:.3f}"


def _check_spectrum(fast: bool):
    gp = solve_geometry(2, 3)
    bounds = TruncationPolicy(1, 1, 0, 1, 1) if fast else TruncationPolicy(1, 1, 1, 1, 1)
    modes = build_modes(gp, enumerate_modes(gp, bounds), 28)[:12]
    gram = basis_gram(modes)
    dev = np.abs(gram - np.eye(len(modes))).max()
    pts = random_points(gp, 5 if fast else 12, np.random.default_rng(2))
    res = max(laplacian_residual(md, pts).max() for md in modes)
    ok = dev < 1e-9 and res < 1e-6
    return ok, f"gram {dev:.2e}, laplacian residual {res:.2e}"


def _check_ads(fast: bool):
    worst_gram = max(np.abs(ads_gram(b1, c, 8) - np.eye(9)).max()
                     for b1 in (0, 2) for c in (2.0, 3.4))
    md = ads_radial_mode(1, 2.5, 4)
    xs = np.linspace(0.2, 1.35, 25)
    res = np.abs(md.operator_residual(xs, M=0.5, kappa=1.0)).max()
    # spacing identity, exact in rational arithmetic
    c = Fraction(7, 2)
    ok_sp = all(
        (2 * (i + 1) + 3 + c + 2) ** 2 - (2 * i + 3 + c + 2) ** 2
        == 4 * (2 * i + 3 + c + 3) for i in range(6))
    rng = np.random.default_rng(4)
    pts = [(rng.uniform(0.3, 2.8), rng.uniform(0.3, 2.8), rng.uniform(0, 6.2))
           for _ in range(20)]
    s3res = max(s3_laplace_residual(s1, s2, s3, pts).max()
                for (s1, s2, s3) in [(1, 0, 0), (3, 2, -1)])
    ok = worst_gram < 1e-10 and res < 1e-6 and ok_sp and s3res < 1e-6
    return ok, (f"gram {worst_gram:.2e}, L-residual {res:.2e}, "
                f"S3 residual {s3res:.2e}, spacing exact {ok_sp}")


def _check_propagator(fast: bool):
    gp = solve_geometry(2, 3)
    trunc = TruncationSpec(s1_max=1, n_max=1, m_max=0, l_max=0, k_max=1,
                           j_max=1, i_max=3, n_basis=20,
                           grid_shape=(24, 6, 6, 8, 24))
    prop = KGPropagator(gp, M=1.0, kappa=1.0, trunc=trunc)
    rng = np.random.default_rng(6)
    a0, a1 = SpectralCoefficients(), SpectralCoefficients()
    for beta in prop.betas[:8]:
        a0[(beta, 0)] = complex(rng.normal(), rng.normal())
        a1[(beta, 1)] = complex(rng.normal(), rng.normal())
    data = CauchyData(a0, a1)
    e0 = prop.mode_energy(data)
    worst_e = 0.0
    for t in (1.0, 5.0, 10.0):
        st = prop.evolve(data, t, synthesize_values=False)
        et = prop.mode_energy(CauchyData(st.coefficients, st.velocity))
        worst_e = max(worst_e,
                      max(abs(et[k] - e0[k]) / e0[k] for k in e0 if e0[k] > 0))
    refl = prop.check_reflection(data, 2.3)
    s1 = prop.evolve(data, 1.1, synthesize_values=False)
    s12 = prop.evolve(CauchyData(s1.coefficients, s1.velocity), 2.2,
                      synthesize_values=False)
    sd = prop.evolve(data, 3.3, synthesize_values=False)
    comp = max(abs(s12.coefficients[k] - sd.coefficients[k])
               for k in sd.coefficients.entries)
    beta = prop.betas[0]
    one = SpectralCoefficients()
    one[(beta, 0)] = 1.0
    src = SourceTerm(np.linspace(0.0, 4.0, 7), [one] * 7)
    zero = CauchyData(SpectralCoefficients(), SpectralCoefficients())
    si = prop.evolve_inhomogeneous(zero, src, 2.7, synthesize_values=False)
    om = prop.omega((beta, 0))
    duh = abs(si.coefficients[(beta, 0)]
              - (1.0 - math.cos(2.7 * math.sqrt(om))) / om)
    ok = worst_e < 1e-12 and refl < 1e-12 and comp < 1e-12 and duh < 1e-10
    return ok, (f"energy {worst_e:.2e}, reflection {refl:.2e}, "
                f"composition {comp:.2e}, duhamel {duh:.2e}")


def _check_cache(fast: bool):
    gp = solve_geometry(2, 3)
    prob = radial_problem(gp, 1, 0, 2.0)
    calls = {"n": 0}

    def solve():
        calls["n"] += 1
        return solve_radial(prob, 1, 16)

    with tempfile.TemporaryDirectory() as tmp:
        key = CacheKey(p=2, q=3, sigma_rule="prose", m=1, l=0,
                       lambda_cap=2.0, n_basis=16)
        first = cache_get_or_solve(key, solve, tmp, min_modes=2)
        second = cache_get_or_solve(key, solve, tmp, min_modes=2)
        if calls["n"] != 1:
            return False, f"solver invoked {calls['n']} times, expected 1"
        if any(abs(a.ell - b.ell) > 0.0 for a, b in zip(first, second)):
            return False, "cache round trip not bitwise"
        path = os.path.join(tmp, key.filename())
        with open(path, "r+", encoding="utf-8") as fh:
            entry = json.load(fh)
            entry["payload"]["modes"][0]["ell"] += 1e-3
            fh.seek(0)
            json.dump(entry, fh)
            fh.truncate()
        import warnings as _w
        with _w.catch_warnings():
            _w.simplefilter("ignore")
            third = cache_get_or_solve(key, solve, tmp, min_modes=2)
        if calls["n"] != 2:
            return False, "corrupted entry was not re-solved"
        if abs(third[0].ell - first[0].ell) > 0.0:
            return False, "recovered entry differs from fresh solve"
    return True, "hit, bitwise round trip, corruption recovery"


def _check_config(fast: bool):
    good = parse_config(
        "schema_version = 1\np = 2\nq = 3\n"
        "phi0_coef = 0 0 0 0 0 0 0 0 0 : 1.0 : 0.0\n")
    if good.p != 2 or len(good.phi0_coefs) != 1:
        return False, "parse result wrong"
    try:
        parse_config("schema_version = 1\np = 2\nq = 3\nbogus = 1\n"
                     "phi0_coef = 0 0 0 0 0 0 0 0 0 : 1 : 0\n")
        return False, "unknown key accepted"
    except ConfigError as exc:
        if "line 4" not in str(exc):
            return False, f"wrong line number in: {exc}"
    return True, "parse and line-precise errors"


def _check_serialization(fast: bool):
    gp = solve_geometry(3, 4)
    for val in (gp.a, gp.tau, gp.y_minus, math.pi, 1.0 / 3.0):
        if float(format(val, ".17g")) != val:
            return False, f"17g round trip failed for {val!r}"
    return True, "17-digit decimal round trip exact"


_CHECKS = [
    ("geometry lattice", _check_geometry),
    ("profile functions", _check_profiles),
    ("gauss-jacobi exactness", _check_quadrature),
    ("jacobi norm integrals", _check_jacobi_norms),
    ("angular basis", _check_angular),
    ("radial kernel", _check_radial_kernel),
    ("radial vs shooting", _check_radial_oracle),
    ("radial endpoint slopes", _check_radial_slopes),
    ("spectrum assembly", _check_spectrum),
    ("ads modes", _check_ads),
    ("propagator diagnostics", _check_propagator),
    ("eigenmode cache", _check_cache),
    ("run config", _check_config),
    ("serialization", _check_serialization),
]


def run_selftest(fast: bool = False) -> int:
    failures = 0
    t_start = time.time()
    for name, check in _CHECKS:
        t0 = time.time()
        try:
            ok, detail = check(fast)
        except Exception as exc:
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"{status}  {name:<24} {detail}  [{time.time() - t0:.1f}s]")
    total = time.time() - t_start
    print(f"{'OK' if failures == 0 else 'FAILED'}: "
          f"{len(_CHECKS) - failures}/{len(_CHECKS)} checks passed "
          f"in {total:.1f}s")
    return 0 if failures == 0 else 1
