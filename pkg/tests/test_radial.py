"""Radial eigensolver: Galerkin against the independent shooting oracle,
endpoint exponents, spectral structure."""

import math

import numpy as np
import pytest

from ypqwave.angular import angular_eigenvalue
from ypqwave.errors import BracketError, OutOfRange
from ypqwave.radial import (assemble_galerkin, char_exponents, radial_problem,
                            solve_radial)
from ypqwave.shooting import (shooting_matcher, shooting_oracle,
                              shooting_spectrum)
from ypqwave.specfun import rule_on_interval


class TestCharExponents:
    def test_pure_m(self, gp23):
        assert char_exponents(gp23, 3, 0) == (3.0, 3.0)

    def test_23_l1(self, gp23):
        # sigma = 6: the q-anchored exponent 4.5 sits at the negative root
        nu_minus, nu_plus = char_exponents(gp23, 0, 1)
        assert (nu_minus, nu_plus) == (4.5, 1.5)

    def test_half_integer_lattice(self, gp23, gp34):
        for gp in (gp23, gp34):
            for m in range(-3, 4):
                for l in range(-2, 3):
                    for nu in char_exponents(gp, m, l):
                        assert 2.0 * nu == round(2.0 * nu)
                        assert nu >= 0.0

    def test_friedrichs_sector_solves(self, gp23):
        # nu_minus = 0 at m = -q sigma l/4: for (2,3), l = 2 gives m = -9
        nu_minus, nu_plus = char_exponents(gp23, -9, 2)
        assert nu_minus == 0.0
        prob = radial_problem(gp23, -9, 2, 0.0)
        modes = solve_radial(prob, 1, 24)
        assert modes[0].ell >= 0.0
        assert modes[0].grid_norm_residual < 1e-10

    def test_exponents_match_indicial_charge(self, gp23):
        # |charge|/2 at each endpoint reproduces the exponent formulas
        for (m, l) in [(0, 1), (2, -1), (1, 2)]:
            prob = radial_problem(gp23, m, l, 0.0)
            eps = 1e-9
            qm = prob.potential_charge(gp23.y_minus + eps)
            qp = prob.potential_charge(gp23.y_plus - eps)
            assert abs(qm) / 2.0 == pytest.approx(prob.nu_minus, abs=1e-6)
            assert abs(qp) / 2.0 == pytest.approx(prob.nu_plus, abs=1e-6)


class TestAssembly:
    def test_symmetry(self, gp23):
        prob = radial_problem(gp23, 1, 1, 4.0)
        a, b = assemble_galerkin(prob, 20)
        assert np.abs(a - a.T).max() < 1e-12 * max(1.0, np.abs(a).max())
        assert np.abs(b - b.T).max() < 1e-12

    def test_mass_positive_definite(self, gp23):
        prob = radial_problem(gp23, 0, 1, 2.0)
        _, b = assemble_galerkin(prob, 18)
        assert np.linalg.eigvalsh(b).min() > 0.0

    def test_constant_in_kernel(self, gp23):
        prob = radial_problem(gp23, 0, 0, 0.0)
        a, _ = assemble_galerkin(prob, 16)
        e0 = np.zeros(16)
        e0[0] = 1.0
        assert np.abs(a @ e0).max() < 1e-9


class TestSolveRadial:
    def test_kernel_mode(self, gp23):
        modes = solve_radial(radial_problem(gp23, 0, 0, 0.0), 0, 12)
        assert modes[0].ell == 0.0
        assert np.abs(modes[0].coeffs[1:]).max() < 1e-10

    def test_positive_with_lambda(self, gp23):
        modes = solve_radial(radial_problem(gp23, 0, 0, 5.0), 0, 16)
        assert modes[0].ell > 0.0

    def test_oracle_agreement_m1_l0(self, gp23):
        prob = radial_problem(gp23, 1, 0, 8.0)
        modes = solve_radial(prob, 4, 28)
        for md in modes:
            pad = 0.03 * max(1.0, md.ell)
            ell = shooting_oracle(prob, (md.ell - pad, md.ell + pad), md.k)
            assert md.ell == pytest.approx(ell, rel=1e-6)

    def test_independent_scan_m0_l1(self, gp23):
        prob = radial_problem(gp23, 0, 1, 0.0)
        galerkin = [md.ell for md in solve_radial(prob, 2, 24)]
        scanned = shooting_spectrum(prob, 2, ell_hi=max(galerkin) * 2.0)
        for g, s in zip(galerkin, scanned):
            assert g == pytest.approx(s, rel=1e-6)

    def test_monotone_in_lambda(self, gp23):
        for lam0, lam1 in [(0.0, 2.0), (2.0, 6.0)]:
            for k in range(3):
                e0 = solve_radial(radial_problem(gp23, 1, 0, lam0), k, 20)[k].ell
                e1 = solve_radial(radial_problem(gp23, 1, 0, lam1), k, 20)[k].ell
                assert e1 >= e0 - 1e-10

    def test_conjugate_sector_identity(self, gp23):
        a = solve_radial(radial_problem(gp23, 2, -1, 3.0), 2, 24)
        b = solve_radial(radial_problem(gp23, -2, 1, 3.0), 2, 24)
        for ma, mb in zip(a, b):
            assert abs(ma.ell - mb.ell) < 1e-9 * max(1.0, ma.ell)

    def test_strictly_increasing_simple(self, gp23):
        modes = solve_radial(radial_problem(gp23, 1, 1, 4.0), 4, 28)
        ells = [md.ell for md in modes]
        assert all(b > a for a, b in zip(ells, ells[1:]))

    def test_spectral_convergence(self, gp23):
        # change per basis doubling keeps halving, or sits at the roundoff
        # floor (the weighted basis converges to machine precision fast)
        prob = radial_problem(gp23, 0, 1, 6.0)
        e = {n: solve_radial(prob, 4, n)[4].ell for n in (13, 26, 52)}
        d0 = abs(e[13] - e[26])
        d1 = abs(e[26] - e[52])
        assert d1 <= max(0.5 * d0, 1e-12 * max(1.0, abs(e[52])))

    def test_norm_residuals(self, gp23):
        modes = solve_radial(radial_problem(gp23, 1, 0, 8.0), 3, 24)
        assert all(md.grid_norm_residual < 1e-10 for md in modes)

    def test_nbasis_guard(self, gp23):
        with pytest.raises(ValueError):
            solve_radial(radial_problem(gp23, 0, 0, 0.0), 4, 8)


class TestEval:
    def test_constant_value(self, gp23):
        md = solve_radial(radial_problem(gp23, 0, 0, 0.0), 0, 12)[0]
        ym, yp = gp23.y_minus, gp23.y_plus
        rho_mass = ((yp - ym) - (yp ** 2 - ym ** 2) / 2.0) / 18.0
        expect = 1.0 / math.sqrt(rho_mass)
        for y in (0.0, 0.2, ym + 1e-6):
            assert abs(md.value(y)) == pytest.approx(expect, rel=1e-12)

    def test_out_of_range(self, gp23):
        md = solve_radial(radial_problem(gp23, 0, 0, 0.0), 0, 12)[0]
        with pytest.raises(OutOfRange):
            md.value(gp23.y_plus)

    @pytest.mark.parametrize("m,l,k", [(0, 1, 0), (1, 0, 1), (2, -1, 0)])
    def test_endpoint_slopes(self, gp23, m, l, k):
        prob = radial_problem(gp23, m, l, 0.0)
        md = solve_radial(prob, k, 24)[k]
        delta = gp23.y_plus - gp23.y_minus
        d = np.logspace(-4, -3, 12) * delta
        for exponent, y in ((prob.nu_minus, gp23.y_minus + d),
                            (prob.nu_plus, gp23.y_plus - d)):
            vals = np.abs(md.value(y))
            if exponent == 0.0:
                assert vals.min() > 1e-6  # no decay for the Friedrichs case
                continue
            slope = np.polyfit(np.log(d), np.log(vals), 1)[0]
            assert slope == pytest.approx(exponent, abs=0.05)

    def test_mode_orthogonality(self, gp23):
        prob = radial_problem(gp23, 1, 0, 8.0)
        modes = solve_radial(prob, 1, 20)
        deg = int(2 * (prob.nu_minus + prob.nu_plus)) + 2 * len(modes[0].coeffs)
        y, w = rule_on_interval(gp23.y_minus, gp23.y_plus, 0.0, 0.0,
                                deg // 2 + 4)
        rho = (1.0 - y) / 18.0
        inner = float(np.dot(w * rho, modes[0].value(y) * modes[1].value(y)))
        assert abs(inner) < 1e-9

    def test_operator_residual_pointwise(self, gp23):
        md = solve_radial(radial_problem(gp23, 1, 1, 6.0), 2, 32)[2]
        ys = np.linspace(gp23.y_minus + 0.08, gp23.y_plus - 0.08, 25)
        assert np.abs(md.operator_residual(ys)).max() < 1e-8


class TestShooting:
    def test_kernel_root(self, gp23):
        prob = radial_problem(gp23, 0, 0, 0.0)
        ell = shooting_oracle(prob, (-1e-6, 1e-6), 0)
        assert abs(ell) < 1e-10

    def test_bracket_error(self, gp23):
        prob = radial_problem(gp23, 1, 0, 8.0)
        with pytest.raises(BracketError):
            shooting_oracle(prob, (1.0, 2.0), 0)  # no eigenvalue in there

    def test_matcher_smooth(self, gp23):
        prob = radial_problem(gp23, 0, 1, 0.0)
        vals = [shooting_matcher(prob, e) for e in (1.0, 5.0, 20.0)]
        assert all(np.isfinite(v) for v in vals)

    def test_radial_matrix_agreement(self, gp23, gp34):
        # one spot check per geometry beyond the dedicated acceptance run
        lam = angular_eigenvalue(1, 0, 1)
        for gp in (gp23, gp34):
            prob = radial_problem(gp, 2, -1, lam)
            modes = solve_radial(prob, 1, 24)
            for md in modes:
                pad = 0.03 * max(1.0, md.ell)
                ell = shooting_oracle(prob, (md.ell - pad, md.ell + pad), md.k)
                assert md.ell == pytest.approx(ell, rel=1e-6)
