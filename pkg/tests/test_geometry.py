"""Geometry constants: quantization residuals, closed-form cross-check,
profile identities."""

import math

import numpy as np
import pytest

from conftest import label_lattice
from ypqwave.errors import InvalidLabel, OutOfRange
from ypqwave.geometry import (cubic_roots, eval_profiles, profile_h,
                              quantization_ratio, solve_geometry)


def closed_form_a(p: int, q: int) -> float:
    """Independent oracle for the profile constant: with the winding pair
    (P, Q) = (p, q - p) the constant has the closed form
    1/2 - (P^2 - 3Q^2) sqrt(4P^2 - 3Q^2) / (4 P^3)."""
    P, Q = p, q - p
    return 0.5 - (P * P - 3 * Q * Q) * math.sqrt(4 * P * P - 3 * Q * Q) / (4 * P ** 3)


class TestSolveGeometry:
    def test_23_residuals(self, gp23):
        assert abs(quantization_ratio(gp23.a) - 2.0 / 3.0) < 1e-12
        for y in (gp23.y_minus, gp23.y_plus):
            assert abs(gp23.a - 3 * y * y + 2 * y ** 3) < 1e-12

    def test_23_sigma(self, gp23):
        assert gp23.sigma == 6
        assert solve_geometry(2, 3, "display").sigma == 6

    def test_sigma_rules_agree_on_lattice(self):
        # lcm{2, pq, 2p-q} == lcm{2, p, q, 2p-q} whenever gcd(p, q) = 1
        for (p, q) in label_lattice():
            assert (solve_geometry(p, q, "prose").sigma
                    == solve_geometry(p, q, "display").sigma)

    @pytest.mark.parametrize("p,q", [(2, 5), (3, 3), (2, 2), (4, 6), (1, 1),
                                     (3, 7), (0, 1)])
    def test_invalid_labels(self, p, q):
        with pytest.raises(InvalidLabel):
            solve_geometry(p, q)

    def test_closed_form_oracle(self):
        for (p, q) in label_lattice():
            gp = solve_geometry(p, q)
            assert gp.a == pytest.approx(closed_form_a(p, q), abs=2e-13), (p, q)

    def test_lattice_invariants(self):
        for (p, q) in label_lattice():
            gp = solve_geometry(p, q)
            assert 0.0 < gp.a < 1.0
            assert gp.y_minus < 0.0 < gp.y_plus < math.sqrt(gp.a)
            assert gp.tau > 0.0
            assert gp.sigma % 2 == 0
            hm, hp = profile_h(gp.y_minus, gp.a), profile_h(gp.y_plus, gp.a)
            assert abs((hm - hp) / (2.0 * hm) - p / q) < 1e-12
            for y in (gp.y_minus, gp.y_plus):
                assert abs(profile_h(y, gp.a) - (y - 1) / (6 * y)) < 1e-12
            # both tau anchors give the same value
            assert gp.tau == pytest.approx(2 * hm / q, rel=1e-13)
            assert gp.tau == pytest.approx(-2 * hp / (2 * p - q), rel=1e-12)

    def test_cubic_roots_ordering(self):
        ym, yp, y3 = cubic_roots(0.44)
        assert ym < 0.0 < yp < 1.0 < y3 < 1.5


class TestProfiles:
    def test_r_vanishes_at_right_root(self, gp23):
        assert abs(eval_profiles(gp23, gp23.y_plus).r) < 1e-12

    def test_h_identity_at_roots(self, gp23):
        for y in (gp23.y_minus, gp23.y_plus):
            pv = eval_profiles(gp23, y)
            assert pv.h == pytest.approx((y - 1) / (6 * y), abs=1e-12)

    def test_origin_values(self, gp23):
        pv = eval_profiles(gp23, 0.0)
        assert pv.w == pytest.approx(2 * gp23.a, rel=1e-15)
        assert pv.r == pytest.approx(1.0, rel=1e-15)
        assert pv.rho == pytest.approx(1.0 / 18.0, rel=1e-15)

    def test_out_of_range(self, gp23):
        with pytest.raises(OutOfRange):
            eval_profiles(gp23, gp23.y_plus + 0.01)

    def test_w_positive_r_nonnegative(self, gp23):
        ys = np.linspace(gp23.y_minus, gp23.y_plus, 101)
        pvs = [eval_profiles(gp23, y) for y in ys]
        assert all(pv.w > 0.0 for pv in pvs)
        assert all(pv.r > -1e-14 for pv in pvs)

    def test_r_derivative_smooth(self, gp23):
        a = gp23.a
        for y in np.linspace(gp23.y_minus + 0.03, gp23.y_plus - 0.03, 9):
            h = 1e-6
            fd = (eval_profiles(gp23, y + h).r
                  - eval_profiles(gp23, y - h).r) / (2 * h)
            num, den = a - 3 * y * y + 2 * y ** 3, a - y * y
            exact = (6 * y * y - 6 * y) / den + 2 * y * num / den ** 2
            assert fd == pytest.approx(exact, abs=1e-8)

    def test_rho_b(self, gp23):
        pv = eval_profiles(gp23, 0.1)
        assert pv.rho_B == pytest.approx(pv.rho / math.sqrt(pv.w), rel=1e-14)
