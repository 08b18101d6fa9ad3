import numpy as np
import pytest

from torsionlab.closed_forms import ball_torsion, ellipsoid_torsion, triangle_torsion
from torsionlab.concavity import (
    ConcavityError,
    boundary_gradient_stats,
    concavity_exponent,
    excess_laplacian_power,
    is_power_concave,
    level_set_bound_check,
    local_property_A_check,
    property_A_check,
)


class TestPowerConcavity:
    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_ball_holds(self, alpha):
        rep = is_power_concave(ball_torsion(), alpha)
        assert rep.verdict == "holds"
        assert rep.witness is None

    def test_ball_alpha_above_one_fails_near_boundary(self):
        rep = is_power_concave(ball_torsion(), 1.1)
        assert rep.verdict == "fails"
        w = rep.witness
        assert w is not None and w["violation"] > rep.tol
        # u^alpha with alpha > 1 loses concavity where |grad u|^2 dominates u
        point = np.asarray(
            w["point"] if w["kind"] == "hessian" else w["midpoint"]
        )
        assert np.linalg.norm(point) > 0.8

    def test_solved_disk_holds_at_half(self, disk_field_128):
        assert is_power_concave(disk_field_128, 0.5).verdict == "holds"

    def test_invalid_alpha(self):
        with pytest.raises(ValueError):
            is_power_concave(ball_torsion(), -0.5)

    def test_margin_too_large(self):
        with pytest.raises(ConcavityError):
            is_power_concave(ball_torsion(), 0.5, margin=2.0)

    def test_verdict_monotone_in_alpha(self):
        f = ellipsoid_torsion(coefficients=(1.5, 0.5))
        order = {"holds": 0, "inconclusive": 1, "fails": 2}
        levels = [
            order[is_power_concave(f, a).verdict]
            for a in (0.5, 0.8, 1.0, 1.05, 1.1)
        ]
        assert levels == sorted(levels)


class TestConcavityExponent:
    def test_ball_bracket_contains_one(self):
        lo, hi = concavity_exponent(ball_torsion())
        assert lo <= 1.0 <= hi
        assert hi - lo <= 0.02

    def test_triangle_bracket_near_half(self):
        lo, hi = concavity_exponent(triangle_torsion())
        assert 0.48 <= lo <= hi <= 0.60


class TestPropertyA:
    def test_ball_holds(self):
        assert property_A_check(ball_torsion()).verdict == "holds"

    def test_ellipse_holds(self):
        assert property_A_check(ellipsoid_torsion(coefficients=(1.5, 0.5))).verdict == "holds"

    def test_triangle_fails_with_witness(self):
        rep = property_A_check(triangle_torsion())
        assert rep.verdict == "fails"
        assert rep.witness["violation"] > 10 * rep.tol

    def test_solved_square_fails(self, square_field_128):
        rep = property_A_check(square_field_128)
        assert rep.verdict == "fails"
        assert rep.witness["violation"] > 10 * rep.tol

    def test_implies_concavity_at_one(self):
        # property (A) holds for the ellipsoid, so alpha = 1 must hold too
        f = ellipsoid_torsion(coefficients=(1.2, 0.8))
        assert property_A_check(f).verdict == "holds"
        assert is_power_concave(f, 1.0).verdict == "holds"


class TestLocalPropertyA:
    def test_ellipsoid_holds_off_center(self):
        f = ellipsoid_torsion(coefficients=(1.5, 0.5))
        rep = local_property_A_check(f, (0.2, 0.1), 0.1)
        assert rep.verdict == "holds"

    def test_ball_holds_anywhere(self):
        rep = local_property_A_check(ball_torsion(), (-0.3, 0.2), 0.15)
        assert rep.verdict == "holds"

    def test_triangle_fails_at_origin(self):
        rep = local_property_A_check(triangle_torsion(), (0.0, 0.0), 0.3)
        assert rep.verdict == "fails"
        assert rep.witness is not None

    def test_ball_not_contained(self):
        with pytest.raises(ConcavityError):
            local_property_A_check(ball_torsion(), (0.9, 0.0), 0.3)


class TestExcessLaplacianPower:
    def test_at_argmax(self):
        f = ball_torsion()
        alpha = 0.7
        g = excess_laplacian_power(f, alpha, (0.0, 0.0))
        assert g == pytest.approx(-alpha * f.max_value ** (alpha - 1))

    def test_alpha_one_is_minus_one(self):
        f = ball_torsion()
        for p in [(0.0, 0.0), (0.5, 0.3), (-0.7, 0.1)]:
            assert excess_laplacian_power(f, 1.0, p) == pytest.approx(-1.0)

    def test_ball_alpha_two_radial_profile(self):
        # u = (1 - r^2)/4, |grad u|^2 = r^2/4, so G = (2 r^2 - 1)/2
        f = ball_torsion()
        r = 0.9
        assert excess_laplacian_power(f, 2.0, (r, 0.0)) == pytest.approx(
            (2 * r**2 - 1) / 2
        )

    def test_positive_g_forbids_concavity(self):
        f = ball_torsion()
        assert excess_laplacian_power(f, 2.0, (0.9, 0.0)) > 0
        assert is_power_concave(f, 2.0).verdict == "fails"


class TestLevelSetBound:
    def test_disk_small_eps_positive(self, solved_disk_128):
        vol, per, bracket = level_set_bound_check(solved_disk_128, 1.1, 1e-3)
        assert vol == pytest.approx(np.pi * (1 - 4e-3), rel=1e-2)
        assert per == pytest.approx(2 * np.pi * np.sqrt(1 - 4e-3), rel=1e-2)
        assert bracket > 0

    def test_disk_large_eps_negative(self, solved_disk_128):
        _, _, bracket = level_set_bound_check(solved_disk_128, 1.1, 0.1)
        assert bracket < 0

    def test_positive_bracket_implies_concavity_failure(self, solved_disk_128, disk_field_128):
        _, _, bracket = level_set_bound_check(solved_disk_128, 1.1, 1e-3)
        assert bracket > 0
        assert is_power_concave(disk_field_128, 1.1).verdict == "fails"

    def test_alpha_validation(self, solved_disk_128):
        with pytest.raises(ValueError):
            level_set_bound_check(solved_disk_128, 0.9, 1e-3)
        with pytest.raises(ValueError):
            level_set_bound_check(solved_disk_128, 1.1, 0.2)


class TestBoundaryGradient:
    def test_disk_constant(self, solved_disk_128):
        stats = boundary_gradient_stats(solved_disk_128)
        assert stats["spread"] < 1e-2
        assert stats["mean"] == pytest.approx(0.5, abs=5e-3)

    def test_square_spread(self, solved_square_128):
        stats = boundary_gradient_stats(solved_square_128)
        assert stats["spread"] > 0.5

    def test_ellipse_nonconstant(self, solved_ellipse_128):
        stats = boundary_gradient_stats(solved_ellipse_128)
        assert stats["spread"] > 1e-1
