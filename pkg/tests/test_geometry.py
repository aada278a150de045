import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kreinfeller.dimension import ball_profile, estimate_linf_dim
from kreinfeller.errors import CoverageError, DomainError, ValidationError
from kreinfeller.geometry import (
    ChartMap,
    ConeAnnulus,
    HyperbolicSurface,
    ModelSpace,
    SphereSurface,
    _acosh_stable,
    annulus_chord,
    annulus_chord_bracket,
    chart_pushforward,
    cone_annulus_contains,
    cone_solid_angle,
    hinge_third_side,
    inclusion_probe,
    model_exp,
    model_log,
)
from kreinfeller.ifs import MeasureApprox, cantor_system, discretize

FLAT = ModelSpace("flat")


def mp_hinge(kind, R, a, b, alpha, dps=50):
    """High-precision hinge third side, the oracle for the double formulas."""
    with mp.workdps(dps):
        a, b, alpha, R = map(mp.mpf, (a, b, alpha, R))
        if kind == "flat":
            return float(mp.sqrt(a**2 + b**2 - 2 * a * b * mp.cos(alpha)))
        if kind == "hyperbolic":
            y = mp.cosh(a / R) * mp.cosh(b / R) - mp.sinh(a / R) * mp.sinh(b / R) * mp.cos(alpha)
            return float(R * mp.acosh(y))
        x = mp.cos(a / R) * mp.cos(b / R) + mp.sin(a / R) * mp.sin(b / R) * mp.cos(alpha)
        return float(R * mp.acos(x))


class TestHinge:
    def test_pythagoras(self):
        assert hinge_third_side(FLAT, 3.0, 4.0, math.pi / 2) == pytest.approx(5.0, abs=1e-12)

    def test_degenerate_hinge_exact_zero(self):
        for space in (FLAT, ModelSpace("hyperbolic", 2.0), ModelSpace("spherical", 2.0)):
            assert hinge_third_side(space, 1.3, 1.3, 0.0) == 0.0

    def test_hyperbolic_against_oracle(self):
        # arccosh(cosh^2 1) = 1.51337..., frozen from the 50-digit oracle
        got = hinge_third_side(ModelSpace("hyperbolic", 1.0), 1.0, 1.0, math.pi / 2)
        assert got == pytest.approx(mp_hinge("hyperbolic", 1, 1, 1, math.pi / 2), abs=1e-14)
        assert got == pytest.approx(1.5133740065965040, abs=1e-12)

    def test_random_against_oracle(self, rng):
        for _ in range(200):
            a, b = rng.uniform(0.01, 2.0, 2)
            alpha = rng.uniform(0.0, math.pi)
            R = rng.uniform(0.8, 5.0)
            for kind in ("flat", "hyperbolic", "spherical"):
                if kind == "spherical" and a + b >= math.pi * R:
                    continue
                space = ModelSpace(kind, R)
                ref = mp_hinge(kind, R, a, b, alpha)
                assert hinge_third_side(space, a, b, alpha) == pytest.approx(
                    ref, rel=1e-12, abs=1e-13
                )

    def test_spherical_domain_error(self):
        with pytest.raises(DomainError):
            hinge_third_side(ModelSpace("spherical", 1.0), 2.0, 2.0, 0.5)

    def test_acosh_stable_near_one(self):
        for t in (1e-20, 1e-12, 1e-9, 1e-7, 0.1, 2.0):
            ref = float(mp.acosh(1 + mp.mpf(t)))
            assert _acosh_stable(1.0 + t) == pytest.approx(ref, rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(
    a=st.floats(0.01, 1.5),
    b=st.floats(0.01, 1.5),
    alpha=st.floats(0.0, math.pi),
)
def test_curvature_ordering_and_triangle(a, b, alpha):
    s = hinge_third_side(ModelSpace("spherical", 1.0), a, b, alpha)
    f = hinge_third_side(FLAT, a, b, alpha)
    h = hinge_third_side(ModelSpace("hyperbolic", 1.0), a, b, alpha)
    assert s <= f + 1e-12 and f <= h + 1e-12
    assert max(s, f, h) <= a + b + 1e-12


class TestAnnulusChord:
    def test_flat_reference_value(self):
        v = annulus_chord("flat", 1.0, 1.0, math.pi / 8, 0.0)
        assert v == pytest.approx(2 * math.sin(math.pi / 4), abs=1e-14)
        assert 2 * (math.pi / 8) <= v <= 8 * (math.pi / 8)

    def test_zero_delta_all_branches(self):
        for branch in ("flat", "hyperbolic", "spherical"):
            assert annulus_chord(branch, 1.0, 1.0, 0.0, 0.0) == 0.0

    def test_hyperbolic_value_against_oracle(self):
        got = annulus_chord("hyperbolic", 1.0, 1.0, 0.1, 0.05)
        with mp.workdps(50):
            y = mp.cosh(mp.mpf("1.05")) ** 2 - mp.sinh(mp.mpf("1.05")) ** 2 * mp.cos(mp.mpf("0.4"))
            ref = float(mp.acosh(y))
        assert got == pytest.approx(ref, rel=1e-13)

    def test_flat_bracket_bounds(self, rng):
        for _ in range(5):
            rho = rng.uniform(0.2, 3.0)
            cmin, cmax = annulus_chord_bracket("flat", rho, 1.0,
                                               delta_points=50, lambda_points=50)
            assert 2.0 - 1e-12 <= cmin <= cmax <= 8.0 + 1e-12

    def test_near_flat_hyperbolic_matches_flat(self):
        cmin_f, cmax_f = annulus_chord_bracket("flat", 1.0, 1.0,
                                               delta_points=40, lambda_points=40)
        cmin_h, cmax_h = annulus_chord_bracket("hyperbolic", 1.0, 10.0,
                                               delta_points=40, lambda_points=40)
        assert cmin_h == pytest.approx(cmin_f, rel=0.05)
        assert cmax_h == pytest.approx(cmax_f, rel=0.05)

    def test_spherical_bracket_positive_finite(self):
        cmin, cmax = annulus_chord_bracket("spherical", 0.5, 2.0,
                                           delta_points=40, lambda_points=40)
        assert 0.0 < cmin <= cmax < math.inf

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            annulus_chord("flat", 1.0, 1.0, 1.0, 0.0)  # delta > pi rho / 4
        with pytest.raises(DomainError):
            annulus_chord("flat", 1.0, 1.0, 0.1, 0.5)  # lambda > 2 delta
        with pytest.raises(DomainError):
            annulus_chord("spherical", 1.0, 0.25, 0.1, 0.0)  # pi R <= rho


class TestSolidAngle:
    def test_planar_cone_is_twice_polar_angle(self):
        for th in (0.1, 0.5, 1.2):
            assert cone_solid_angle(th, 2) == pytest.approx(2 * th, rel=1e-12)

    def test_three_dim_cap_area(self):
        for th in (0.2, 0.7, 1.3):
            assert cone_solid_angle(th, 3) == pytest.approx(
                2 * math.pi * (1 - math.cos(th)), rel=1e-12
            )


class TestConeAnnulus:
    def test_center_inside_vertex_outside(self):
        V = ConeAnnulus(np.zeros(2), np.array([1.0, 0.0]), rho=1.0, delta=0.1)
        assert cone_annulus_contains(V, V.center)
        assert not cone_annulus_contains(V, V.vertex)
        assert V.beta == 4 * 0.1 / 1.0
        assert np.linalg.norm(V.center - V.vertex) == pytest.approx(1.1)

    def test_point_just_outside_opening(self):
        V = ConeAnnulus(np.zeros(2), np.array([1.0, 0.0]), rho=1.0, delta=0.1)
        ang = V.beta / 2 + 0.01
        p = 1.1 * np.array([math.cos(ang), math.sin(ang)])
        assert not cone_annulus_contains(V, p)

    def test_invariant_rejects_fat_delta(self):
        with pytest.raises(ValidationError):
            ConeAnnulus(np.zeros(2), np.array([1.0, 0.0]), rho=1.0, delta=1.0)

    def test_inclusion_probe_clean(self):
        V = ConeAnnulus(np.zeros(2), np.array([1.0, 0.0]), rho=1.0, delta=0.1)
        rep = inclusion_probe(V, 20_000, seed=7)
        assert rep["inner_violations"] == 0 and rep["outer_violations"] == 0

    def test_inclusion_probe_boundary_delta(self):
        V = ConeAnnulus(np.zeros(2), np.array([0.0, 1.0]), rho=1.0,
                        delta=0.999 * math.pi / 4)
        rep = inclusion_probe(V, 20_000, seed=8)
        assert rep["inner_violations"] == 0 and rep["outer_violations"] == 0

    def test_widened_negative_control(self):
        V = ConeAnnulus(np.zeros(3), np.array([0.0, 0.0, 1.0]), rho=1.0, delta=0.02)
        rep = inclusion_probe(V, 20_000, seed=9, widen_beta=6.0)
        assert rep["outer_violations"] > 0


class TestChartsAndPushforward:
    def test_zero_vector_maps_to_base(self):
        s = SphereSurface(1.0)
        chart = ChartMap(surface=s, base_point=np.array([0.0, 0.0, 1.0]),
                         center=np.zeros(2), eps=2.0)
        assert np.allclose(model_exp(chart, np.zeros(2)), chart.base_point)

    def test_sphere_quarter_point(self):
        s = SphereSurface(1.0)
        chart = ChartMap(surface=s, base_point=np.array([0.0, 0.0, 1.0]),
                         center=np.zeros(2), eps=2.0)
        v = np.array([math.pi / 2, 0.0])
        q = model_exp(chart, v)
        assert abs(q[2]) < 1e-12  # lands on the equator
        assert np.linalg.norm(model_log(chart, q) - v) < 1e-10

    def test_hyperbolic_round_trip(self, rng):
        h = HyperbolicSurface(1.0)
        chart = ChartMap(surface=h, base_point=h.base_point(),
                         center=np.zeros(2), eps=5.0)
        worst = 0.0
        for _ in range(1000):
            v = rng.normal(size=2)
            v *= rng.uniform(0, 3) / max(np.linalg.norm(v), 1e-12)
            worst = max(worst, float(np.linalg.norm(model_log(chart, model_exp(chart, v)) - v)))
        assert worst < 1e-9

    def test_exp_rejects_injectivity_violation(self):
        s = SphereSurface(1.0)
        chart = ChartMap(surface=s, base_point=np.array([0.0, 0.0, 1.0]),
                         center=np.zeros(2), eps=3.0)
        with pytest.raises(DomainError):
            model_exp(chart, np.array([math.pi + 0.1, 0.0]))

    def test_pushforward_single_chart_isometric_at_base(self):
        s = SphereSurface(1.0)
        p = np.array([0.0, 0.0, 1.0])
        chart = ChartMap(surface=s, base_point=p, center=np.array([5.0, 5.0]), eps=1.0)
        mu = MeasureApprox(np.array([p]), np.array([1.0]))
        out = chart_pushforward(mu, [chart])
        assert np.allclose(out.atoms[0], [5.0, 5.0])

    def test_pushforward_two_charts_split_mass(self):
        s = SphereSurface(1.0)
        p1 = np.array([0.0, 0.0, 1.0])
        p2 = np.array([1.0, 0.0, 0.0])
        charts = [
            ChartMap(surface=s, base_point=p1, center=np.array([0.0, 0.0]), eps=0.5),
            ChartMap(surface=s, base_point=p2, center=np.array([10.0, 0.0]), eps=0.5),
        ]
        pts = np.array([p1, p2, p2])
        mu = MeasureApprox(pts, np.array([0.5, 0.25, 0.25]))
        out = chart_pushforward(mu, charts)
        near_first = np.linalg.norm(out.atoms - np.array([0.0, 0.0]), axis=1) < 1.0
        assert out.weights[near_first].sum() == pytest.approx(0.5)
        assert out.weights.sum() == mu.weights.sum()

    def test_pushforward_uncovered_atom(self):
        s = SphereSurface(1.0)
        chart = ChartMap(surface=s, base_point=np.array([0.0, 0.0, 1.0]),
                         center=np.zeros(2), eps=0.1)
        mu = MeasureApprox(np.array([[1.0, 0.0, 0.0]]), np.array([1.0]))
        with pytest.raises(CoverageError):
            chart_pushforward(mu, [chart])

    def test_great_circle_dimension_preserved(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            mu = discretize(cantor_system(), 8, "left_endpoint")
        t = mu.atoms[:, 0]
        pts = np.column_stack([np.sin(t), np.zeros_like(t), np.cos(t)])
        sphere = SphereSurface(1.0)
        mu_s = MeasureApprox(pts, mu.weights.copy(), level=8, resolution=mu.resolution)
        chart = ChartMap(surface=sphere, base_point=np.array([0.0, 0.0, 1.0]),
                         center=np.zeros(2), eps=1.2)
        ladder = np.array([3.0**-j for j in range(1, 6)])
        intrinsic = estimate_linf_dim(
            ball_profile(mu_s, ladder, metric=lambda X, c: sphere.distance(X, c))
        )
        image = estimate_linf_dim(ball_profile(chart_pushforward(mu_s, [chart]), ladder))
        assert abs(intrinsic.slope - image.slope) < 0.05
