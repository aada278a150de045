"""Cross-module randomized properties (hypothesis)."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from kreinfeller.dimension import BallProfile, estimate_linf_dim
from kreinfeller.embedding import small_scale_functional
from kreinfeller.galerkin import discrete_string_oracle
from kreinfeller.geometry import ModelSpace, annulus_chord, hinge_third_side
from kreinfeller.ifs import (
    Conformal1D,
    IFSystem,
    MeasureApprox,
    compose_word,
    discretize,
)


@settings(max_examples=100, deadline=None)
@given(s=st.floats(0.1, 2.5), q=st.floats(2.1, 6.0))
def test_functional_exponent_law_n3(s, q):
    # exactly upper-s-regular profile: the functional is the pure power law
    r = np.geomspace(0.3, 1e-4, 50)
    g = small_scale_functional(r, r**s, q, 3)
    slope = np.polyfit(np.log(r), np.log(g), 1)[0]
    assert slope == pytest.approx(-0.5 + s / q, abs=0.02)


@settings(max_examples=60, deadline=None)
@given(s=st.floats(0.1, 2.5), q=st.floats(2.1, 6.0))
def test_functional_decays_for_regular_profiles_n2(s, q):
    # the n=2 form carries a |ln r|^(1/2) factor: decay (not the slope value)
    # is the invariant content, and it only becomes visible on a float-sized
    # range once the power part has some margin over the log factor
    assume(s / q >= 0.3)
    r = np.geomspace(0.3, 1e-8, 50)
    g = small_scale_functional(r, r**s, q, 2)
    assert g[-1] < g[0]
    assert np.polyfit(np.log(r), np.log(g), 1)[0] > 0


@settings(max_examples=100, deadline=None)
@given(
    exponent=st.floats(0.2, 1.8),
    r_max=st.floats(0.05, 0.5),
    factor=st.floats(0.2, 0.7),
)
def test_estimator_recovers_power_laws(exponent, r_max, factor):
    radii = r_max * factor ** np.arange(8)
    prof = BallProfile(radii, np.minimum(radii**exponent, 1.0), ambient_dim=2)
    assume(prof.sup_mass[0] < 1.0)  # keep away from the clipped regime
    est = estimate_linf_dim(prof)
    assert est.lower == pytest.approx(exponent, abs=1e-9)
    assert est.upper == pytest.approx(exponent, abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(
    rho=st.floats(0.2, 3.0),
    frac=st.floats(0.01, 0.99),
    lam_frac=st.floats(0.0, 1.0),
)
def test_flat_chord_bracket_everywhere(rho, frac, lam_frac):
    delta = frac * math.pi * rho / 4.0
    lam = lam_frac * 2.0 * delta
    v = annulus_chord("flat", rho, 1.0, delta, lam)
    assert 2.0 * delta - 1e-12 <= v <= 8.0 * delta + 1e-12


@settings(max_examples=60, deadline=None)
@given(
    positions=st.lists(st.floats(0.02, 0.98), min_size=2, max_size=12, unique=True),
    seed=st.integers(0, 10_000),
)
def test_string_spectrum_positive_and_sorted(positions, seed):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.1, 1.0, size=len(positions))
    mu = MeasureApprox(np.array(sorted(positions)), w / w.sum())
    spec = discrete_string_oracle(mu)
    assert spec.eigenvalues[0] > 0
    assert np.all(np.diff(spec.eigenvalues) >= -1e-9)
    assert spec.count == len(positions)


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(0.0, 2.0),
    b=st.floats(0.0, 2.0),
    alpha=st.floats(0.0, math.pi),
    R=st.floats(0.5, 20.0),
)
def test_hinge_symmetry_and_monotonicity(a, b, alpha, R):
    hyp = ModelSpace("hyperbolic", R)
    assert hinge_third_side(hyp, a, b, alpha) == pytest.approx(
        hinge_third_side(hyp, b, a, alpha), rel=1e-12, abs=1e-13
    )
    # third side grows with the opening angle
    smaller = hinge_third_side(hyp, a, b, alpha * 0.5)
    assert smaller <= hinge_third_side(hyp, a, b, alpha) + 1e-12


class TestConformalPipeline:
    """End-to-end checks on a genuine self-conformal (Moebius) system."""

    @pytest.fixture
    def gauss_like(self):
        maps = [
            Conformal1D("mobius", {"a": 0, "b": 1, "c": 1, "d": 2},
                        domain=(0.0, 1.0), deriv_lo=1 / 9, deriv_hi=1 / 4),
            Conformal1D("mobius", {"a": 0, "b": 1, "c": 1, "d": 3},
                        domain=(0.0, 1.0), deriv_lo=1 / 16, deriv_hi=1 / 9),
        ]
        return IFSystem(maps=maps, weights=np.array([0.6, 0.4]), ambient_dim=1,
                        osc_set=np.array([[0.0, 1.0]]))

    def test_compose_uses_deriv_hi_product(self, gauss_like):
        comp = compose_word(gauss_like, (1, 2))
        assert comp.mass == pytest.approx(0.24)
        assert comp.ratio_bound == pytest.approx(1 / 36)

    def test_discretize_and_mass(self, gauss_like):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            mu = discretize(gauss_like, 6)
        assert mu.atom_count == 64
        assert mu.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all((mu.atoms > 0.2) & (mu.atoms < 0.55))

    def test_fixed_points_are_map_fixed_points(self, gauss_like):
        # fix(1/(x+2)) = sqrt(2) - 1
        comp = compose_word(gauss_like, (1,))
        assert comp.fixed_point(seed=0.5) == pytest.approx(math.sqrt(2) - 1, abs=1e-12)

    def test_spectrum_runs_on_conformal_measure(self, gauss_like):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            mu = discretize(gauss_like, 6)
        spec = discrete_string_oracle(mu, 5)
        assert spec.eigenvalues[0] > 0

    def test_dim_bounds_order(self, gauss_like):
        from kreinfeller.dimension import selfsimilar_dim_bounds

        lo, hi = selfsimilar_dim_bounds(gauss_like)
        assert 0 < lo <= hi
