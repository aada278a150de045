import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kreinfeller.errors import (
    BudgetExceeded,
    InvalidWord,
    MissingOscSet,
    ValidationError,
)
from kreinfeller.ifs import (
    Conformal1D,
    IFSystem,
    MeasureApprox,
    Similitude,
    attractor_cover,
    ball_mass,
    cantor_system,
    compose_word,
    discretize,
    pushforward,
)


class TestContractionMaps:
    def test_similitude_scales_distances_exactly(self, rng):
        theta = 0.7
        Q = np.array([[math.cos(theta), -math.sin(theta)],
                      [math.sin(theta), math.cos(theta)]])
        S = Similitude(0.4, np.array([0.3, -0.1]), rotation=Q)
        x = rng.normal(size=(50, 2))
        y = rng.normal(size=(50, 2))
        d0 = np.linalg.norm(x - y, axis=1)
        d1 = np.linalg.norm(S(x) - S(y), axis=1)
        assert np.all(np.abs(d1 - 0.4 * d0) <= 1e-12 * np.maximum(d0, 1.0))

    def test_similitude_rejects_bad_ratio_and_rotation(self):
        with pytest.raises(ValidationError):
            Similitude(1.2, np.array([0.0]))
        with pytest.raises(ValidationError):
            Similitude(0.5, np.zeros(2), rotation=np.array([[1.0, 0.1], [0.0, 1.0]]))

    def test_conformal_mobius_bounds(self):
        # x -> 1/(x+2) on [0,1]: |S'| = 1/(x+2)^2 in [1/9, 1/4]
        S = Conformal1D("mobius", {"a": 0, "b": 1, "c": 1, "d": 2},
                        domain=(0.0, 1.0), deriv_lo=1 / 9, deriv_hi=1 / 4)
        assert S(0.0) == 0.5 and S(1.0) == pytest.approx(1 / 3)
        assert S.contraction_norm == 1 / 4
        assert S.deriv_sup() == pytest.approx(1 / 4, rel=1e-4)

    def test_conformal_rejects_wrong_bounds(self):
        with pytest.raises(ValidationError):
            Conformal1D("mobius", {"a": 0, "b": 1, "c": 1, "d": 2},
                        domain=(0.0, 1.0), deriv_lo=0.2, deriv_hi=0.24)


class TestIFSystem:
    def test_weight_validation(self):
        maps = [Similitude(1 / 3, np.array([0.0])), Similitude(1 / 3, np.array([2 / 3]))]
        with pytest.raises(ValidationError):
            IFSystem(maps=maps, weights=np.array([0.5, 0.4]), ambient_dim=1)
        with pytest.raises(ValidationError):
            IFSystem(maps=maps, weights=np.array([1.0, 0.0]), ambient_dim=1)

    def test_osc_heuristics_pass_for_cantor(self, cantor):
        report = cantor.verify_osc(samples=2000, seed=1)
        assert report["boxes_contained"] and report["boxes_disjoint"]
        assert report["samples_contained"]

    def test_json_round_trip(self, cantor):
        doc = cantor.to_json()
        back = IFSystem.from_json(doc)
        assert back.map_count == 2
        assert np.allclose(back.weights, cantor.weights)
        assert np.allclose(back.osc_set, cantor.osc_set)

    def test_json_conformal_and_rotation(self):
        doc = {
            "n": 1,
            "maps": [
                {"kind": "conformal1d", "expr": "mobius",
                 "params": {"a": 0, "b": 1, "c": 1, "d": 2},
                 "deriv_lo": 1 / 9, "deriv_hi": 1 / 4, "gamma": 0.5},
                {"kind": "similitude", "ratio": 0.25, "translation": [0.7]},
            ],
            "weights": [0.5, 0.5],
            "osc_set": {"box": [[0.0, 1.0]]},
        }
        ifs = IFSystem.from_json(doc)
        assert isinstance(ifs.maps[0], Conformal1D)
        assert ifs.maps[0].domain == (0.0, 1.0)  # defaults to the OSC interval
        assert np.allclose(ifs.contraction_norms(), [0.25, 0.25])
        back = IFSystem.from_json(ifs.to_json())
        assert back.maps[0].expr == "mobius"

        rot = {
            "n": 2,
            "maps": [
                {"kind": "similitude", "ratio": 0.5, "translation": [0.0, 0.0],
                 "rotation": [[0.0, -1.0], [1.0, 0.0]]},
                {"kind": "similitude", "ratio": 0.5, "translation": [0.5, 0.5]},
            ],
            "weights": [0.5, 0.5],
        }
        ifs2 = IFSystem.from_json(rot)
        assert np.allclose(ifs2.maps[0]([1.0, 0.0]), [0.0, 0.5])


class TestComposeWord:
    def test_cantor_pair(self, cantor):
        comp = compose_word(cantor, (1, 2))
        assert comp.mass == 0.25
        assert comp.ratio_bound == pytest.approx(1 / 9)

    def test_empty_word_is_identity(self, cantor):
        comp = compose_word(cantor, ())
        assert comp.mass == 1.0 and comp.ratio_bound == 1.0
        assert comp(0.37) == 0.37

    def test_triple_two_hand_composed(self, cantor):
        comp = compose_word(cantor, (2, 2, 2))
        assert comp.mass == pytest.approx(1 / 8)
        assert comp.ratio_bound == pytest.approx(1 / 27)
        assert comp(0.0) == pytest.approx(26 / 27)
        assert comp(1.0) == pytest.approx(1.0)

    def test_bad_letter(self, cantor):
        with pytest.raises(InvalidWord):
            compose_word(cantor, (1, 3))

    def test_fixed_point_of_word(self, cantor):
        # S1 o S2 (x) = x/9 + 2/9, fixed point 1/4
        comp = compose_word(cantor, (1, 2))
        assert comp.fixed_point() == pytest.approx(0.25, abs=1e-14)


class TestAttractorCover:
    def test_cantor_level1(self, cantor):
        cover = attractor_cover(cantor, 1)
        assert [w for w, _ in cover] == [(1,), (2,)]
        boxes = np.array([b.ravel() for _, b in cover])
        assert np.allclose(boxes, [[0, 1 / 3], [2 / 3, 1]])

    def test_cantor_level2_lengths(self, cantor):
        cover = attractor_cover(cantor, 2)
        assert len(cover) == 4
        for _, box in cover:
            assert box[0, 1] - box[0, 0] == pytest.approx(1 / 9)

    def test_planar_three_map_level1(self):
        half = 0.5
        maps = [Similitude(half, np.array(t)) for t in ([0.0, 0.0], [0.5, 0.0], [0.25, 0.5])]
        ifs = IFSystem(maps=maps, weights=np.ones(3) / 3, ambient_dim=2,
                       osc_set=np.array([[0.0, 1.0], [0.0, 1.0]]))
        cover = attractor_cover(ifs, 1)
        assert len(cover) == 3
        for _, box in cover:
            assert np.allclose(box[:, 1] - box[:, 0], 0.5)

    def test_requires_osc(self):
        maps = [Similitude(1 / 3, np.array([0.0])), Similitude(1 / 3, np.array([2 / 3]))]
        ifs = IFSystem(maps=maps, weights=np.array([0.5, 0.5]), ambient_dim=1)
        with pytest.raises(MissingOscSet):
            attractor_cover(ifs, 1)


class TestDiscretize:
    def test_level1_left_endpoint(self, cantor):
        mu = discretize(cantor, 1, "left_endpoint")
        assert np.allclose(np.sort(mu.atoms.ravel()), [0.0, 2 / 3])
        assert np.allclose(mu.weights, 0.5)

    def test_level2_left_endpoint(self, cantor):
        mu = discretize(cantor, 2, "left_endpoint")
        assert np.allclose(mu.atoms.ravel(), [0.0, 2 / 9, 2 / 3, 8 / 9])
        assert np.allclose(mu.weights, 0.25)

    def test_level2_skewed_weights(self):
        mu = discretize(cantor_system(p1=1 / 3), 2, "left_endpoint")
        assert np.allclose(mu.weights, [1 / 9, 2 / 9, 2 / 9, 4 / 9])

    def test_level0_single_atom(self, cantor):
        mu = discretize(cantor, 0)
        assert mu.atom_count == 1 and mu.weights[0] == 1.0

    def test_budget(self, cantor):
        with pytest.raises(BudgetExceeded):
            discretize(cantor, 40, max_atoms=10**6)

    def test_pushforward_recursion_bit_identical(self, cantor):
        for rep in ("left_endpoint", "centroid"):
            prev = discretize(cantor, 4, rep)
            cur = discretize(cantor, 5, rep)
            pushed = pushforward(cantor, prev)
            assert np.array_equal(pushed.atoms, cur.atoms)
            assert np.array_equal(pushed.weights, cur.weights)

    def test_fixed_point_recursion_within_cylinder(self, cantor):
        prev = discretize(cantor, 4)
        cur = discretize(cantor, 5)
        pushed = pushforward(cantor, prev)
        # fixed points are not map images of coarser fixed points, but both
        # live in the same cylinder
        dev = np.abs(np.sort(pushed.atoms.ravel()) - np.sort(cur.atoms.ravel())).max()
        assert dev <= cur.resolution

    def test_pruning_reports_dropped_mass(self):
        ifs = cantor_system(p1=0.05)
        mu = discretize(ifs, 4, prune_below=1e-3)
        assert mu.dropped_mass > 0
        assert mu.weights.sum() + mu.dropped_mass == pytest.approx(1.0, abs=1e-12)

    def test_weight_conservation_all_levels(self, cantor):
        for lvl in range(7):
            mu = discretize(cantor, lvl)
            assert abs(mu.weights.sum() - 1.0) <= 1e-12
            assert mu.atom_count == 2**lvl


class TestBallMass:
    def test_cantor_corner(self, cantor):
        mu = discretize(cantor, 2)
        assert ball_mass(mu, [0.0], 0.1) == pytest.approx(0.25)

    def test_full_mass(self, cantor_mu8):
        assert ball_mass(cantor_mu8, [0.5], 2.0) == pytest.approx(1.0, abs=1e-12)

    def test_gap(self, cantor):
        mu = discretize(cantor, 2)
        assert ball_mass(mu, [0.5], 0.2) == 0.0

    def test_cylinder_mass_at_half_gap(self, cantor):
        # at level m the minimal gap is 3^-m; half of it isolates one cylinder
        m = 5
        mu = discretize(cantor, m)
        r = 0.5 * 3.0**-m
        masses = [ball_mass(mu, mu.atoms[i], r) for i in range(0, mu.atom_count, 7)]
        assert all(mm == pytest.approx(2.0**-m) for mm in masses)

    def test_rejects_nonpositive_radius(self, cantor_mu8):
        with pytest.raises(ValidationError):
            ball_mass(cantor_mu8, [0.0], 0.0)


@settings(max_examples=60, deadline=None)
@given(
    r1=st.floats(0.01, 1.0),
    r2=st.floats(0.01, 1.0),
    center=st.floats(-0.5, 1.5),
)
def test_ball_mass_monotone_in_radius(r1, r2, center):
    mu = discretize(cantor_system(), 6)
    lo, hi = sorted((r1, r2))
    assert ball_mass(mu, [center], lo) <= ball_mass(mu, [center], hi)


@settings(max_examples=40, deadline=None)
@given(p1=st.floats(0.05, 0.95), level=st.integers(0, 7))
def test_weights_sum_to_one(p1, level):
    mu = discretize(cantor_system(p1=p1), level)
    assert abs(mu.weights.sum() - 1.0) <= 1e-12


class TestMeasureApproxIO:
    def test_csv_round_trip(self, tmp_path, cantor):
        mu = discretize(cantor, 4)
        path = tmp_path / "atoms.csv"
        mu.to_csv(path)
        back = MeasureApprox.from_csv(path, resolution=mu.resolution)
        assert np.array_equal(back.atoms, mu.atoms)
        assert np.array_equal(back.weights, mu.weights)
        assert back.level == 4

    def test_embedded_padding(self, cantor):
        mu = discretize(cantor, 3)
        mu3 = mu.embedded(3)
        assert mu3.dim == 3
        assert np.all(mu3.atoms[:, 1:] == 0.0)
        assert np.array_equal(mu3.weights, mu.weights)

    def test_lebesgue_proxy_masses(self):
        mu = MeasureApprox.lebesgue_proxy_1d(128)
        assert mu.weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert ball_mass(mu, [0.5], 0.25) == pytest.approx(0.5, abs=0.02)
