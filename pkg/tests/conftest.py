import json
import warnings

import numpy as np
import pytest

from kreinfeller.errors import ReliabilityWarning
from kreinfeller.ifs import IFSystem, Similitude, cantor_system, discretize


@pytest.fixture
def cantor():
    return cantor_system()


@pytest.fixture
def cantor_mu8(cantor):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ReliabilityWarning)
        return discretize(cantor, 8)


@pytest.fixture
def cantor_mu8_left(cantor):
    return discretize(cantor, 8, "left_endpoint")


@pytest.fixture
def cantor_json(tmp_path):
    doc = {
        "n": 1,
        "maps": [
            {"kind": "similitude", "ratio": 1 / 3, "translation": [0.0]},
            {"kind": "similitude", "ratio": 1 / 3, "translation": [2 / 3]},
        ],
        "weights": [0.5, 0.5],
        "osc_set": {"box": [[0.0, 1.0]]},
    }
    path = tmp_path / "cantor.json"
    path.write_text(json.dumps(doc))
    return path


def random_similitude_ifs(rng, n_maps=None, equal_ratio=False):
    """Well-separated random 1D similitude system on (0,1).

    equal_ratio constrains all maps to one contraction ratio with images at
    the interval ends, so ball profiles on the matched geometric ladder scale
    exactly (the resolution-matched regime of the slope estimators).
    """
    if equal_ratio:
        r = rng.uniform(0.15, 0.32)
        maps = [Similitude(r, np.array([0.0])), Similitude(r, np.array([1.0 - r]))]
        w1 = rng.uniform(0.2, 0.8)
        return IFSystem(maps=maps, weights=np.array([w1, 1.0 - w1]), ambient_dim=1,
                        osc_set=np.array([[0.0, 1.0]]))
    m = n_maps or rng.integers(2, 5)
    ratios = rng.uniform(0.1, 0.9 / m, size=m)
    # pack images into disjoint slots of (0,1)
    starts = np.linspace(0.0, 1.0 - 1.0 / m, m) + rng.uniform(0, 0.02, size=m)
    maps = [Similitude(r, np.array([s])) for r, s in zip(ratios, starts)]
    w = rng.uniform(0.1, 1.0, size=m)
    w /= w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return IFSystem(maps=maps, weights=w, ambient_dim=1, osc_set=np.array([[0.0, 1.0]]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
