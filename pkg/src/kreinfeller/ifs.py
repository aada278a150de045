"""Iterated function systems and atomic approximations of their invariant measures.

An :class:`IFSystem` bundles contraction maps (similitudes in dimension 1..3,
or strictly monotone conformal maps on an interval) with a probability vector.
:func:`discretize` unrolls the invariance identity mu = sum_i p_i mu o S_i^{-1}
to a chosen level, producing a :class:`MeasureApprox`: one weighted atom per
cylinder word, with the exact cylinder mass p_tau.  Everything downstream
(dimension estimation, embedding criteria, Galerkin spectra) consumes
MeasureApprox, so it also has synthetic constructors and CSV serialization.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    EmptyMeasure,
    InvalidWord,
    MissingOscSet,
    OscWarning,
    ValidationError,
)

Word = tuple[int, ...]

_ORTHO_TOL = 1e-12
_WEIGHT_TOL = 1e-14
_MASS_TOL = 1e-12


# --------------------------------------------------------------------------
# contraction maps
# --------------------------------------------------------------------------

@dataclass(eq=False)
class Similitude:
    """Affine contraction x -> ratio * Q x + t with Q orthogonal.

    Distances scale exactly by ``ratio``: d(Sx, Sy) = ratio * d(x, y).
    """

    ratio: float
    translation: np.ndarray
    rotation: np.ndarray | None = None

    def __post_init__(self):
        self.translation = np.atleast_1d(np.asarray(self.translation, dtype=float))
        if not 0.0 < self.ratio < 1.0:
            raise ValidationError(f"similitude ratio must be in (0,1), got {self.ratio}")
        n = self.translation.size
        if self.rotation is not None:
            self.rotation = np.asarray(self.rotation, dtype=float)
            if self.rotation.shape != (n, n):
                raise ValidationError("rotation shape does not match translation")
            defect = np.abs(self.rotation @ self.rotation.T - np.eye(n)).max()
            if defect > _ORTHO_TOL:
                raise ValidationError(f"rotation is not orthogonal (defect {defect:.2e})")

    @property
    def dim(self) -> int:
        return self.translation.size

    @property
    def contraction_norm(self) -> float:
        return self.ratio

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.rotation is None:
            return self.ratio * x + self.translation
        return self.ratio * (x @ self.rotation.T) + self.translation

    def as_affine(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (A, b) with S(x) = A x + b."""
        A = self.ratio * (np.eye(self.dim) if self.rotation is None else self.rotation)
        return A, self.translation.copy()


def _builtin_affine(p):
    a, b = float(p["a"]), float(p["b"])
    return (lambda x: a * x + b), (lambda x: np.full_like(np.asarray(x, float), a))


def _builtin_mobius(p):
    a, b, c, d = (float(p[k]) for k in "abcd")
    det = a * d - b * c
    return (lambda x: (a * x + b) / (c * x + d)), (lambda x: det / (c * x + d) ** 2)


def _builtin_quadratic(p):
    a, b, c = float(p["a"]), float(p["b"]), float(p["c"])
    return (lambda x: (a * x + b) * x + c), (lambda x: 2.0 * a * x + b)


#: named 1D conformal map families admissible in IFS JSON documents
CONFORMAL_BUILTINS: dict[str, Callable] = {
    "affine": _builtin_affine,
    "mobius": _builtin_mobius,
    "quadratic": _builtin_quadratic,
}


@dataclass(eq=False)
class Conformal1D:
    """Strictly monotone C^1 contraction on an interval.

    ``expr`` names a builtin family from :data:`CONFORMAL_BUILTINS`; the
    derivative magnitude must satisfy 0 < deriv_lo <= |S'(x)| <= deriv_hi < 1
    on ``domain`` (verified on a sampling grid).  ``holder_gamma`` records the
    derivative's Holder exponent; it is carried as metadata only.
    """

    expr: str
    params: dict
    domain: tuple[float, float]
    deriv_lo: float
    deriv_hi: float
    holder_gamma: float = 0.5
    _grid_points: int = 1025

    def __post_init__(self):
        if self.expr not in CONFORMAL_BUILTINS:
            raise ValidationError(f"unknown conformal builtin {self.expr!r}")
        if not 0.0 < self.deriv_lo <= self.deriv_hi < 1.0:
            raise ValidationError("need 0 < deriv_lo <= deriv_hi < 1")
        if not 0.0 < self.holder_gamma < 1.0:
            raise ValidationError("Holder exponent must lie in (0,1)")
        a, b = self.domain
        if not a < b:
            raise ValidationError("degenerate domain interval")
        self._f, self._df = CONFORMAL_BUILTINS[self.expr](self.params)
        xs = np.linspace(a, b, self._grid_points)
        d = self._df(xs)
        if np.any(np.sign(d) != np.sign(d[0])) or d[0] == 0.0:
            raise ValidationError("map is not strictly monotone on its domain")
        mags = np.abs(d)
        if mags.min() < self.deriv_lo - 1e-12 or mags.max() > self.deriv_hi + 1e-12:
            raise ValidationError(
                f"|S'| range [{mags.min():.6g}, {mags.max():.6g}] escapes declared "
                f"bounds [{self.deriv_lo}, {self.deriv_hi}]"
            )

    @property
    def dim(self) -> int:
        return 1

    @property
    def contraction_norm(self) -> float:
        # declared upper bound on |S'|; see deriv_sup for a grid-refined value
        return self.deriv_hi

    def __call__(self, x):
        return self._f(np.asarray(x, dtype=float))

    def deriv(self, x):
        return self._df(np.asarray(x, dtype=float))

    def deriv_sup(self, points: int = 1024) -> float:
        """Grid approximation of sup |S'| over the domain interval."""
        xs = np.linspace(*self.domain, points)
        return float(np.abs(self._df(xs)).max())


ContractionMap = Similitude | Conformal1D


# --------------------------------------------------------------------------
# systems
# --------------------------------------------------------------------------

@dataclass(eq=False)
class IFSystem:
    """A finite family of contractions with a probability vector.

    ``osc_set`` is an axis-aligned box (rows of (lo, hi) per coordinate)
    declared by the user as an open-set-condition set; it is verified only
    heuristically (:meth:`verify_osc`) since exact verification is not
    decidable for general conformal maps.
    """

    maps: list
    weights: np.ndarray
    ambient_dim: int
    osc_set: np.ndarray | None = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.maps) < 2:
            raise ValidationError("need at least two maps")
        if self.weights.shape != (len(self.maps),):
            raise ValidationError("weights length must match map count")
        if np.any(self.weights <= 0.0):
            raise ValidationError("weights must be positive")
        if abs(self.weights.sum() - 1.0) > _WEIGHT_TOL:
            raise ValidationError("weights must sum to 1")
        if self.ambient_dim not in (1, 2, 3):
            raise ValidationError("ambient dimension must be 1, 2, or 3")
        for S in self.maps:
            if S.dim != self.ambient_dim:
                raise ValidationError("map dimension does not match ambient_dim")
            if isinstance(S, Conformal1D) and self.ambient_dim != 1:
                raise ValidationError("conformal maps are supported in dimension 1 only")
        if self.osc_set is not None:
            self.osc_set = np.asarray(self.osc_set, dtype=float).reshape(self.ambient_dim, 2)
            if np.any(self.osc_set[:, 0] >= self.osc_set[:, 1]):
                raise ValidationError("osc_set box is degenerate")

    @property
    def map_count(self) -> int:
        return len(self.maps)

    @property
    def osc_declared(self) -> bool:
        return self.osc_set is not None

    @property
    def is_affine(self) -> bool:
        return all(isinstance(S, Similitude) for S in self.maps)

    def contraction_norms(self) -> np.ndarray:
        """Per-map contraction scalar: ratio for similitudes, deriv_hi for conformal."""
        return np.array([S.contraction_norm for S in self.maps])

    def osc_diameter(self) -> float:
        if self.osc_set is None:
            raise MissingOscSet("no OSC set declared")
        return float(np.linalg.norm(self.osc_set[:, 1] - self.osc_set[:, 0]))

    def verify_osc(self, samples: int = 10_000, seed: int = 0) -> dict:
        """Heuristic OSC check: bounding boxes plus sampled points.

        Never raises on failure; emits :class:`OscWarning` and returns a report.
        """
        if self.osc_set is None:
            raise MissingOscSet("no OSC set declared")
        boxes = [_image_box(S, self.osc_set) for S in self.maps]
        lo, hi = self.osc_set[:, 0], self.osc_set[:, 1]
        contained = all(
            np.all(b[:, 0] >= lo - 1e-12) and np.all(b[:, 1] <= hi + 1e-12) for b in boxes
        )
        disjoint = True
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                overlap = np.minimum(boxes[i][:, 1], boxes[j][:, 1]) - np.maximum(
                    boxes[i][:, 0], boxes[j][:, 0]
                )
                if np.all(overlap > 1e-12):
                    disjoint = False
        rng = np.random.default_rng(seed)
        pts = lo + (hi - lo) * rng.random((samples, self.ambient_dim))
        if self.ambient_dim == 1:
            pts = pts[:, 0]
        inside = True
        for S in self.maps:
            img = np.atleast_1d(S(pts))
            img2 = img.reshape(samples, -1)
            if np.any(img2 < lo - 1e-12) or np.any(img2 > hi + 1e-12):
                inside = False
        report = {
            "boxes_contained": bool(contained),
            "boxes_disjoint": bool(disjoint),
            "samples_contained": bool(inside),
            "samples": samples,
        }
        if not (contained and disjoint and inside):
            warnings.warn(f"OSC heuristics failed: {report}", OscWarning, stacklevel=2)
        return report

    # -- JSON interchange ---------------------------------------------------

    @classmethod
    def from_json(cls, doc: dict | str) -> "IFSystem":
        """Build a system from the JSON interchange document."""
        if isinstance(doc, str):
            doc = json.loads(doc)
        n = int(doc["n"])
        maps = []
        for m in doc["maps"]:
            kind = m["kind"]
            if kind == "similitude":
                maps.append(
                    Similitude(
                        ratio=float(m["ratio"]),
                        translation=np.asarray(m["translation"], dtype=float),
                        rotation=None if m.get("rotation") is None else np.asarray(m["rotation"], float),
                    )
                )
            elif kind == "conformal1d":
                p = dict(m["params"])
                maps.append(
                    Conformal1D(
                        expr=m["expr"],
                        params=p,
                        domain=tuple(m.get("domain", doc.get("osc_set", {}).get("box", [[0, 1]])[0])),
                        deriv_lo=float(m["deriv_lo"]),
                        deriv_hi=float(m["deriv_hi"]),
                        holder_gamma=float(m.get("gamma", 0.5)),
                    )
                )
            else:
                raise ValidationError(f"unknown map kind {kind!r}")
        osc = doc.get("osc_set")
        box = None if osc is None else np.asarray(osc["box"], dtype=float)
        return cls(maps=maps, weights=np.asarray(doc["weights"], float), ambient_dim=n, osc_set=box)

    def to_json(self) -> dict:
        out_maps = []
        for S in self.maps:
            if isinstance(S, Similitude):
                entry = {"kind": "similitude", "ratio": S.ratio, "translation": S.translation.tolist()}
                if S.rotation is not None:
                    entry["rotation"] = S.rotation.tolist()
            else:
                entry = {
                    "kind": "conformal1d",
                    "expr": S.expr,
                    "params": S.params,
                    "domain": list(S.domain),
                    "deriv_lo": S.deriv_lo,
                    "deriv_hi": S.deriv_hi,
                    "gamma": S.holder_gamma,
                }
            out_maps.append(entry)
        doc = {"n": self.ambient_dim, "maps": out_maps, "weights": self.weights.tolist()}
        if self.osc_set is not None:
            doc["osc_set"] = {"box": self.osc_set.tolist()}
        return doc


def cantor_system(p1: float = 0.5) -> IFSystem:
    """The middle-third system {x/3, x/3 + 2/3} with weights (p1, 1-p1)."""
    return IFSystem(
        maps=[
            Similitude(1 / 3, np.array([0.0])),
            Similitude(1 / 3, np.array([2 / 3])),
        ],
        weights=np.array([p1, 1.0 - p1]),
        ambient_dim=1,
        osc_set=np.array([[0.0, 1.0]]),
    )


# --------------------------------------------------------------------------
# words and composition
# --------------------------------------------------------------------------

def _check_word(ifs: IFSystem, word: Sequence[int]) -> Word:
    w = tuple(int(i) for i in word)
    for letter in w:
        if not 1 <= letter <= ifs.map_count:
            raise InvalidWord(f"letter {letter} outside 1..{ifs.map_count}")
    return w


@dataclass(eq=False)
class ComposedMap:
    """S_tau = S_{i1} o ... o S_{ik} together with its mass and contraction bound."""

    word: Word
    evaluate: Callable
    mass: float
    ratio_bound: float
    affine: tuple[np.ndarray, np.ndarray] | None = None

    def __call__(self, x):
        return self.evaluate(x)

    def fixed_point(self, seed=None, tol: float = 1e-14, max_iter: int = 100_000) -> np.ndarray:
        """Unique fixed point of S_tau.

        Affine words are solved exactly via (I - A) x = b; otherwise iterate
        from ``seed`` until the step is below ``tol``.
        """
        if self.affine is not None:
            A, b = self.affine
            return np.linalg.solve(np.eye(A.shape[0]) - A, b)
        x = np.asarray(0.0 if seed is None else seed, dtype=float)
        for _ in range(max_iter):
            x_next = np.asarray(self.evaluate(x), dtype=float)
            if np.max(np.abs(x_next - x)) <= tol:
                return x_next
            x = x_next
        return x


def compose_word(ifs: IFSystem, word: Sequence[int]) -> ComposedMap:
    """Compose the maps along ``word``; empty word yields the identity.

    mass is the exact product of the weights; ratio_bound the product of the
    per-map contraction scalars (an upper bound on the composed contraction).
    """
    w = _check_word(ifs, word)
    mass = 1.0
    ratio = 1.0
    for letter in w:
        mass *= float(ifs.weights[letter - 1])
        ratio *= ifs.maps[letter - 1].contraction_norm
    if ifs.is_affine:
        n = ifs.ambient_dim
        A = np.eye(n)
        b = np.zeros(n)
        # S_w = S_{i1} o ... o S_{ik}: fold from the right
        for letter in reversed(w):
            Ai, bi = ifs.maps[letter - 1].as_affine()
            A = Ai @ A
            b = Ai @ b + bi
        if n == 1:
            def evaluate(x, A=A, b=b):
                return A[0, 0] * np.asarray(x, float) + b[0]
        else:
            def evaluate(x, A=A, b=b):
                return np.asarray(x, float) @ A.T + b
        return ComposedMap(w, evaluate, mass, ratio, affine=(A, b))

    def evaluate(x):
        y = np.asarray(x, dtype=float)
        for letter in reversed(w):
            y = ifs.maps[letter - 1](y)
        return y

    return ComposedMap(w, evaluate, mass, ratio)


def attractor_cover(ifs: IFSystem, level: int) -> list[tuple[Word, np.ndarray]]:
    """Bounding boxes of S_tau(U) over all words of the given length.

    The union of the returned boxes covers the attractor; box diameters are
    at most diam(U) times the largest level-``level`` ratio bound.
    """
    if not ifs.osc_declared:
        raise MissingOscSet("attractor_cover requires a declared OSC set")
    out = []
    for word in itertools.product(range(1, ifs.map_count + 1), repeat=level):
        comp = compose_word(ifs, word)
        out.append((word, _composed_image_box(ifs, comp)))
    return out


def _image_box(S, box: np.ndarray) -> np.ndarray:
    """Axis-aligned bounding box of S(box)."""
    if isinstance(S, Conformal1D):
        ends = np.sort(S(box[0]))
        return ends.reshape(1, 2)
    corners = np.array(list(itertools.product(*box)))
    img = np.atleast_2d(S(corners if S.dim > 1 else corners[:, 0]))
    img = img.reshape(len(corners), -1)
    return np.stack([img.min(axis=0), img.max(axis=0)], axis=1)


def _composed_image_box(ifs: IFSystem, comp: ComposedMap) -> np.ndarray:
    box = ifs.osc_set
    if comp.affine is not None:
        corners = np.array(list(itertools.product(*box)))
        img = comp(corners if ifs.ambient_dim > 1 else corners[:, 0]).reshape(len(corners), -1)
        return np.stack([img.min(axis=0), img.max(axis=0)], axis=1)
    ends = np.sort(np.atleast_1d(comp(box[0])))
    return ends.reshape(1, 2)


# --------------------------------------------------------------------------
# atomic measure approximations
# --------------------------------------------------------------------------

@dataclass(eq=False)
class MeasureApprox:
    """Atomic approximation of a probability measure on R^n.

    ``resolution`` bounds the diameter of the cylinder each atom represents
    (0 for synthetic/exact atomic measures).  Weights always sum to 1 within
    1e-12; mass removed by pruning is tracked in ``dropped_mass``.
    """

    atoms: np.ndarray
    weights: np.ndarray
    level: int | None = None
    resolution: float = 0.0
    dropped_mass: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.atoms = np.asarray(self.atoms, dtype=float)
        if self.atoms.ndim == 1:
            self.atoms = self.atoms[:, None]
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.atoms) != len(self.weights):
            raise ValidationError("atom/weight length mismatch")
        if len(self.atoms) == 0:
            raise EmptyMeasure("measure has no atoms")
        if np.any(self.weights <= 0.0):
            raise ValidationError("weights must be positive")
        total = self.weights.sum() + self.dropped_mass
        if abs(total - 1.0) > _MASS_TOL:
            raise ValidationError(f"weights (plus dropped mass) sum to {total!r}, not 1")

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @property
    def atom_count(self) -> int:
        return len(self.weights)

    def support_bounds(self) -> np.ndarray:
        return np.stack([self.atoms.min(axis=0), self.atoms.max(axis=0)], axis=1)

    def embedded(self, n: int) -> "MeasureApprox":
        """Embed into R^n (n >= dim) by zero-padding coordinates."""
        if n < self.dim:
            raise ValidationError("cannot embed into a lower dimension")
        padded = np.zeros((self.atom_count, n))
        padded[:, : self.dim] = self.atoms
        return MeasureApprox(padded, self.weights.copy(), level=self.level,
                             resolution=self.resolution, dropped_mass=self.dropped_mass,
                             meta=dict(self.meta))

    @classmethod
    def lebesgue_proxy_1d(cls, count: int, interval: tuple[float, float] = (0.0, 1.0)) -> "MeasureApprox":
        """Uniform weights at cell midpoints: an atomic stand-in for Lebesgue measure."""
        a, b = interval
        h = (b - a) / count
        mids = a + h * (np.arange(count) + 0.5)
        return cls(mids, np.full(count, 1.0 / count), resolution=h,
                   meta={"family": "lebesgue-proxy", "interval": [a, b]})

    @classmethod
    def lebesgue_proxy_2d(cls, count: int, box=((0.0, 1.0), (0.0, 1.0))) -> "MeasureApprox":
        (a, b), (c, d) = box
        hx, hy = (b - a) / count, (d - c) / count
        xs = a + hx * (np.arange(count) + 0.5)
        ys = c + hy * (np.arange(count) + 0.5)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        pts = np.column_stack([X.ravel(), Y.ravel()])
        w = np.full(count * count, 1.0 / (count * count))
        return cls(pts, w, resolution=float(np.hypot(hx, hy)),
                   meta={"family": "lebesgue-proxy", "box": [list(box[0]), list(box[1])]})

    @classmethod
    def point_mass(cls, position) -> "MeasureApprox":
        return cls(np.atleast_2d(np.asarray(position, float)), np.array([1.0]))

    # -- CSV interchange: columns level,word,x1..xn,weight -------------------

    def to_csv(self, path) -> None:
        words = self.meta.get("words")
        n = self.dim
        header = ["level", "word"] + [f"x{i + 1}" for i in range(n)] + ["weight"]
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(",".join(header) + "\n")
            lvl = "" if self.level is None else str(self.level)
            for i in range(self.atom_count):
                word = "" if words is None else "-".join(str(l) for l in words[i])
                coords = ",".join("%.17g" % v for v in self.atoms[i])
                f.write(f"{lvl},{word},{coords},{'%.17g' % self.weights[i]}\n")

    @classmethod
    def from_csv(cls, path, resolution: float = 0.0) -> "MeasureApprox":
        import csv as _csv

        with open(path, newline="", encoding="utf-8") as f:
            reader = _csv.reader(f)
            header = next(reader)
            ncols = len(header)
            n = ncols - 3
            rows = list(reader)
        if not rows:
            raise EmptyMeasure("CSV contains no atoms")
        level = rows[0][0]
        atoms = np.array([[float(v) for v in r[2 : 2 + n]] for r in rows])
        weights = np.array([float(r[-1]) for r in rows])
        words = [tuple(int(t) for t in r[1].split("-")) if r[1] else () for r in rows]
        meta = {"words": words} if any(words) else {}
        return cls(atoms, weights, level=int(level) if level else None,
                   resolution=resolution, meta=meta)


_REPRESENTATIVES = ("fixed_point", "left_endpoint", "centroid")


def discretize(
    ifs: IFSystem,
    level: int,
    representative: str = "fixed_point",
    *,
    max_atoms: int = 10_000_000,
    prune_below: float | None = None,
) -> MeasureApprox:
    """Level-``level`` unrolling of the invariance identity.

    One atom per cylinder word of the given length, carrying the exact mass
    p_tau.  Placement:

    * ``fixed_point`` -- the unique fixed point of S_tau (always in the
      attractor; affine words solved exactly, conformal words iterated to
      1e-14);
    * ``left_endpoint`` -- S_tau applied to the OSC box's min corner;
    * ``centroid`` -- S_tau applied to the OSC box's center.

    The last two are computed by recursive map application, so the level-m
    atom array is bit-identical to applying each S_i to the level-(m-1) array.
    """
    if representative not in _REPRESENTATIVES:
        raise ValidationError(f"representative must be one of {_REPRESENTATIVES}")
    m = ifs.map_count
    if level < 0:
        raise ValidationError("level must be nonnegative")
    if m**level > max_atoms:
        raise BudgetExceeded(f"{m}^{level} atoms exceed budget {max_atoms}")

    norms = ifs.contraction_norms()
    if ifs.osc_declared:
        base_diam = ifs.osc_diameter()
    else:
        # crude attractor bound from level-1 fixed points
        fps = np.array([compose_word(ifs, (i,)).fixed_point() for i in range(1, m + 1)])
        spread = float(np.max(np.linalg.norm(fps - fps[0], axis=-1))) if m > 1 else 1.0
        base_diam = spread / max(1.0 - norms.max(), 1e-12) if spread > 0 else 1.0
    resolution = base_diam * float(norms.max()) ** level

    if representative == "fixed_point":
        atoms = np.empty((m**level, ifs.ambient_dim))
        weights = np.empty(m**level)
        seed = None if not ifs.osc_declared else ifs.osc_set.mean(axis=1)
        if ifs.ambient_dim == 1 and seed is not None:
            seed = seed[0]
        if level == 0:
            # the empty word fixes every point; represent K by the OSC
            # centroid, or the first map's fixed point without one
            if ifs.osc_declared:
                atoms[0] = ifs.osc_set.mean(axis=1)
            else:
                atoms[0] = np.atleast_1d(compose_word(ifs, (1,)).fixed_point())
            weights[0] = 1.0
        for idx, word in enumerate(itertools.product(range(1, m + 1), repeat=level)):
            if level == 0:
                break
            comp = compose_word(ifs, word)
            atoms[idx] = np.atleast_1d(comp.fixed_point(seed=seed))
            weights[idx] = comp.mass
    else:
        if not ifs.osc_declared:
            raise MissingOscSet(f"{representative} placement requires an OSC set")
        if representative == "left_endpoint":
            x0 = ifs.osc_set[:, 0]
        else:
            x0 = ifs.osc_set.mean(axis=1)
        pts = x0[None, :]
        weights = np.array([1.0])
        for _ in range(level):
            if ifs.ambient_dim == 1:
                pts = np.concatenate([np.atleast_1d(S(pts[:, 0]))[:, None] for S in ifs.maps])
            else:
                pts = np.concatenate([S(pts) for S in ifs.maps])
            weights = np.concatenate([p * weights for p in ifs.weights])
        atoms = pts

    meta = {"representative": representative}
    if m**level <= 100_000:
        meta["words"] = list(itertools.product(range(1, m + 1), repeat=level))
    dropped = 0.0
    if prune_below is not None:
        keep = weights >= prune_below
        dropped = float(weights[~keep].sum())
        atoms, weights = atoms[keep], weights[keep]
        if "words" in meta:
            meta["words"] = [w for w, k in zip(meta["words"], keep) if k]
        meta["prune_below"] = prune_below
    return MeasureApprox(atoms, weights, level=level, resolution=resolution,
                         dropped_mass=dropped, meta=meta)


def pushforward(ifs: IFSystem, mu: MeasureApprox) -> MeasureApprox:
    """sum_i p_i (S_i)_* mu: one level of the invariance identity.

    Atom ordering is lexicographic in the new leading letter, matching
    :func:`discretize`'s ordering exactly.
    """
    if ifs.ambient_dim == 1:
        pts = np.concatenate([np.atleast_1d(S(mu.atoms[:, 0]))[:, None] for S in ifs.maps])
    else:
        pts = np.concatenate([S(mu.atoms) for S in ifs.maps])
    weights = np.concatenate([p * mu.weights for p in ifs.weights])
    lvl = None if mu.level is None else mu.level + 1
    res = mu.resolution * float(ifs.contraction_norms().max())
    return MeasureApprox(pts, weights, level=lvl, resolution=res,
                         dropped_mass=mu.dropped_mass)


def ball_mass(mu: MeasureApprox, center, radius: float, metric=None) -> float:
    """Total weight of atoms within ``radius`` of ``center`` (closed ball).

    Exact for the atomic approximation; it approximates the true measure of
    the ball once radius >= 2 * mu.resolution.  ``metric(points, center)``
    overrides the Euclidean distance (used for geodesic balls on model
    surfaces).
    """
    if radius <= 0.0:
        raise ValidationError("radius must be positive")
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if metric is None:
        d = np.linalg.norm(mu.atoms - c[None, :], axis=1)
    else:
        d = np.asarray(metric(mu.atoms, c))
    return float(mu.weights[d <= radius].sum())
