"""L-infinity dimension estimation and the equivalent-condition checks.

The lower/upper L-infinity dimensions of a measure are the liminf/limsup of
ln(sup_x mu(B(x, delta))) / ln(delta) as delta -> 0.  On finite data we report
windowed two-point slope extrema of the log-log ball profile as an honest
surrogate, plus the closed-form bounds available for self-similar and 1D
self-conformal measures:

    lower >= min_i ln(p_i)/ln(r_i),      upper <= max_i ln(p_i)/ln(|S_i'|).

The condition checks decide, for ambient dimension n:

    (C2)  Abar = max_i p_i r_i^{-(n-2)} < 1,
    (C3)  lower L-infinity dimension > n - 2,
    (C4)  upper s-regularity mu(B(x,r)) <= c r^s for some s > n - 2,

and the compactness threshold verdict compares the dimension estimate with
q(n-2)/2 (q = 2 is accepted as the sentinel for the base embedding regime).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    ConsistencyWarning,
    EmptyMeasure,
    ReliabilityWarning,
    ValidationError,
)
from .ifs import IFSystem, MeasureApprox

COMPACT = "Compact"
NOT_COMPACT = "NotCompact"
INCONCLUSIVE = "Inconclusive"

#: decision margin on threshold comparisons, to avoid flapping verdicts
THRESHOLD_MARGIN = 0.02


@dataclass(frozen=True)
class RadiusLadder:
    """Geometric radius ladder r_max * factor^k, k = 0..count-1 (factor < 1)."""

    r_max: float
    factor: float
    count: int

    def __post_init__(self):
        if self.r_max <= 0.0:
            raise ValidationError("r_max must be positive")
        if not 0.0 < self.factor < 1.0:
            raise ValidationError("ladder factor must lie in (0,1)")
        if self.count < 1:
            raise ValidationError("ladder needs at least one radius")

    def radii(self) -> np.ndarray:
        return self.r_max * self.factor ** np.arange(self.count)

    @classmethod
    def parse(cls, spec: str) -> "RadiusLadder":
        """Parse the CLI form 'rMax:factor:count'."""
        try:
            r, f, c = spec.split(":")
            return cls(float(r), float(f), int(c))
        except (ValueError, TypeError) as exc:
            raise ValidationError(f"bad ladder spec {spec!r}") from exc


@dataclass(eq=False)
class BallProfile:
    """sup_x mu(B(x, r)) sampled on a decreasing radius ladder."""

    radii: np.ndarray
    sup_mass: np.ndarray
    ambient_dim: int
    resolution: float = 0.0
    reliable: bool = True
    centers: dict = field(default_factory=dict)

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.sup_mass = np.asarray(self.sup_mass, dtype=float)
        if np.any(np.diff(self.radii) >= 0):
            raise ValidationError("radii must be strictly decreasing")
        if np.any(self.sup_mass <= 0.0) or np.any(self.sup_mass > 1.0 + 1e-12):
            raise ValidationError("sup_mass values must lie in (0, 1]")
        if np.any(np.diff(self.sup_mass) > 1e-15):
            raise ValidationError("sup_mass must be non-increasing along the ladder")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("r,sup_mass\n")
            for r, s in zip(self.radii, self.sup_mass):
                f.write("%.17g,%.17g\n" % (r, s))


def ball_profile(
    mu: MeasureApprox,
    ladder: RadiusLadder | np.ndarray,
    *,
    metric=None,
    centers: np.ndarray | None = None,
    max_centers: int = 100_000,
    seed: int = 0,
) -> BallProfile:
    """Profile sup over probe centers of the closed-ball mass, per ladder radius.

    Probe centers default to the atoms themselves (a documented subsample when
    the atom count exceeds ``max_centers``).  Pass ``centers`` to probe other
    points, or ``metric(points, center) -> distances`` for non-Euclidean balls.
    """
    if mu.atom_count == 0:
        raise EmptyMeasure("empty measure")
    radii = ladder.radii() if isinstance(ladder, RadiusLadder) else np.asarray(ladder, float)
    center_info: dict = {"kind": "atoms", "count": mu.atom_count}
    if centers is None:
        pts = mu.atoms
        if mu.atom_count > max_centers:
            rng = np.random.default_rng(seed)
            idx = rng.choice(mu.atom_count, size=max_centers, replace=False)
            pts = mu.atoms[idx]
            center_info = {"kind": "atom-subsample", "count": max_centers, "seed": seed}
    else:
        pts = np.atleast_2d(np.asarray(centers, dtype=float))
        center_info = {"kind": "explicit", "count": len(pts)}

    sup = np.empty(len(radii))
    if metric is None:
        tree = cKDTree(mu.atoms)
        uniform = mu.weights.min() == mu.weights.max()
        for k, r in enumerate(radii):
            if uniform:
                counts = tree.query_ball_point(pts, r, return_length=True, workers=-1)
                sup[k] = float(counts.max() * mu.weights[0])
                continue
            groups = tree.query_ball_point(pts, r, workers=-1)
            lens = np.fromiter((len(g) for g in groups), dtype=np.intp, count=len(groups))
            idx = np.concatenate([g for g in groups if g]) if lens.sum() else np.array([], int)
            owner = np.repeat(np.arange(len(groups)), lens)
            sums = np.bincount(owner, weights=mu.weights[idx], minlength=len(groups))
            sup[k] = float(sums.max())
    else:
        masses = np.zeros((len(pts), len(radii)))
        for i, c in enumerate(pts):
            d = np.asarray(metric(mu.atoms, c))
            for k, r in enumerate(radii):
                masses[i, k] = mu.weights[d <= r].sum()
        sup = masses.max(axis=0)

    reliable = bool(radii.min() >= 2.0 * mu.resolution)
    if not reliable:
        warnings.warn(
            f"smallest radius {radii.min():.3g} is below 2x the approximation "
            f"resolution {mu.resolution:.3g}; profile tail is unreliable",
            ReliabilityWarning,
            stacklevel=2,
        )
    return BallProfile(radii, sup, ambient_dim=mu.dim, resolution=mu.resolution,
                       reliable=reliable, centers=center_info)


@dataclass(eq=False)
class DimensionEstimate:
    """Finite-scale bracket of the L-infinity dimension."""

    lower: float
    upper: float
    slope: float
    slope_window: tuple[int, int]
    residual: float
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "slope": self.slope,
            "slope_window": list(self.slope_window),
            "residual": self.residual,
            "degenerate": self.degenerate,
        }


def _window_fit(ln_r, ln_s, i, j):
    """LSQ slope/intercept and max abs residual over indices i..j inclusive."""
    x, y = ln_r[i : j + 1], ln_s[i : j + 1]
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.abs(y - (slope * x + intercept)).max())
    return float(slope), resid


def estimate_linf_dim(profile: BallProfile, residual_cap: float = 0.05) -> DimensionEstimate:
    """Windowed log-log slope bracket for liminf/limsup of the profile.

    Finds the largest contiguous ladder window whose least-squares fit of
    ln(sup_mass) against ln(r) has max abs residual below ``residual_cap``,
    then returns the min/max of consecutive two-point slopes inside it.
    """
    K = len(profile.radii)
    if K < 4:
        raise ValidationError("need at least 4 ladder points")
    s = profile.sup_mass
    if np.allclose(s, s[0], rtol=0.0, atol=1e-15):
        return DimensionEstimate(0.0, 0.0, 0.0, (0, K - 1), 0.0, degenerate=True)
    ln_r = np.log(profile.radii)
    ln_s = np.log(s)

    best = None  # (length, j, i, slope, resid)
    for i in range(K - 2):
        for j in range(i + 2, K):
            slope, resid = _window_fit(ln_r, ln_s, i, j)
            if resid < residual_cap:
                cand = (j - i, j, i)
                if best is None or cand > best[:3]:
                    best = (j - i, j, i, slope, resid)
    if best is None:
        # no window meets the cap; fall back to the best length-3 window
        fallback = min(
            ((_window_fit(ln_r, ln_s, i, i + 2), i) for i in range(K - 2)),
            key=lambda t: t[0][1],
        )
        (slope, resid), i = fallback
        best = (2, i + 2, i, slope, resid)
    _, j, i, slope, resid = best
    two_point = np.diff(ln_s[i : j + 1]) / np.diff(ln_r[i : j + 1])
    return DimensionEstimate(
        lower=float(two_point.min()),
        upper=float(two_point.max()),
        slope=slope,
        slope_window=(i, j),
        residual=resid,
    )


def selfsimilar_dim_bounds(ifs: IFSystem) -> tuple[float, float]:
    """Closed-form (lower, upper) bounds from weights and contraction scalars."""
    p = ifs.weights
    r = ifs.contraction_norms()
    ratios = np.log(p) / np.log(r)
    return float(ratios.min()), float(ratios.max())


def upper_regularity_fit(
    profile: BallProfile,
    n: int,
    *,
    grid_points: int = 200,
    slack: float = 0.05,
) -> dict:
    """Fit the upper-regularity law sup_mass <= c r^s with s swept over (n-2, n].

    For each grid exponent the constant c is the log-log least-squares
    intercept; a ladder point counts as a violation when it exceeds c r^s by
    more than ``slack`` in log space (without the slack, the finite grid
    would miss exact power laws).  Returns the largest zero-violation s, or
    the violation-minimizing s when none exists.
    """
    ln_r = np.log(profile.radii)
    ln_s_mass = np.log(profile.sup_mass)
    lo, hi = float(n - 2), float(n)
    exps = lo + (hi - lo) * np.arange(1, grid_points + 1) / grid_points
    best = None  # (violations, s, ln_c)
    zero_best = None
    for s in exps:
        ln_c = float(np.mean(ln_s_mass - s * ln_r))
        viol = int(np.sum(ln_s_mass - (ln_c + s * ln_r) > slack))
        if viol == 0 and (zero_best is None or s > zero_best[1]):
            zero_best = (0, s, ln_c)
        if best is None or viol < best[0]:
            best = (viol, s, ln_c)
    chosen = zero_best if zero_best is not None else best
    viol, s, ln_c = chosen
    return {
        "holds": viol == 0 and s > lo,
        "s": float(s),
        "c": float(np.exp(ln_c)),
        "violations": viol,
        "slack": slack,
    }


@dataclass(eq=False)
class ConditionReport:
    """Verdicts for the equivalent compactness conditions at ambient dimension n."""

    n: int
    c2: dict
    c3: dict
    c4: dict
    threshold: dict
    warnings: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "c2": self.c2,
            "c3": self.c3,
            "c4": self.c4,
            "threshold": self.threshold,
            "warnings": self.warnings,
        }


def check_conditions(
    ifs: IFSystem,
    n: int,
    profile: BallProfile | None = None,
) -> ConditionReport:
    """Evaluate (C2)-(C4) and the sentinel threshold verdict for dimension n.

    C2 is exact arithmetic on the system data.  C3 uses the closed-form lower
    bound, falling back to the profile estimate when the bounds straddle n-2.
    C4 needs a profile for the regularity fit; without one it is inferred
    from the bound (source recorded).
    """
    if n not in (1, 2, 3):
        raise ValidationError("n must be 1, 2, or 3")
    p = ifs.weights
    r = ifs.contraction_norms()
    abar = float(np.max(p * r ** (-(n - 2))))
    c2 = {"holds": abar < 1.0, "abar": abar}

    lower, upper = selfsimilar_dim_bounds(ifs)
    est = estimate_linf_dim(profile) if profile is not None else None
    if lower > n - 2 or upper <= n - 2 or est is None:
        c3 = {"holds": lower > n - 2, "lower_bound": lower, "source": "bounds"}
    else:
        c3 = {"holds": est.lower > n - 2, "lower_bound": est.lower, "source": "profile"}

    if profile is not None:
        c4 = upper_regularity_fit(profile, n)
        c4["source"] = "profile-fit"
    else:
        c4 = {"holds": c3["holds"], "s": lower, "c": float("nan"),
              "violations": None, "source": "bounds"}

    dim_est = est if est is not None else DimensionEstimate(
        lower, upper, 0.5 * (lower + upper), (0, 0), 0.0
    )
    verdict = compactness_threshold(dim_est, n, q=2.0)
    threshold = {"q": 2.0, "value": float(n - 2), "verdict": verdict}

    notes = []
    if c2["holds"] and est is not None and est.upper < (n - 2) - 0.1:
        msg = (f"C2 holds (Abar={abar:.4g}) but the profile estimate "
               f"upper={est.upper:.4g} sits below n-2={n - 2} by more than 0.1")
        warnings.warn(msg, ConsistencyWarning, stacklevel=2)
        notes.append(msg)
    if c2["holds"] and not c3["holds"]:
        notes.append("C2 holds but C3 verdict is false (check resolution)")
    if c3["holds"] != c4["holds"]:
        notes.append("C3 and C4 verdicts disagree")
    return ConditionReport(n=n, c2=c2, c3=c3, c4=c4, threshold=threshold, warnings=notes)


def compactness_threshold(est: DimensionEstimate, n: int, q: float) -> str:
    """Verdict against the threshold q(n-2)/2 with a +-0.02 decision margin.

    q = 2 is the sentinel for the base regime (threshold n-2); q > 2 gives
    the unit-ball criterion threshold.
    """
    if q < 2.0:
        raise ValidationError("q must be >= 2 (q = 2 is the sentinel regime)")
    thr = q * (n - 2) / 2.0
    if est.lower > thr + THRESHOLD_MARGIN:
        return COMPACT
    if est.upper < thr - THRESHOLD_MARGIN:
        return NOT_COMPACT
    return INCONCLUSIVE
