"""Numerical compact-embedding criteria and Poincare-inequality probes.

The small-scale criterion tracks the functional

    g(r) = r^(1 - n/2) mu(B(x, r))^(1/q)      (n > 2)
    g(r) = |ln r|^(1/2) mu(B(x, r))^(1/q)     (n = 2)

maximized over probe centers: the embedding of the Sobolev unit ball into
L^q(mu) is compact exactly when sup over r < delta tends to 0 with delta.
For measures without compact support the tail criterion additionally sends
sup over centers beyond radius R (with r < 1) to 0 as R grows.

On a finite ladder, "tends to 0" is decided by a documented two-sided rule:
the running sup must decay by a cumulative factor >= 4 over the last three
ladder values with a positive log-log slope (Compact side); a windowed sup
(restricted to r within a fixed span below each delta) growing by >= 4 flags
blow-up (NotCompact side); anything else is inconclusive.  The running sup
over shrinking ranges is non-increasing by construction, so growth can only
register on the windowed variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .dimension import (
    COMPACT,
    INCONCLUSIVE,
    NOT_COMPACT,
    DimensionEstimate,
    compactness_threshold,
)
from .errors import EmptyMeasure, Unsupported, ValidationError
from .ifs import MeasureApprox

#: cumulative factor over the last three ladder values demanded by the trend rule
TREND_FACTOR = 4.0

#: sub-ladder length per delta and its span below delta (windowed sup)
SUB_LADDER_POINTS = 16
WINDOW_SPAN = 64.0


def small_scale_functional(r, mass, q: float, n: int):
    """The embedding functional g(r) for ball masses at radii r."""
    r = np.asarray(r, dtype=float)
    mass = np.asarray(mass, dtype=float)
    if n == 2:
        return np.sqrt(np.abs(np.log(r))) * mass ** (1.0 / q)
    return r ** (1.0 - n / 2.0) * mass ** (1.0 / q)


def _sup_ball_mass(tree: cKDTree, weights: np.ndarray, centers: np.ndarray, r: float) -> float:
    if weights.min() == weights.max():
        counts = tree.query_ball_point(centers, r, return_length=True, workers=-1)
        return float(counts.max() * weights[0])
    groups = tree.query_ball_point(centers, r, workers=-1)
    lens = np.fromiter((len(g) for g in groups), dtype=np.intp, count=len(groups))
    if lens.sum() == 0:
        return 0.0
    idx = np.concatenate([g for g in groups if g])
    owner = np.repeat(np.arange(len(groups)), lens)
    sums = np.bincount(owner, weights=weights[idx], minlength=len(groups))
    return float(sums.max())


def _probe_centers(mu: MeasureApprox, max_centers: int, seed: int) -> np.ndarray:
    if mu.atom_count <= max_centers:
        return mu.atoms
    rng = np.random.default_rng(seed)
    idx = rng.choice(mu.atom_count, size=max_centers, replace=False)
    return mu.atoms[idx]


@dataclass(eq=False)
class SmallScaleScan:
    """Per-delta sups of the small-scale functional.

    running_sup is the true sup over all sampled r <= delta (non-increasing);
    windowed_sup restricts r to (delta/WINDOW_SPAN, delta] and is the growth
    detector.
    """

    q: float
    n: int
    deltas: np.ndarray
    running_sup: np.ndarray
    windowed_sup: np.ndarray
    floor: float
    sampled_r: np.ndarray
    sampled_g: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("delta,running_sup,windowed_sup\n")
            for d, a, b in zip(self.deltas, self.running_sup, self.windowed_sup):
                f.write("%.17g,%.17g,%.17g\n" % (d, a, b))


def mazja_small_scale(
    mu: MeasureApprox,
    q: float,
    n: int,
    delta_ladder,
    *,
    max_centers: int = 2048,
    seed: int = 0,
) -> SmallScaleScan:
    """Scan sup_{x, r < delta} of the small-scale functional over a delta ladder.

    Probe centers are the atoms (seeded subsample above ``max_centers``); for
    each delta, r runs over a geometric sub-ladder between the resolution
    floor (2x the approximation's cylinder diameter) and delta.
    """
    if n == 1:
        raise Unsupported("the n = 1 regime embeds by continuity; no functional scan")
    if n < 2:
        raise ValidationError("n must be >= 2")
    if q <= 2.0:
        raise ValidationError("the unit-ball criterion needs q > 2")
    if mu.atom_count == 0:
        raise EmptyMeasure("empty measure")
    deltas = np.sort(np.asarray(
        delta_ladder.radii() if hasattr(delta_ladder, "radii") else delta_ladder, float))[::-1]
    floor = 2.0 * mu.resolution
    if deltas.min() <= floor:
        raise ValidationError(
            f"smallest delta {deltas.min():.3g} at or below the resolution floor {floor:.3g}"
        )
    centers = _probe_centers(mu, max_centers, seed)
    tree = cKDTree(mu.atoms)

    all_r, all_g = [], []
    windowed = np.empty(len(deltas))
    for k, d in enumerate(deltas):
        lo = max(floor, d / WINDOW_SPAN)
        rs = np.geomspace(lo, d, SUB_LADDER_POINTS) if lo < d else np.array([d])
        masses = np.array([_sup_ball_mass(tree, mu.weights, centers, r) for r in rs])
        gs = small_scale_functional(rs, masses, q, n)
        windowed[k] = gs.max()
        all_r.append(rs)
        all_g.append(gs)
    sampled_r = np.concatenate(all_r)
    sampled_g = np.concatenate(all_g)
    running = np.array([sampled_g[sampled_r <= d].max() for d in deltas])
    return SmallScaleScan(q=q, n=n, deltas=deltas, running_sup=running,
                          windowed_sup=windowed, floor=floor,
                          sampled_r=sampled_r, sampled_g=sampled_g)


@dataclass(eq=False)
class TailScan:
    """sup over centers beyond R of the functional, per R in a growing ladder."""

    q: float
    n: int
    radii_out: np.ndarray
    sup: np.ndarray
    floor: float

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("R,sup\n")
            for rr, s in zip(self.radii_out, self.sup):
                f.write("%.17g,%.17g\n" % (rr, s))


def mazja_tail(mu: MeasureApprox, q: float, n: int, R_ladder, *, seed: int = 0,
               max_centers: int = 2048) -> TailScan:
    """Tail criterion scan for measures whose atoms extend unboundedly.

    For each R, sup of the functional over atom centers with |x| > R and r on
    a fixed sub-ladder in (floor, 1).  Identically 0 past the support radius
    of a compactly supported measure.
    """
    if n < 2:
        raise ValidationError("n must be >= 2")
    if q <= 2.0:
        raise ValidationError("the unit-ball criterion needs q > 2")
    Rs = np.sort(np.asarray(R_ladder, dtype=float))
    floor = 2.0 * mu.resolution
    lo = max(floor, 2.0**-20)
    rs = np.geomspace(lo, 1.0, SUB_LADDER_POINTS)
    tree = cKDTree(mu.atoms)
    norms = np.linalg.norm(mu.atoms, axis=1)
    sup = np.zeros(len(Rs))
    rng = np.random.default_rng(seed)
    for i, R in enumerate(Rs):
        outside = np.where(norms > R)[0]
        if outside.size == 0:
            sup[i] = 0.0
            continue
        if outside.size > max_centers:
            outside = rng.choice(outside, size=max_centers, replace=False)
        centers = mu.atoms[outside]
        vals = [
            small_scale_functional(r, _sup_ball_mass(tree, mu.weights, centers, r), q, n)
            for r in rs
        ]
        sup[i] = float(np.max(vals))
    return TailScan(q=q, n=n, radii_out=Rs, sup=sup, floor=floor)


# --------------------------------------------------------------------------
# trend decision and combined verdict
# --------------------------------------------------------------------------

def _loglog_slope(x, y):
    mask = y > 0
    if mask.sum() < 2:
        return 0.0
    return float(np.polyfit(np.log(x[mask]), np.log(y[mask]), 1)[0])


def ladder_trend(scan: SmallScaleScan) -> tuple[str, dict]:
    """Apply the documented finite-data surrogate for 'limit equals 0'.

    Returns one of COMPACT / NOT_COMPACT / INCONCLUSIVE plus the evidence.
    """
    run, win = scan.running_sup, scan.windowed_sup
    evidence = {
        "decay_factor": float(run[-3] / run[-1]) if len(run) >= 3 and run[-1] > 0 else float("inf"),
        "growth_factor": float(win[-1] / win[-3]) if len(win) >= 3 and win[-3] > 0 else 0.0,
        "running_slope": _loglog_slope(scan.deltas, run),
        "rule": (
            f"decay: last-3 running-sup factor >= {TREND_FACTOR} with positive "
            f"log-log slope; growth: last-3 windowed-sup factor >= {TREND_FACTOR}"
        ),
    }
    if len(run) >= 3:
        if evidence["decay_factor"] >= TREND_FACTOR and evidence["running_slope"] > 0:
            return COMPACT, evidence
        if evidence["growth_factor"] >= TREND_FACTOR:
            return NOT_COMPACT, evidence
    return INCONCLUSIVE, evidence


def tail_trend(scan: TailScan) -> str:
    """Tail verdict: vanishing sup (Compact side) vs bounded away from 0."""
    s = scan.sup
    if np.all(s == 0.0):
        return COMPACT
    if s[-1] == 0.0 or (s[0] > 0 and s[0] / max(s[-1], 1e-300) >= TREND_FACTOR):
        return COMPACT
    if s[-1] >= s[0] / 2.0:
        return NOT_COMPACT
    return INCONCLUSIVE


@dataclass(eq=False)
class MazjaReport:
    """Combined small-scale / tail / dimension-threshold verdict."""

    q: float
    n: int
    delta_ladder: np.ndarray
    small_scale_sup: np.ndarray
    tail_sup: np.ndarray | None
    verdict: str
    rationale: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "n": self.n,
            "delta_ladder": self.delta_ladder.tolist(),
            "small_scale_sup": self.small_scale_sup.tolist(),
            "tail_sup": None if self.tail_sup is None else self.tail_sup.tolist(),
            "verdict": self.verdict,
            "rationale": self.rationale,
        }


def embedding_verdict(
    small_scale: SmallScaleScan | None,
    dims: DimensionEstimate,
    n: int,
    q: float,
    tail: TailScan | None = None,
) -> MazjaReport:
    """Combine the ladder trend with the dimension threshold q(n-2)/2.

    Agreement wins; disagreement returns Inconclusive with both signals
    attached.  A non-vanishing tail blocks the Compact verdict regardless of
    the small-scale signal (mass escaping to infinity).
    """
    threshold_v = compactness_threshold(dims, n, q)
    rationale: dict = {
        "threshold": {
            "value": q * (n - 2) / 2.0,
            "verdict": threshold_v,
            "rule": "dimension bracket vs q(n-2)/2 with margin 0.02",
        }
    }
    if small_scale is not None:
        ladder_v, evidence = ladder_trend(small_scale)
        rationale["small_scale"] = {"verdict": ladder_v,
                                    "resolution_floor": small_scale.floor, **evidence}
    else:
        ladder_v = INCONCLUSIVE
    if tail is not None:
        tail_v = tail_trend(tail)
        rationale["tail"] = {"verdict": tail_v}
        if tail_v == NOT_COMPACT and ladder_v == COMPACT:
            ladder_v = INCONCLUSIVE
            rationale["tail"]["note"] = "tail mass does not vanish; compact signal vetoed"

    if ladder_v == INCONCLUSIVE:
        verdict = threshold_v
    elif threshold_v == INCONCLUSIVE or threshold_v == ladder_v:
        verdict = ladder_v
    else:
        verdict = INCONCLUSIVE
        rationale["conflict"] = "ladder trend and dimension threshold disagree"
    return MazjaReport(
        q=q,
        n=n,
        delta_ladder=small_scale.deltas if small_scale is not None else np.array([]),
        small_scale_sup=small_scale.running_sup if small_scale is not None else np.array([]),
        tail_sup=tail.sup if tail is not None else None,
        verdict=verdict,
        rationale=rationale,
    )


# --------------------------------------------------------------------------
# Poincare probes on the line
# --------------------------------------------------------------------------

UNBOUNDED = "Unbounded"


def _pl_energy(nodes: np.ndarray, values: np.ndarray) -> float:
    """Exact Dirichlet energy of the piecewise-linear interpolant."""
    dx = np.diff(nodes)
    dv = np.diff(values)
    if np.any(dx <= 0):
        raise ValidationError("mesh nodes must be strictly increasing")
    return float(np.sum(dv * dv / dx))


def _family_function(family: str, N: float) -> tuple[np.ndarray, np.ndarray]:
    if family == "plateau_ramps":
        # 1 on [-N, N], linear ramps of width N down to 0
        return np.array([-2 * N, -N, N, 2 * N]), np.array([0.0, 1.0, 1.0, 0.0])
    if family == "tent_growing":
        # 1 on [-1, 1], ramps out to +-N
        if N <= 1:
            raise ValidationError("tent_growing needs N > 1")
        return np.array([-N, -1.0, 1.0, N]), np.array([0.0, 1.0, 1.0, 0.0])
    raise ValidationError(f"unknown test family {family!r}")


@dataclass(eq=False)
class PoincareProbe:
    """Rayleigh-type ratios of a test family against an atomic measure."""

    family: str
    scales: np.ndarray
    ratios: np.ndarray
    verdict: str
    constant: float
    slope: float
    residual: float

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "scales": self.scales.tolist(),
            "ratios": self.ratios.tolist(),
            "verdict": self.verdict,
            "constant": self.constant,
            "slope": self.slope,
            "residual": self.residual,
        }


def poincare_probe_line(
    mu: MeasureApprox,
    scales,
    family: str = "plateau_ramps",
    mesh: tuple[np.ndarray, np.ndarray] | None = None,
) -> PoincareProbe:
    """Ratios int u^2 dmu / int u'^2 dx for the chosen piecewise-linear family.

    Both integrals are exact: the numerator evaluates the interpolant at the
    atoms, the denominator is the closed-form energy of the linear pieces.
    The plateau family on any probability measure satisfies
    ratio(N) >= N mu([-N, N]) / 2, which blows up whenever mass does not
    escape -- the inequality failing to stay bounded is the whole point.

    Verdict is Unbounded when the log-log slope of ratio against scale is
    positive with residual below 0.1; otherwise the largest observed ratio is
    reported as a bounded constant.
    """
    if mu.dim != 1:
        raise ValidationError("line probe needs a 1D measure")
    x = mu.atoms[:, 0]
    if family == "user_mesh":
        if mesh is None:
            raise ValidationError("user_mesh family needs (nodes, values)")
        nodes, values = (np.asarray(a, dtype=float) for a in mesh)
        energy = _pl_energy(nodes, values)
        u = np.interp(x, nodes, values, left=0.0, right=0.0)
        ratio = float(np.sum(mu.weights * u * u)) / energy
        return PoincareProbe(family, np.array([1.0]), np.array([ratio]),
                             verdict=f"BoundedConstant({ratio:.6g})",
                             constant=ratio, slope=0.0, residual=0.0)

    scales = np.asarray(scales, dtype=float)
    ratios = np.empty(len(scales))
    for i, N in enumerate(scales):
        nodes, values = _family_function(family, N)
        energy = _pl_energy(nodes, values)
        u = np.interp(x, nodes, values, left=0.0, right=0.0)
        ratios[i] = float(np.sum(mu.weights * u * u)) / energy
    ln_s, ln_r = np.log(scales), np.log(np.maximum(ratios, 1e-300))
    slope, intercept = np.polyfit(ln_s, ln_r, 1)
    residual = float(np.abs(ln_r - (slope * ln_s + intercept)).max())
    if slope > 0 and residual < 0.1:
        verdict = UNBOUNDED
        constant = float("inf")
    else:
        constant = float(ratios.max())
        verdict = f"BoundedConstant({constant:.6g})"
    return PoincareProbe(family, scales, ratios, verdict=verdict,
                         constant=constant, slope=float(slope), residual=residual)
