"""Constant-curvature model spaces and the comparison-geometry kernels.

Three model surfaces are supported: the hyperbolic plane of radius R
(curvature -1/R^2), the Euclidean plane, and the sphere of radius R
(curvature +1/R^2).  The hinge third-side formulas are the law of cosines in
each model; the cone-annulus machinery realizes the set

    V_delta = (cone(z, l, beta) n B(z, rho + 2 delta)) \\ closure(cone n B(z, rho))

with opening angle beta = 4 delta / rho, whose center x (on the axis at
distance rho + delta from the vertex) satisfies B(x, delta) c V_delta c
B(x, 10 delta).  Charts unroll geodesic disks of the model surfaces into
plane disks through the exponential map, pushing atomic measures forward
with exact mass bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc, gamma

from .errors import CoverageError, DomainError, ValidationError
from .ifs import MeasureApprox

_CLAMP_TOL = 1e-12


# --------------------------------------------------------------------------
# model spaces and hinge formulas
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpace:
    """Simply connected 2D space of constant curvature.

    kind is one of 'hyperbolic', 'flat', 'spherical'; radius R gives
    curvature -1/R^2, 0, +1/R^2 respectively (R ignored for flat).
    """

    kind: str
    radius: float = math.inf

    def __post_init__(self):
        if self.kind not in ("hyperbolic", "flat", "spherical"):
            raise ValidationError(f"unknown model kind {self.kind!r}")
        if self.kind != "flat" and not self.radius > 0.0:
            raise ValidationError("model radius must be positive")

    @property
    def curvature(self) -> float:
        if self.kind == "flat":
            return 0.0
        k = 1.0 / self.radius**2
        return -k if self.kind == "hyperbolic" else k


def _acosh1p(t: float) -> float:
    """arccosh(1 + t) for t >= 0 with full relative accuracy at any scale.

    Uses the exact half-angle identity arccosh(1 + t) = 2 arcsinh(sqrt(t/2)),
    which sharpens the usual ln(y + sqrt(y^2 - 1)) form and its
    sqrt(2(y-1)) series fallback below y - 1 = 1e-8: no digits are lost to
    cancellation for small t.
    """
    if t < -_CLAMP_TOL:
        raise DomainError(f"arccosh argument {1.0 + t} below 1")
    if t <= 0.0:
        return 0.0
    return 2.0 * math.asinh(math.sqrt(0.5 * t))


def _acos1m(s: float) -> float:
    """arccos(1 - s) for s in [0, 2] via the exact identity 2 arcsin(sqrt(s/2))."""
    if s < -_CLAMP_TOL:
        raise DomainError(f"arccos argument {1.0 - s} above 1")
    if s - 2.0 > _CLAMP_TOL:
        raise DomainError(f"arccos argument {1.0 - s} below -1")
    s = min(max(s, 0.0), 2.0)
    return 2.0 * math.asin(math.sqrt(0.5 * s))


def _acosh_stable(y: float) -> float:
    """arccosh via the cancellation-safe excess form (clamps just below 1)."""
    return _acosh1p(y - 1.0)


def _clamped_arccos(x: float) -> float:
    if x > 1.0:
        if x - 1.0 > _CLAMP_TOL:
            raise DomainError(f"arccos argument {x} above 1")
        x = 1.0
    elif x < -1.0:
        if -1.0 - x > _CLAMP_TOL:
            raise DomainError(f"arccos argument {x} below -1")
        x = -1.0
    return math.acos(x)


def hinge_third_side(space: ModelSpace, a: float, b: float, alpha: float) -> float:
    """Length of the side closing a hinge with legs a, b and angle alpha.

    Law of cosines in the model space:

    * hyperbolic: cosh(c/R) = cosh(a/R) cosh(b/R) - sinh(a/R) sinh(b/R) cos(alpha)
    * flat:       c^2 = a^2 + b^2 - 2 a b cos(alpha)
    * spherical:  cos(c/R) = cos(a/R) cos(b/R) + sin(a/R) sin(b/R) cos(alpha)

    Each branch is evaluated in the cancellation-free half-angle form, e.g.
    cosh(c/R) - 1 = 2 sinh^2((a-b)/2R) + 2 sinh(a/R) sinh(b/R) sin^2(alpha/2),
    so degenerate hinges (alpha = 0, a = b) return exactly 0 and nearly flat
    configurations keep full relative accuracy.  The spherical branch
    requires a + b < pi R so that the hinge closes inside a hemisphere.
    """
    if a < 0.0 or b < 0.0:
        raise DomainError("hinge legs must be nonnegative")
    if not 0.0 <= alpha <= math.pi:
        raise DomainError("hinge angle must lie in [0, pi]")
    sin_half_sq = math.sin(alpha / 2.0) ** 2
    if space.kind == "flat":
        c2 = (a - b) ** 2 + 4.0 * a * b * sin_half_sq
        return math.sqrt(max(c2, 0.0))
    R = space.radius
    if space.kind == "hyperbolic":
        # t = cosh(c/R) - 1, assembled from nonnegative terms
        t = (2.0 * math.sinh((a - b) / (2.0 * R)) ** 2
             + 2.0 * math.sinh(a / R) * math.sinh(b / R) * sin_half_sq)
        return R * _acosh1p(t)
    if a + b >= math.pi * R:
        raise DomainError(f"spherical hinge needs a + b < pi R, got {a + b} vs {math.pi * R}")
    # s = 1 - cos(c/R), again a sum of nonnegative terms
    s = (2.0 * math.sin((a - b) / (2.0 * R)) ** 2
         + 2.0 * math.sin(a / R) * math.sin(b / R) * sin_half_sq)
    return R * _acos1m(s)


_BRANCHES = ("hyperbolic", "spherical", "flat")


def annulus_chord(branch: str, rho: float, R: float, delta: float, lam: float) -> float:
    """Third side of the isoceles hinge with legs rho + lam and angle 4 delta / rho.

    This is the chord across the cone annulus at radial offset lam, in the
    model of the given branch; hyperbolic and spherical values carry the R
    factor (side length, not normalized angle).  Domain: delta in
    [0, pi rho / 4], lam in [0, 2 delta]; the spherical branch additionally
    needs lam <= pi R - rho.
    """
    if branch not in _BRANCHES:
        raise ValidationError(f"branch must be one of {_BRANCHES}")
    if rho <= 0.0:
        raise DomainError("rho must be positive")
    if not 0.0 <= delta <= math.pi * rho / 4.0 + _CLAMP_TOL:
        raise DomainError(f"delta {delta} outside [0, pi rho/4]")
    if not 0.0 <= lam <= 2.0 * delta + _CLAMP_TOL:
        raise DomainError(f"lambda {lam} outside [0, 2 delta]")
    if branch == "spherical":
        if math.pi * R - rho <= 0.0:
            raise DomainError("spherical branch needs pi R > rho")
        if lam > math.pi * R - rho:
            raise DomainError("spherical branch needs lambda <= pi R - rho")
    # roundoff can push the opening one ulp past pi at delta = pi rho / 4
    alpha = min(4.0 * delta / rho, math.pi)
    leg = rho + lam
    if branch == "spherical":
        # the isoceles spherical formula is valid for a single leg up to
        # pi R, wider than the two-leg hinge precondition a + b < pi R
        sin_half_sq = math.sin(alpha / 2.0) ** 2
        s = 2.0 * math.sin(leg / R) ** 2 * sin_half_sq
        return R * _acos1m(s)
    space = ModelSpace(branch, R if branch != "flat" else math.inf)
    return hinge_third_side(space, leg, leg, alpha)


def annulus_chord_bracket(
    branch: str,
    rho: float,
    R: float,
    *,
    delta_points: int = 200,
    lambda_points: int = 200,
    delta_max: float | None = None,
) -> tuple[float, float]:
    """(Cmin, Cmax) of chord/delta over the admissible (delta, lambda) domain.

    delta sweeps (0, delta_max] (delta = 0 excluded, where the ratio is the
    4 sinh/sin limit); lambda sweeps [0, 2 delta], intersected with
    [0, pi R - rho] on the spherical branch.  For the flat branch the ratio
    satisfies 2 <= chord/delta <= 8 exactly on the full domain.
    """
    if delta_max is None:
        delta_max = math.pi * rho / 4.0
    deltas = delta_max * np.arange(1, delta_points + 1) / delta_points
    cmin, cmax = math.inf, -math.inf
    for d in deltas:
        lam_hi = 2.0 * d
        if branch == "spherical":
            lam_hi = min(lam_hi, math.pi * R - rho)
            if lam_hi < 0.0:
                raise DomainError("spherical branch needs pi R > rho")
        lams = np.linspace(0.0, lam_hi, lambda_points)
        for lam in lams:
            ratio = annulus_chord(branch, rho, R, d, lam) / d
            cmin = min(cmin, ratio)
            cmax = max(cmax, ratio)
    return cmin, cmax


# --------------------------------------------------------------------------
# cone annulus
# --------------------------------------------------------------------------

def cone_solid_angle(theta: float, n: int) -> float:
    """Solid angle of a cone with polar angle theta in R^n.

    omega = pi^(n/2) I_{sin^2 theta}((n-1)/2, 1/2) / Gamma(n/2), valid for
    theta < pi/2 (the admissible regime: omega below a straight angle).
    """
    if not 0.0 < theta < math.pi / 2.0:
        raise DomainError("polar angle must lie in (0, pi/2)")
    u = math.sin(theta) ** 2
    return math.pi ** (n / 2.0) * float(betainc((n - 1) / 2.0, 0.5, u)) / gamma(n / 2.0)


@dataclass(eq=False)
class ConeAnnulus:
    """Cone-annulus neighborhood with opening angle locked to 4 delta / rho.

    The center sits on the axis at distance rho + delta from the vertex; a
    point belongs to the set iff rho < |p - z| < rho + 2 delta and its angle
    from the axis is below beta/2 = 2 delta / rho.
    """

    vertex: np.ndarray
    axis: np.ndarray
    rho: float
    delta: float
    beta: float = field(init=False)
    center: np.ndarray = field(init=False)

    def __post_init__(self):
        self.vertex = np.asarray(self.vertex, dtype=float)
        self.axis = np.asarray(self.axis, dtype=float)
        norm = np.linalg.norm(self.axis)
        if norm == 0.0:
            raise ValidationError("axis must be nonzero")
        self.axis = self.axis / norm
        if not 0.0 < self.delta < math.pi * self.rho / 4.0:
            raise ValidationError("need 0 < delta < pi rho / 4")
        self.beta = 4.0 * self.delta / self.rho
        self.center = self.vertex + (self.rho + self.delta) * self.axis

    @property
    def dim(self) -> int:
        return self.vertex.size

    @property
    def solid_angle(self) -> float:
        """Derived read-only solid angle of the underlying cone."""
        return cone_solid_angle(self.beta / 2.0, self.dim)


def cone_annulus_contains(V: ConeAnnulus, points) -> np.ndarray | bool:
    """Membership predicate, vectorized over rows of ``points``."""
    p = np.atleast_2d(np.asarray(points, dtype=float)) - V.vertex
    d = np.linalg.norm(p, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_angle = np.where(d > 0.0, p @ V.axis / np.maximum(d, 1e-300), 1.0)
    angle = np.arccos(np.clip(cos_angle, -1.0, 1.0))
    inside = (V.rho < d) & (d < V.rho + 2.0 * V.delta) & (angle < V.beta / 2.0)
    return inside if inside.size > 1 else bool(inside[0])


def _unit_cap_directions(rng, count, dim, axis, cos_floor):
    """Uniform directions in the spherical cap angle(dir, axis) <= arccos(cos_floor)."""
    if dim == 2:
        theta_max = math.acos(cos_floor)
        # uniform arc length on the cap
        ang = rng.uniform(-theta_max, theta_max, size=count)
        perp = np.array([-axis[1], axis[0]])
        return np.cos(ang)[:, None] * axis + np.sin(ang)[:, None] * perp
    # dim == 3: cos(angle) uniform on [cos_floor, 1], azimuth uniform
    c = rng.uniform(cos_floor, 1.0, size=count)
    s = np.sqrt(1.0 - c**2)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=count)
    # orthonormal frame completing the axis
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    return c[:, None] * axis + (s * np.cos(phi))[:, None] * e1 + (s * np.sin(phi))[:, None] * e2


def _sample_annulus(V: ConeAnnulus, count: int, rng) -> np.ndarray:
    """Exact uniform samples of the cone annulus via inverse-CDF radial draws."""
    n = V.dim
    lo, hi = V.rho, V.rho + 2.0 * V.delta
    u = rng.random(count)
    radii = (lo**n + u * (hi**n - lo**n)) ** (1.0 / n)
    dirs = _unit_cap_directions(rng, count, n, V.axis, math.cos(V.beta / 2.0))
    return V.vertex + radii[:, None] * dirs


def _sample_ball(center: np.ndarray, radius: float, count: int, rng) -> np.ndarray:
    n = center.size
    g = rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / n)
    return center + r[:, None] * g


def inclusion_probe(
    V: ConeAnnulus,
    samples: int,
    seed: int = 0,
    *,
    outer_factor: float = 10.0,
    widen_beta: float = 1.0,
) -> dict:
    """Monte Carlo check of B(x, delta) c V c B(x, outer_factor * delta).

    inner_violations counts uniform samples of B(x, delta) outside V;
    outer_violations counts uniform samples of V outside the outer ball.
    ``widen_beta`` scales the cone opening used for the *sampled* set (the
    negative control samples a deliberately too-wide cone annulus while
    keeping the same center and outer ball).
    """
    rng = np.random.default_rng(seed)
    inner_pts = _sample_ball(V.center, V.delta, samples, rng)
    inner_violations = int(np.sum(~np.atleast_1d(cone_annulus_contains(V, inner_pts))))

    if widen_beta == 1.0:
        wide = V
    else:
        # same rho/delta geometry, opening angle scaled by hand
        wide = ConeAnnulus(V.vertex.copy(), V.axis.copy(), V.rho, V.delta)
        wide.beta = V.beta * widen_beta
        if wide.beta >= 2 * math.pi:
            raise ValidationError("widened opening angle exceeds a full turn")
    outer_pts = _sample_annulus(wide, samples, rng)
    d = np.linalg.norm(outer_pts - V.center, axis=1)
    outer_violations = int(np.sum(d > outer_factor * V.delta))
    return {
        "inner_violations": inner_violations,
        "outer_violations": outer_violations,
        "samples": samples,
        "seed": seed,
        "outer_factor": outer_factor,
        "widen_beta": widen_beta,
    }


# --------------------------------------------------------------------------
# model surfaces, exponential maps, charts
# --------------------------------------------------------------------------

class SphereSurface:
    """Round sphere of radius R embedded in R^3."""

    def __init__(self, R: float):
        if R <= 0:
            raise ValidationError("sphere radius must be positive")
        self.R = float(R)

    injectivity = property(lambda self: math.pi * self.R)

    def check_point(self, p):
        if abs(np.linalg.norm(p) - self.R) > 1e-9 * self.R:
            raise ValidationError("point does not lie on the sphere")

    def distance(self, X, y):
        X = np.atleast_2d(X)
        c = np.clip((X @ y) / self.R**2, -1.0, 1.0)
        return self.R * np.arccos(c)

    def exp(self, p, v):
        """Geodesic from p with initial (ambient, tangent) velocity v, unit time."""
        t = np.linalg.norm(v)
        if t == 0.0:
            return p.copy()
        if t >= self.injectivity:
            raise DomainError("tangent vector reaches the injectivity radius")
        return math.cos(t / self.R) * p + self.R * math.sin(t / self.R) * (v / t)

    def log(self, p, q):
        c = float(np.clip(np.dot(p, q) / self.R**2, -1.0, 1.0))
        ang = math.acos(c)
        if ang == 0.0:
            return np.zeros(3)
        w = q - c * p
        nw = np.linalg.norm(w)
        if nw == 0.0:
            raise DomainError("log undefined at the antipode")
        return (self.R * ang) * (w / nw)


class HyperbolicSurface:
    """Hyperboloid sheet x1^2 + x2^2 - x3^2 = -R^2, x3 > 0, in Minkowski R^{2,1}."""

    def __init__(self, R: float):
        if R <= 0:
            raise ValidationError("hyperbolic radius must be positive")
        self.R = float(R)

    injectivity = property(lambda self: math.inf)

    @staticmethod
    def _mink(x, y):
        return x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1] - x[..., 2] * y[..., 2]

    def base_point(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.R])

    def check_point(self, p):
        if abs(self._mink(p, p) + self.R**2) > 1e-9 * self.R**2:
            raise ValidationError("point does not lie on the hyperboloid")

    def distance(self, X, y):
        X = np.atleast_2d(X)
        c = np.maximum(-self._mink(X, y[None, :]) / self.R**2, 1.0)
        return self.R * np.arccosh(c)

    def exp(self, p, v):
        t = math.sqrt(max(self._mink(v, v), 0.0))
        if t == 0.0:
            return p.copy()
        return math.cosh(t / self.R) * p + self.R * math.sinh(t / self.R) * (v / t)

    def log(self, p, q):
        c = max(-self._mink(p, q) / self.R**2, 1.0)
        d = self.R * _acosh_stable(c)
        if d == 0.0:
            return np.zeros(3)
        w = q - c * p
        nw = math.sqrt(max(self._mink(w, w), 0.0))
        return (d / nw) * w


@dataclass(eq=False)
class ChartMap:
    """Normal-coordinate chart: geodesic disk B(p, eps) -> plane disk B(z, eps).

    The map composes exp_p^{-1}, the frame isomorphism onto R^2 (an isometry
    of tangent spaces), and the translation placing the image disk at z.  For
    surface=None the chart is a flat translation chart on R^n.
    """

    surface: SphereSurface | HyperbolicSurface | None
    base_point: np.ndarray
    center: np.ndarray
    eps: float
    frame: np.ndarray | None = None  # (2, 3) tangent orthonormal rows

    def __post_init__(self):
        self.base_point = np.asarray(self.base_point, dtype=float)
        self.center = np.asarray(self.center, dtype=float)
        if self.eps <= 0.0:
            raise ValidationError("chart radius must be positive")
        if self.surface is None:
            if self.base_point.shape != self.center.shape:
                raise ValidationError("flat chart needs matching dimensions")
            return
        self.surface.check_point(self.base_point)
        if self.eps >= self.surface.injectivity:
            raise ValidationError("chart radius must stay below the injectivity radius")
        if self.frame is None:
            self.frame = self._default_frame()
        self.frame = np.asarray(self.frame, dtype=float).reshape(2, 3)

    def _default_frame(self) -> np.ndarray:
        p = self.base_point
        if isinstance(self.surface, SphereSurface):
            helper = np.array([1.0, 0.0, 0.0]) if abs(p[0]) < 0.9 * self.surface.R else np.array([0.0, 1.0, 0.0])
            e1 = np.cross(p, helper)
            e1 /= np.linalg.norm(e1)
            e2 = np.cross(p, e1) / np.linalg.norm(np.cross(p, e1))
            return np.stack([e1, e2])
        # hyperboloid at the standard base point: ambient horizontal plane is tangent
        if np.allclose(p[:2], 0.0):
            return np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        raise ValidationError("supply a frame for non-standard hyperbolic base points")

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.surface is None:
            return np.linalg.norm(pts - self.base_point, axis=1) < self.eps
        return self.surface.distance(pts, self.base_point) < self.eps

    def forward(self, points) -> np.ndarray:
        """phi(point): plane coordinates of surface points (rows)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.surface is None:
            return self.center + (pts - self.base_point)
        out = np.empty((len(pts), 2))
        for i, q in enumerate(pts):
            v = self.surface.log(self.base_point, q)
            out[i] = self.center + self.frame @ v
        return out

    def inverse(self, plane_points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(plane_points, dtype=float))
        if self.surface is None:
            return self.base_point + (pts - self.center)
        out = np.empty((len(pts), 3))
        for i, y in enumerate(pts):
            v2 = y - self.center
            out[i] = self.surface.exp(self.base_point, v2 @ self.frame)
        return out


def model_exp(chart: ChartMap, tangent) -> np.ndarray:
    """Surface point reached from the chart's base point along a plane vector."""
    v2 = np.asarray(tangent, dtype=float)
    if chart.surface is None:
        return chart.base_point + v2
    if np.linalg.norm(v2) >= chart.surface.injectivity:
        raise DomainError("vector exceeds the injectivity radius")
    return chart.surface.exp(chart.base_point, v2 @ chart.frame)


def model_log(chart: ChartMap, point) -> np.ndarray:
    """Plane vector whose model_exp reproduces ``point`` (inverse of model_exp)."""
    q = np.asarray(point, dtype=float)
    if chart.surface is None:
        return q - chart.base_point
    if not bool(chart.contains(q[None, :])[0]):
        raise DomainError("point lies outside the chart ball")
    v = chart.surface.log(chart.base_point, q)
    return chart.frame @ v


def chart_pushforward(mu: MeasureApprox, charts: list[ChartMap]) -> MeasureApprox:
    """Push surface atoms to the plane through the first chart containing each.

    Chart target disks must be pairwise disjoint; total mass is preserved
    exactly (weights are copied unmodified).
    """
    if not charts:
        raise ValidationError("need at least one chart")
    for i in range(len(charts)):
        for j in range(i + 1, len(charts)):
            gap = np.linalg.norm(charts[i].center - charts[j].center)
            if gap < charts[i].eps + charts[j].eps:
                raise ValidationError("chart target disks overlap")
    assigned = np.full(mu.atom_count, -1)
    for ci, chart in enumerate(charts):
        mask = (assigned < 0) & chart.contains(mu.atoms)
        assigned[mask] = ci
    if np.any(assigned < 0):
        missing = int(np.sum(assigned < 0))
        raise CoverageError(f"{missing} atoms not covered by any chart")
    out_dim = charts[0].center.size
    pts = np.empty((mu.atom_count, out_dim))
    for ci, chart in enumerate(charts):
        mask = assigned == ci
        if np.any(mask):
            pts[mask] = chart.forward(mu.atoms[mask])
    return MeasureApprox(pts, mu.weights.copy(), level=mu.level,
                         resolution=mu.resolution, dropped_mass=mu.dropped_mass,
                         meta={"pushforward_charts": len(charts)})
