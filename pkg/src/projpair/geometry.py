"""Curve-family geometry: parallel and fan parametrizations, pair setups.

Angles are radians and lengths are centimeters throughout the library; the
command line converts from degrees at its boundary.

Conventions
-----------
``direction(a)`` is the unit vector ``(cos a, sin a)`` and ``perp(v)`` rotates
a vector by ninety degrees counterclockwise, so
``perp(direction(a)) == direction(a + pi/2)`` and
``perp(a) . b == cross(a, b)``.

A parallel family indexed by signed offset ``r``::

    point(r, t) = r * direction(theta) + t * perp(direction(theta))

A fan family with vertex ``v`` indexed by absolute ray angle ``r``::

    point(r, t) = v + t * direction(r),   t > 0

Fan angles live on the branch ``[theta0, theta0 + 2*pi)``.  Other curve
families can be supplied by the caller: any object with ``point(r, t)``,
``inverse(x)``, ``jacobian_inv(x)`` and ``weight(r, t)`` methods works
wherever a geometry is accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from .errors import ConfigurationError, DomainError, ParallelRaysError, SingularPointError

# Degenerate denominators (parallel rays, zero dot products) are detected at
# this absolute threshold.
DENOM_TOL = 1e-12

# Reference dual-vertex configuration used by the shipped experiment.
REFERENCE_VERTEX_1 = (0.0, 80.0)
REFERENCE_VERTEX_2 = (-80.0, 0.0)
ATTENUATION_MU = -0.154
HALF_FAN_ANGLE = math.atan2(5.0, 12.0)
DOMAIN_HALF_EXTENT = 35.0


def direction(angle):
    """Unit vector(s) ``(cos angle, sin angle)``; shape ``angle.shape + (2,)``."""
    a = np.asarray(angle, dtype=float)
    return np.stack([np.cos(a), np.sin(a)], axis=-1)


def perp(v):
    """Rotate vector(s) by +90 degrees: ``(x, y) -> (-y, x)``."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def cross2(a, b):
    """Scalar cross product ``a_x b_y - a_y b_x`` (equals ``perp(a) . b``)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def lift_angle(angle, theta0):
    """Shift ``angle`` by a multiple of 2*pi into ``[theta0, theta0 + 2*pi)``."""
    a = np.asarray(angle, dtype=float)
    return np.mod(a - theta0, 2.0 * math.pi) + theta0


@runtime_checkable
class CurveFamily(Protocol):
    """Structural interface for user-supplied curve parametrizations."""

    def point(self, r, t): ...

    def inverse(self, x): ...

    def jacobian_inv(self, x): ...

    def weight(self, r, t): ...


# ---------------------------------------------------------------------------
# Parallel family


@dataclass(frozen=True)
class ParGeometry:
    """Parallel-beam family at angle ``theta``; unit weight."""

    theta: float

    def point(self, r, t):
        return par_point(self, r, t)

    def inverse(self, x):
        return par_inverse(self, x)

    def jacobian_inv(self, x):
        x = np.asarray(x, dtype=float)
        return np.ones(x.shape[:-1], dtype=float)

    def weight(self, r, t):
        r, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(t, float))
        return np.ones_like(t)


def par_point(geom: ParGeometry, r, t):
    """Point at offset ``r``, arc parameter ``t`` on the parallel family."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    d = direction(geom.theta)
    return r[..., None] * d + t[..., None] * perp(d)


def par_inverse(geom: ParGeometry, x):
    """Return ``(r, t)`` with ``par_point(geom, r, t) == x``. Exact inverse."""
    x = np.asarray(x, dtype=float)
    d = direction(geom.theta)
    return x @ d, x @ perp(d)


# ---------------------------------------------------------------------------
# Fan family


@dataclass(frozen=True, eq=False)
class FanGeometry:
    """Fan-beam family from ``vertex``; exponential weight ``exp(mu * t)``.

    ``theta0`` fixes the angular branch ``[theta0, theta0 + 2*pi)`` on which
    ray angles are reported; it must be chosen so the branch cut misses the
    image domain.  ``mu = 0`` gives the unweighted divergent-beam transform.
    """

    vertex: tuple[float, float]
    theta0: float = -math.pi
    mu: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "vertex", (float(self.vertex[0]), float(self.vertex[1])))

    @property
    def vertex_xy(self) -> np.ndarray:
        return np.array(self.vertex, dtype=float)

    def point(self, r, t):
        return fan_point(self, r, t)

    def inverse(self, x):
        return fan_inverse(self, x)

    def jacobian_inv(self, x):
        return fan_jacobian_inv(self, x)

    def weight(self, r, t):
        r, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(t, float))
        return np.exp(self.mu * t)


def fan_point(geom: FanGeometry, r, t):
    """Point at distance ``t > 0`` along the ray at absolute angle ``r``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise DomainError("fan parameter t must be positive")
    r = np.asarray(r, dtype=float)
    return geom.vertex_xy + t[..., None] * direction(r)


def fan_inverse(geom: FanGeometry, x):
    """Return ``(r, t)``: ray angle on the branch and distance to the vertex.

    Raises
    ------
    SingularPointError
        If ``x`` coincides with the vertex (no ray through it is defined).
    """
    x = np.asarray(x, dtype=float)
    d = x - geom.vertex_xy
    t = np.hypot(d[..., 0], d[..., 1])
    if np.any(t < DENOM_TOL):
        raise SingularPointError("point coincides with the fan vertex")
    r = lift_angle(np.arctan2(d[..., 1], d[..., 0]), geom.theta0)
    return r, t


def fan_jacobian_inv(geom: FanGeometry, x):
    """|det of the derivative of the inverse fan map| = 1 / |x - vertex|."""
    x = np.asarray(x, dtype=float)
    d = x - geom.vertex_xy
    t = np.hypot(d[..., 0], d[..., 1])
    if np.any(t < DENOM_TOL):
        raise SingularPointError("jacobian of the inverse map blows up at the vertex")
    return 1.0 / t


# ---------------------------------------------------------------------------
# Ray intersections across two families


def fanfan_tau(r1, r2, vertex1, vertex2):
    """Arc parameters ``(t1, t2)`` where fan rays ``r1`` (from ``vertex1``)
    and ``r2`` (from ``vertex2``) intersect.

    Solves ``vertex1 + t1*direction(r1) == vertex2 + t2*direction(r2)``:

        t1 = -perp(direction(r2)) . dl / (perp(direction(r1)) . direction(r2))
        t2 = -perp(direction(r1)) . dl / (perp(direction(r1)) . direction(r2))

    with ``dl = vertex2 - vertex1``.  Negative values mean the intersection
    lies on the backward extension of a ray; callers decide whether that is
    acceptable.
    """
    v1 = np.asarray(vertex1, dtype=float)
    v2 = np.asarray(vertex2, dtype=float)
    dl = v2 - v1
    d1 = direction(r1)
    d2 = direction(r2)
    den = np.sum(perp(d1) * d2, axis=-1)
    if np.any(np.abs(den) < DENOM_TOL):
        raise ParallelRaysError("rays are parallel; no intersection parameters")
    t1 = -np.sum(perp(d2) * dl, axis=-1) / den
    t2 = -np.sum(perp(d1) * dl, axis=-1) / den
    return t1, t2


def fanfan_X(r1, r2, vertex1, vertex2):
    """Intersection point of two fan rays, ``vertex1 + t1*direction(r1)``."""
    v1 = np.asarray(vertex1, dtype=float)
    t1, _ = fanfan_tau(r1, r2, vertex1, vertex2)
    return v1 + t1[..., None] * direction(r1)


def parfan_X(theta, r1, r2, vertex):
    """Intersection of the parallel line at offset ``r1`` (family angle
    ``theta``) with the fan ray at absolute angle ``r2`` from ``vertex``.

        X = vertex + ((r1 - vertex . d_theta) / (d_theta . direction(r2))) * direction(r2)
    """
    v = np.asarray(vertex, dtype=float)
    dt = direction(theta)
    d2 = direction(r2)
    den = np.sum(dt * d2, axis=-1)
    if np.any(np.abs(den) < DENOM_TOL):
        raise ParallelRaysError("fan ray is parallel to the family lines")
    r1 = np.asarray(r1, dtype=float)
    t2 = (r1 - v @ dt) / den
    return v + t2[..., None] * d2


# ---------------------------------------------------------------------------
# Image domains


def _polygon_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _clip_halfplane(verts: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    # Sutherland-Hodgman clip of a polygon against a . x <= b.
    out = []
    n = len(verts)
    for i in range(n):
        p, q = verts[i], verts[(i + 1) % n]
        pin = float(a @ p) <= b
        qin = float(a @ q) <= b
        if pin:
            out.append(p)
        if pin != qin:
            s = (b - float(a @ p)) / float(a @ (q - p))
            out.append(p + s * (q - p))
    return np.array(out, dtype=float)


@dataclass(frozen=True, eq=False)
class ImageDomain:
    """Bounded open image domain: rectangle, disc, or simple polygon.

    Construct through :meth:`rectangle`, :meth:`disc` or :meth:`polygon`.
    """

    kind: str
    center: tuple[float, float] = (0.0, 0.0)
    half_widths: tuple[float, float] = (0.0, 0.0)
    radius: float = 0.0
    vertices: np.ndarray | None = field(default=None, repr=False)

    @staticmethod
    def rectangle(half_width: float, half_height: float, center=(0.0, 0.0)) -> "ImageDomain":
        if half_width <= 0 or half_height <= 0:
            raise ConfigurationError("rectangle half-widths must be positive")
        return ImageDomain(
            kind="rectangle",
            center=(float(center[0]), float(center[1])),
            half_widths=(float(half_width), float(half_height)),
        )

    @staticmethod
    def disc(center, radius: float) -> "ImageDomain":
        if radius <= 0:
            raise ConfigurationError("disc radius must be positive")
        return ImageDomain(kind="disc", center=(float(center[0]), float(center[1])), radius=float(radius))

    @staticmethod
    def polygon(vertices) -> "ImageDomain":
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ConfigurationError("polygon needs at least three (x, y) vertices")
        if _polygon_area(v) < 0:
            v = v[::-1].copy()
        c = v.mean(axis=0)
        return ImageDomain(kind="polygon", center=(float(c[0]), float(c[1])), vertices=v)

    # -- predicates -----------------------------------------------------

    def contains(self, points) -> np.ndarray:
        """Boolean mask: which points lie strictly inside the domain."""
        x = np.asarray(points, dtype=float)
        scalar = x.ndim == 1
        x = np.atleast_2d(x)
        if self.kind == "rectangle":
            cx, cy = self.center
            hx, hy = self.half_widths
            ok = (np.abs(x[:, 0] - cx) < hx) & (np.abs(x[:, 1] - cy) < hy)
        elif self.kind == "disc":
            c = np.array(self.center)
            ok = np.hypot(*(x - c).T) < self.radius
        else:
            ok = self._polygon_contains(x)
        return ok[0] if scalar else ok

    def _polygon_contains(self, pts: np.ndarray) -> np.ndarray:
        # Even-odd rule, vectorized over points.
        v = self.vertices
        n = len(v)
        inside = np.zeros(len(pts), dtype=bool)
        px, py = pts[:, 0], pts[:, 1]
        for i in range(n):
            x1, y1 = v[i]
            x2, y2 = v[(i + 1) % n]
            crosses = (y1 > py) != (y2 > py)
            with np.errstate(divide="ignore", invalid="ignore"):
                xi = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            inside ^= crosses & (px < np.where(crosses, xi, np.inf))
        return inside

    # -- geometry queries ------------------------------------------------

    def bbox(self) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax) of the closure."""
        if self.kind == "rectangle":
            cx, cy = self.center
            hx, hy = self.half_widths
            return cx - hx, cx + hx, cy - hy, cy + hy
        if self.kind == "disc":
            cx, cy = self.center
            r = self.radius
            return cx - r, cx + r, cy - r, cy + r
        v = self.vertices
        return float(v[:, 0].min()), float(v[:, 0].max()), float(v[:, 1].min()), float(v[:, 1].max())

    def reference_point(self) -> np.ndarray:
        """A point inside the domain (centroid for the shipped shapes)."""
        return np.array(self.center, dtype=float)

    def boundary_points(self, n: int) -> np.ndarray:
        """``n`` points on the boundary, spaced by arc length, shape (n, 2)."""
        if n < 3:
            raise ConfigurationError("need at least three boundary samples")
        if self.kind == "disc":
            a = 2.0 * math.pi * (np.arange(n) + 0.5) / n
            return np.array(self.center) + self.radius * direction(a)
        verts = self._as_polygon_vertices()
        seg = np.roll(verts, -1, axis=0) - verts
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        total = cum[-1]
        s = total * (np.arange(n) + 0.5) / n
        idx = np.searchsorted(cum, s, side="right") - 1
        idx = np.clip(idx, 0, len(verts) - 1)
        frac = (s - cum[idx]) / lengths[idx]
        return verts[idx] + frac[:, None] * seg[idx]

    def _as_polygon_vertices(self) -> np.ndarray:
        if self.kind == "polygon":
            return self.vertices
        if self.kind == "rectangle":
            cx, cy = self.center
            hx, hy = self.half_widths
            return np.array(
                [[cx - hx, cy - hy], [cx + hx, cy - hy], [cx + hx, cy + hy], [cx - hx, cy + hy]]
            )
        raise ConfigurationError("disc has no polygon representation")

    def chord_length(self, origin, dir_vec, t_min: float | None = None) -> float:
        """Total length of ``{t : origin + t*dir_vec in domain, t > t_min}``.

        ``dir_vec`` must be a unit vector for the result to be a length.
        """
        o = np.asarray(origin, dtype=float)
        d = np.asarray(dir_vec, dtype=float)
        lo = -np.inf if t_min is None else t_min
        if self.kind == "disc":
            oc = o - np.array(self.center)
            b = float(oc @ d)
            c = float(oc @ oc) - self.radius**2
            disc = b * b - c
            if disc <= 0:
                return 0.0
            t0, t1 = -b - math.sqrt(disc), -b + math.sqrt(disc)
            return max(0.0, t1 - max(t0, lo))
        verts = self._as_polygon_vertices()
        ts = []
        n = len(verts)
        for i in range(n):
            p, q = verts[i], verts[(i + 1) % n]
            e = q - p
            den = cross2(d, e)
            if abs(den) < 1e-300:
                continue
            s = cross2(p - o, e) / den
            u = cross2(p - o, d) / den
            if -1e-12 <= u <= 1.0 + 1e-12:
                ts.append(s)
        if len(ts) < 2:
            return 0.0
        ts = sorted(ts)
        total = 0.0
        for a, b in zip(ts[:-1], ts[1:]):
            if b <= lo:
                continue
            a = max(a, lo)
            if b - a < 1e-14:
                continue
            mid = o + 0.5 * (a + b) * d
            if self.contains(mid):
                total += b - a
        return total

    def grid_points(self, nx: int, ny: int) -> np.ndarray:
        """Interior points of a regular nx-by-ny grid over the bounding box."""
        xmin, xmax, ymin, ymax = self.bbox()
        xs = xmin + (xmax - xmin) * (np.arange(nx) + 0.5) / nx
        ys = ymin + (ymax - ymin) * (np.arange(ny) + 0.5) / ny
        xx, yy = np.meshgrid(xs, ys)
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        return pts[self.contains(pts)]


# ---------------------------------------------------------------------------
# Pairs and admissibility


@dataclass(frozen=True, eq=False)
class PairGeometry:
    """Two curve families over a common image domain.

    Mixed pairs must put the parallel family first; this keeps the component
    indexing of data and kernels unambiguous.
    """

    first: ParGeometry | FanGeometry
    second: ParGeometry | FanGeometry
    domain: ImageDomain

    def __post_init__(self):
        if isinstance(self.first, FanGeometry) and isinstance(self.second, ParGeometry):
            raise ConfigurationError("mixed pairs must be ordered (parallel, fan); swap the views")

    @property
    def kind(self) -> str:
        a = "par" if isinstance(self.first, ParGeometry) else "fan"
        b = "par" if isinstance(self.second, ParGeometry) else "fan"
        return f"{a}-{b}"


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of an admissibility check.

    ``margins`` maps named inequalities to their worst-case slack over the
    boundary sampling; every entry must exceed the threshold for ``passed``.
    ``orientation`` is the sign that makes the fan-fan half-plane inequality
    positive on the domain (None for other kinds).
    """

    kind: str
    passed: bool
    margins: dict[str, float]
    orientation: int | None = None


def view_range(geom, domain: ImageDomain, n_boundary: int = 1024) -> tuple[float, float]:
    """Range of the ray parameter over the domain, from boundary samples.

    For a parallel family this is an offset interval; for a fan it is an
    angular interval on the branch.  The parameter of any curve family
    attains its extremes over the closure on the boundary.
    """
    pts = domain.boundary_points(n_boundary)
    r, _ = geom.inverse(pts)
    return float(np.min(r)), float(np.max(r))


def check_fan_admissible(geom: FanGeometry, domain: ImageDomain, n_boundary: int = 1024) -> AdmissibilityReport:
    """Admissibility of a single fan over a domain.

    Margins: ``vertex_clearance`` (distance from the vertex to the domain,
    negative if the vertex is inside) and ``branch_clearance`` (angular
    distance of the domain's ray angles from the branch cut).
    """
    pts = domain.boundary_points(n_boundary)
    dist = float(np.min(np.hypot(*(pts - geom.vertex_xy).T)))
    if domain.contains(geom.vertex_xy):
        dist = -dist
    margins = {"vertex_clearance": dist}
    if dist > 0:
        r, _ = fan_inverse(geom, pts)
        margins["branch_clearance"] = float(
            min(np.min(r) - geom.theta0, geom.theta0 + 2.0 * math.pi - np.max(r))
        )
    else:
        margins["branch_clearance"] = -math.inf
    passed = all(m > 0.0 for m in margins.values())
    return AdmissibilityReport(kind="fan", passed=passed, margins=margins)


def _parpar_margins(g1: ParGeometry, g2: ParGeometry) -> dict[str, float]:
    d = math.remainder(g1.theta - g2.theta, math.pi)
    return {"angle_separation": abs(d)}


def _parfan_margins(g1: ParGeometry, g2: FanGeometry, domain: ImageDomain, n: int) -> dict[str, float]:
    pts = domain.boundary_points(n)
    r1, _ = par_inverse(g1, pts)
    r2, _ = fan_inverse(g2, pts)
    s0 = float(g2.vertex_xy @ direction(g1.theta))
    lo, hi = float(np.min(r1)), float(np.max(r1))
    offset = min(abs(s0 - lo), abs(s0 - hi))
    if lo <= s0 <= hi:
        offset = -offset
    cosv = np.cos(g1.theta - r2)
    cos_min = float(np.min(np.abs(cosv)))
    if np.min(cosv) < 0.0 < np.max(cosv):
        cos_min = -cos_min
    return {"offset_clearance": offset, "cos_clearance": cos_min}


def _fanfan_margins(
    g1: FanGeometry, g2: FanGeometry, domain: ImageDomain, n: int
) -> tuple[dict[str, float], int]:
    dl = g2.vertex_xy - g1.vertex_xy
    norm_dl = float(np.hypot(*dl))
    if norm_dl < DENOM_TOL:
        raise ConfigurationError("fan vertices coincide")
    s = 1 if cross2(domain.reference_point() - g1.vertex_xy, dl) > 0 else -1
    pts = domain.boundary_points(n)
    r1, _ = fan_inverse(g1, pts)
    r2, _ = fan_inverse(g2, pts)
    d1, d2 = direction(r1), direction(r2)
    margins = {
        "line_clearance": float(np.min(s * cross2(pts - g1.vertex_xy, dl) / norm_dl)),
        "ray_pair": float(np.min(-s * np.sum(perp(d1) * d2, axis=-1))),
        "dl_dot_1": float(np.min(s * perp(d1) @ dl)),
        "dl_dot_2": float(np.min(s * perp(d2) @ dl)),
    }
    return margins, s


def check_pair_admissible(
    pair: PairGeometry, n_boundary: int = 1024, min_margin: float = 0.0
) -> AdmissibilityReport:
    """Check the range-condition admissibility inequalities for a pair.

    All inequalities are evaluated on a dense boundary sampling of the domain
    (the relevant quantities attain their extremes there).  For fan-fan pairs
    the orientation sign that makes the domain sit on the positive side of
    the line through the two vertices is folded into the margins and
    reported, so admissibility never depends on the labeling order of the
    vertices.
    """
    kind = pair.kind
    orientation: int | None = None
    if kind == "par-par":
        margins = _parpar_margins(pair.first, pair.second)
    elif kind == "par-fan":
        margins = _parfan_margins(pair.first, pair.second, pair.domain, n_boundary)
        margins.update(
            {"fan_" + k: v for k, v in check_fan_admissible(pair.second, pair.domain, n_boundary).margins.items()}
        )
    elif kind == "fan-fan":
        margins, orientation = _fanfan_margins(pair.first, pair.second, pair.domain, n_boundary)
        for tag, geom in (("fan1_", pair.first), ("fan2_", pair.second)):
            margins.update(
                {tag + k: v for k, v in check_fan_admissible(geom, pair.domain, n_boundary).margins.items()}
            )
    else:  # pragma: no cover - PairGeometry forbids (fan, par)
        raise ConfigurationError(f"unsupported pair kind {kind!r}")
    passed = all(m > min_margin for m in margins.values())
    return AdmissibilityReport(kind=kind, passed=passed, margins=margins, orientation=orientation)


def pair_orientation(pair: PairGeometry) -> int:
    """Orientation sign of a fan-fan pair (+1 if the domain lies on the
    positive side of the vertex line in the labeled order)."""
    if pair.kind != "fan-fan":
        raise ConfigurationError("orientation is defined for fan-fan pairs only")
    dl = pair.second.vertex_xy - pair.first.vertex_xy
    return 1 if cross2(pair.domain.reference_point() - pair.first.vertex_xy, dl) > 0 else -1


# ---------------------------------------------------------------------------
# Reference configuration


def reference_domain() -> ImageDomain:
    """Convex polygon used by the shipped experiment.

    The square of half-extent 35 clipped so that, seen from either reference
    vertex, the domain subtends exactly the half fan angle atan(5/12).
    """
    h = DOMAIN_HALF_EXTENT
    square = np.array([[-h, -h], [h, -h], [h, h], [-h, h]])
    # |y| <= (5/12)(x + 80)  and  |x| <= (5/12)(80 - y), as a.x <= b rows.
    halfplanes = [
        (np.array([-5.0, 12.0]), 400.0),
        (np.array([-5.0, -12.0]), 400.0),
        (np.array([12.0, 5.0]), 400.0),
        (np.array([-12.0, 5.0]), 400.0),
    ]
    verts = square
    for a, b in halfplanes:
        verts = _clip_halfplane(verts, a, b)
    return ImageDomain.polygon(verts)


def reference_pair(mu: float = ATTENUATION_MU) -> PairGeometry:
    """The dual-vertex exponential fan pair over the reference domain."""
    theta0 = 3.0 * math.pi / 4.0
    return PairGeometry(
        first=FanGeometry(vertex=REFERENCE_VERTEX_1, theta0=theta0, mu=mu),
        second=FanGeometry(vertex=REFERENCE_VERTEX_2, theta0=theta0, mu=mu),
        domain=reference_domain(),
    )


def reference_view_ranges() -> tuple[tuple[float, float], tuple[float, float]]:
    """Exact angular ranges subtended by the reference domain, per view.

    View 1 looks straight down (central ray angle 3*pi/2 on the branch),
    view 2 looks along +x (central ray angle 2*pi); both wedges have
    half-angle atan(5/12).
    """
    a = HALF_FAN_ANGLE
    c1 = 1.5 * math.pi
    c2 = 2.0 * math.pi
    return (c1 - a, c1 + a), (c2 - a, c2 + a)


# ---------------------------------------------------------------------------
# Serialization


def _format_float(x: float) -> str:
    return format(float(x), ".17g")


def pair_to_text(pair: PairGeometry) -> str:
    """Serialize a pair as key/value text (radians, centimeters)."""
    lines = []
    for name, geom in (("view1", pair.first), ("view2", pair.second)):
        lines.append(f"[{name}]")
        if isinstance(geom, ParGeometry):
            lines.append("kind = parallel")
            lines.append(f"theta = {_format_float(geom.theta)}")
        else:
            lines.append("kind = fan")
            lines.append(f"vertex = {_format_float(geom.vertex[0])} {_format_float(geom.vertex[1])}")
            lines.append(f"theta0 = {_format_float(geom.theta0)}")
            lines.append(f"mu = {_format_float(geom.mu)}")
        lines.append("")
    d = pair.domain
    lines.append("[domain]")
    lines.append(f"kind = {d.kind}")
    if d.kind == "rectangle":
        lines.append(f"center = {_format_float(d.center[0])} {_format_float(d.center[1])}")
        lines.append(f"half_widths = {_format_float(d.half_widths[0])} {_format_float(d.half_widths[1])}")
    elif d.kind == "disc":
        lines.append(f"center = {_format_float(d.center[0])} {_format_float(d.center[1])}")
        lines.append(f"radius = {_format_float(d.radius)}")
    else:
        flat = " ".join(_format_float(v) for v in d.vertices.ravel())
        lines.append(f"vertices = {flat}")
    lines.append("")
    return "\n".join(lines)


def pair_from_text(text: str) -> PairGeometry:
    """Inverse of :func:`pair_to_text`."""
    import configparser

    cp = configparser.ConfigParser()
    cp.read_string(text)
    geoms = []
    for name in ("view1", "view2"):
        sec = cp[name]
        if sec["kind"] == "parallel":
            geoms.append(ParGeometry(theta=float(sec["theta"])))
        elif sec["kind"] == "fan":
            vx, vy = (float(v) for v in sec["vertex"].split())
            geoms.append(FanGeometry(vertex=(vx, vy), theta0=float(sec["theta0"]), mu=float(sec["mu"])))
        else:
            raise ConfigurationError(f"unknown geometry kind {sec['kind']!r}")
    dsec = cp["domain"]
    dkind = dsec["kind"]
    if dkind == "rectangle":
        cx, cy = (float(v) for v in dsec["center"].split())
        hx, hy = (float(v) for v in dsec["half_widths"].split())
        dom = ImageDomain.rectangle(hx, hy, center=(cx, cy))
    elif dkind == "disc":
        cx, cy = (float(v) for v in dsec["center"].split())
        dom = ImageDomain.disc((cx, cy), float(dsec["radius"]))
    elif dkind == "polygon":
        vals = np.array([float(v) for v in dsec["vertices"].split()])
        dom = ImageDomain.polygon(vals.reshape(-1, 2))
    else:
        raise ConfigurationError(f"unknown domain kind {dkind!r}")
    return PairGeometry(first=geoms[0], second=geoms[1], domain=dom)
