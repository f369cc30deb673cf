"""Smooth bump phantoms and the target data for the shipped experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, DomainError
from .discrete import DetectorGrid, ProjectionData
from .geometry import HALF_FAN_ANGLE, ImageDomain, reference_view_ranges

# Angular half-width of the support of the inconceivable target on view 2.
SUPPORT_HALF_ANGLE = math.atan2(1.0, 6.0)


@dataclass(frozen=True)
class Bump:
    """One mollifier bump: ``amplitude * exp(-1 / (1 - |x - center|^2 / radius^2))``."""

    center: tuple[float, float]
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigurationError("bump radius must be positive")


@dataclass(frozen=True)
class Phantom:
    """Finite sum of mollifier bumps; infinitely smooth, compactly supported."""

    bumps: tuple[Bump, ...]

    def __post_init__(self):
        object.__setattr__(self, "bumps", tuple(self.bumps))
        if not self.bumps:
            raise ConfigurationError("phantom needs at least one bump")

    def __call__(self, points):
        return bump_eval(self, points)


def bump_eval(phantom: Phantom, points) -> np.ndarray:
    """Evaluate the phantom at points of shape (..., 2)."""
    x = np.asarray(points, dtype=float)
    out = np.zeros(x.shape[:-1], dtype=float)
    for b in phantom.bumps:
        d = x - np.asarray(b.center)
        s2 = (d[..., 0] ** 2 + d[..., 1] ** 2) / (b.radius**2)
        inside = s2 < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            vals = np.where(inside, np.exp(-1.0 / np.maximum(1.0 - s2, 1e-300)), 0.0)
        out += b.amplitude * vals
    return out


@lru_cache(maxsize=None)
def _radial_moment(p: float) -> float:
    # integral over [0, 1] of s * exp(-p / (1 - s^2)) ds by composite
    # Gauss-Legendre; the integrand is smooth and flat at s = 1.
    nodes, weights = np.polynomial.legendre.leggauss(24)
    panels = 16
    edges = np.linspace(0.0, 1.0, panels + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        s = 0.5 * (b - a) * (nodes + 1.0) + a
        with np.errstate(divide="ignore", over="ignore"):
            vals = s * np.exp(-p / np.maximum(1.0 - s * s, 1e-300))
        total += 0.5 * (b - a) * float(weights @ vals)
    return total


def mollifier_unit_mass() -> float:
    """Integral of the unit bump (radius 1, amplitude 1) over the plane."""
    return 2.0 * math.pi * _radial_moment(1.0)


def mollifier_unit_l2sq() -> float:
    """Squared L2 norm of the unit bump."""
    return 2.0 * math.pi * _radial_moment(2.0)


def phantom_mass(phantom: Phantom) -> float:
    """Integral of the phantom over the plane (linear, so overlaps are fine)."""
    u = mollifier_unit_mass()
    return sum(b.amplitude * b.radius**2 * u for b in phantom.bumps)


def _supports_disjoint(phantom: Phantom) -> bool:
    bs = phantom.bumps
    for i in range(len(bs)):
        for j in range(i + 1, len(bs)):
            d = math.hypot(bs[i].center[0] - bs[j].center[0], bs[i].center[1] - bs[j].center[1])
            if d < bs[i].radius + bs[j].radius:
                return False
    return True


def phantom_l2_norm(phantom: Phantom) -> float:
    """L2 norm of the phantom.

    Analytic per bump when supports are pairwise disjoint; otherwise a
    tensor-product quadrature over the union bounding box.
    """
    if _supports_disjoint(phantom):
        u = mollifier_unit_l2sq()
        return math.sqrt(sum(b.amplitude**2 * b.radius**2 * u for b in phantom.bumps))
    xmin = min(b.center[0] - b.radius for b in phantom.bumps)
    xmax = max(b.center[0] + b.radius for b in phantom.bumps)
    ymin = min(b.center[1] - b.radius for b in phantom.bumps)
    ymax = max(b.center[1] + b.radius for b in phantom.bumps)
    nodes, weights = np.polynomial.legendre.leggauss(32)
    panels = 24
    xedges = np.linspace(xmin, xmax, panels + 1)
    yedges = np.linspace(ymin, ymax, panels + 1)
    total = 0.0
    for xa, xb in zip(xedges[:-1], xedges[1:]):
        xs = 0.5 * (xb - xa) * (nodes + 1.0) + xa
        for ya, yb in zip(yedges[:-1], yedges[1:]):
            ys = 0.5 * (yb - ya) * (nodes + 1.0) + ya
            xx, yy = np.meshgrid(xs, ys)
            pts = np.stack([xx, yy], axis=-1)
            vals = bump_eval(phantom, pts) ** 2
            total += 0.25 * (xb - xa) * (yb - ya) * float(weights @ vals @ weights)
    return math.sqrt(total)


def random_phantom(
    rng: np.random.Generator,
    domain: ImageDomain,
    n_bumps: int = 3,
    radius_range: tuple[float, float] = (3.0, 8.0),
    amplitude_range: tuple[float, float] = (0.5, 2.0),
    clearance: float = 1.0,
    max_tries: int = 5000,
) -> Phantom:
    """Random bumps with pairwise disjoint supports strictly inside the domain."""
    boundary = domain.boundary_points(720)
    xmin, xmax, ymin, ymax = domain.bbox()
    bumps: list[Bump] = []
    tries = 0
    while len(bumps) < n_bumps:
        if tries >= max_tries:
            raise ConfigurationError("could not place the requested bumps inside the domain")
        tries += 1
        c = np.array([rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)])
        radius = rng.uniform(*radius_range)
        if not domain.contains(c):
            continue
        if float(np.min(np.hypot(*(boundary - c).T))) < radius + clearance:
            continue
        if any(
            math.hypot(c[0] - b.center[0], c[1] - b.center[1]) < radius + b.radius + 0.5 * clearance
            for b in bumps
        ):
            continue
        bumps.append(Bump(center=(float(c[0]), float(c[1])), radius=float(radius), amplitude=float(rng.uniform(*amplitude_range))))
    return Phantom(bumps=tuple(bumps))


# ---------------------------------------------------------------------------
# The inconceivable target


def inconceivable_g2(r) -> np.ndarray:
    """View-2 target profile versus angle ``r`` relative to the central ray.

    ``1/4 - 9 tan(r)^2`` inside ``|r| < atan(1/6)``, zero on the rest of the
    view wedge.  Mimics data no function on the image domain can produce
    exactly while view 1 stays identically zero.

    Raises
    ------
    DomainError
        If any ``|r|`` reaches the wedge half-angle atan(5/12).
    """
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(r) >= HALF_FAN_ANGLE):
        raise DomainError("angle outside the view wedge")
    t = np.tan(r)
    return np.where(np.abs(r) < SUPPORT_HALF_ANGLE, 0.25 - 9.0 * t * t, 0.0)


@dataclass(frozen=True, eq=False)
class TargetData:
    """Measured (or prescribed) data for both views of a pair."""

    view1: ProjectionData
    view2: ProjectionData

    @property
    def g1(self) -> np.ndarray:
        return self.view1.values

    @property
    def g2(self) -> np.ndarray:
        return self.view2.values


def reference_target(n_bins: int = 400) -> TargetData:
    """Zero on view 1, the inconceivable profile on view 2."""
    (lo1, hi1), (lo2, hi2) = reference_view_ranges()
    d1 = DetectorGrid(1, n_bins, lo1, hi1)
    d2 = DetectorGrid(2, n_bins, lo2, hi2)
    g2 = inconceivable_g2(d2.centers - d2.center)
    return TargetData(
        view1=ProjectionData(grid=d1, values=np.zeros(n_bins)),
        view2=ProjectionData(grid=d2, values=g2),
    )
