"""Range conditions for projection pairs.

A pair of projections satisfies a pairwise range condition when there are
weight functions (kernels) ``V1, V2`` on the two ray-parameter ranges with

    integral g1 * V1 = integral g2 * V2      for all consistent data pairs.

Kernels exist exactly when the kernel condition holds: the ratio of the
(weight times inverse-map-jacobian) factors of the two families, evaluated
at the intersection point of two rays, must separate into a function of the
first ray parameter times a function of the second.  This module evaluates
both sides for the shipped families, returns the known closed-form kernels,
and tests separability of the exponential fan-fan family, which has none.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateKernelError,
    DomainError,
    EvaluationError,
    ResolutionError,
)
from .geometry import (
    DENOM_TOL,
    FanGeometry,
    ImageDomain,
    PairGeometry,
    ParGeometry,
    cross2,
    direction,
    fan_inverse,
    fanfan_X,
    lift_angle,
    pair_orientation,
    parfan_X,
    perp,
    view_range,
)


@dataclass(frozen=True)
class KernelPair:
    """Kernels witnessing a pairwise range condition.

    Kernels are unique up to one common constant factor; the shipped ones are
    normalized positive on the data ranges, recorded by ``sign``.
    """

    v1: Callable[[np.ndarray], np.ndarray]
    v2: Callable[[np.ndarray], np.ndarray]
    sign: int = 1
    label: str = ""

    @staticmethod
    def from_samples(r1, v1, r2, v2, sign: int = 1, label: str = "sampled") -> "KernelPair":
        r1 = np.asarray(r1, float)
        v1 = np.asarray(v1, float)
        r2 = np.asarray(r2, float)
        v2 = np.asarray(v2, float)
        return KernelPair(
            v1=lambda r: np.interp(r, r1, v1),
            v2=lambda r: np.interp(r, r2, v2),
            sign=sign,
            label=label,
        )


def known_kernels(pair: PairGeometry, n_boundary: int = 1024) -> KernelPair | None:
    """Closed-form kernels for the pair, or None when none exist.

    parallel-parallel: constants.  parallel-fan: ``1/(r1 - s0)`` and
    ``1/cos(theta - r2)`` with ``s0`` the offset of the vertex.  Unweighted
    fan-fan: ``1/(perp(direction(ri)) . dl)`` with ``dl`` the oriented vertex
    difference.  Exponential fan-fan (``mu != 0``): no kernels exist.
    """
    kind = pair.kind
    if kind == "par-par":
        return KernelPair(
            v1=lambda r: np.ones_like(np.asarray(r, float)),
            v2=lambda r: np.ones_like(np.asarray(r, float)),
            sign=1,
            label="parallel-parallel constants",
        )
    if kind == "par-fan":
        theta = pair.first.theta
        s0 = float(pair.second.vertex_xy @ direction(theta))
        lo1, hi1 = view_range(pair.first, pair.domain, n_boundary)
        flip = -1.0 if 0.5 * (lo1 + hi1) - s0 < 0 else 1.0

        def v1(r, s0=s0, flip=flip):
            return flip / (np.asarray(r, float) - s0)

        def v2(r, theta=theta, flip=flip):
            return flip / np.cos(theta - np.asarray(r, float))

        return KernelPair(v1=v1, v2=v2, sign=1, label="parallel-fan")
    # fan-fan
    mu1 = pair.first.mu
    mu2 = pair.second.mu
    if mu1 != 0.0 or mu2 != 0.0:
        return None
    s = pair_orientation(pair)
    dls = s * (pair.second.vertex_xy - pair.first.vertex_xy)

    def kernel(r, dls=dls):
        return 1.0 / (perp(direction(np.asarray(r, float))) @ dls)

    return KernelPair(v1=kernel, v2=kernel, sign=1, label="fan-fan unweighted")


def _as_views(target):
    if hasattr(target, "view1") and hasattr(target, "view2"):
        return target.view1, target.view2
    a, b = target
    return a, b


def pprc_sides(target, kernels: KernelPair) -> tuple[float, float]:
    """Trapezoid estimates of ``integral g1 V1`` and ``integral g2 V2``."""
    d1, d2 = _as_views(target)
    total = []
    for data, kern in ((d1, kernels.v1), (d2, kernels.v2)):
        r = data.grid.centers
        w = np.asarray(kern(r), dtype=float)
        if not np.all(np.isfinite(w)):
            bad = r[~np.isfinite(w)][0]
            raise EvaluationError(f"kernel value not finite at r = {bad!r}")
        total.append(float(np.trapezoid(data.values * w, r)))
    return total[0], total[1]


def pprc_residual(target, kernels: KernelPair) -> float:
    """Trapezoid estimate of ``integral g1 V1 - integral g2 V2``.

    Consistent data gives zero up to quadrature error; the sign of a nonzero
    residual is meaningful (the kernels carry a definite normalization).
    """
    left, right = pprc_sides(target, kernels)
    return left - right


# ---------------------------------------------------------------------------
# Kernel condition


def _pair_X(pair: PairGeometry, r1, r2) -> np.ndarray:
    kind = pair.kind
    if kind == "fan-fan":
        return fanfan_X(r1, r2, pair.first.vertex_xy, pair.second.vertex_xy)
    if kind == "par-fan":
        return parfan_X(pair.first.theta, r1, r2, pair.second.vertex_xy)
    # parallel-parallel: solve the two offset equations.
    d1 = direction(pair.first.theta)
    d2 = direction(pair.second.theta)
    den = cross2(d1, d2)
    if abs(den) < DENOM_TOL:
        raise DomainError("parallel-parallel pair with equal directions has no intersection map")
    r1 = np.asarray(r1, float)
    r2 = np.asarray(r2, float)
    return (r1[..., None] * perp(d2) * (-1.0) + r2[..., None] * perp(d1)) / den


def _factor(geom, x) -> np.ndarray:
    """weight(at the point) times |det D inverse| for one family."""
    if isinstance(geom, ParGeometry):
        x = np.asarray(x, float)
        return np.ones(x.shape[:-1])
    r, t = geom.inverse(x)
    return geom.weight(r, t) * geom.jacobian_inv(x)


def sample_intersections(pair: PairGeometry, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Ray-parameter pairs of points of the domain, at least ``n`` of them."""
    m = max(4, int(math.ceil(math.sqrt(2.0 * n))))
    pts = pair.domain.grid_points(m, m)
    while len(pts) < n:
        m = int(m * 1.5) + 1
        pts = pair.domain.grid_points(m, m)
    r1, _ = pair.first.inverse(pts)
    r2, _ = pair.second.inverse(pts)
    return r1, r2


def kernel_condition_residual(
    pair: PairGeometry,
    kernels: KernelPair,
    samples: tuple[np.ndarray, np.ndarray] | None = None,
    n: int = 1024,
) -> float:
    """Worst relative mismatch between the two sides of the kernel condition.

    The left side is the factor ratio of the two families at the
    intersection point; the right side is ``V2(r2) / V1(r1)``.  Sample pairs
    default to rays through points of the domain.
    """
    if samples is None:
        r1, r2 = sample_intersections(pair, n)
    else:
        r1 = np.asarray(samples[0], float).ravel()
        r2 = np.asarray(samples[1], float).ravel()
    x = _pair_X(pair, r1, r2)
    inside = pair.domain.contains(x)
    if not np.all(inside):
        k = int(np.flatnonzero(~inside)[0])
        raise DomainError(
            f"ray pair ({float(r1[k])!r}, {float(r2[k])!r}) meets outside the image domain"
        )
    lhs = _factor(pair.first, x) / _factor(pair.second, x)
    rhs = kernels.v2(r2) / kernels.v1(r1)
    if not (np.all(np.isfinite(lhs)) and np.all(np.isfinite(rhs))):
        raise EvaluationError("kernel condition produced a non-finite value")
    return float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), np.abs(rhs))))


# ---------------------------------------------------------------------------
# Principal-value variant of the parallel-fan condition


def _gap_trapezoid(r: np.ndarray, y: np.ndarray, holes: list[tuple[float, float]]) -> float:
    keep = np.ones(r.shape, dtype=bool)
    for lo, hi in holes:
        keep &= ~((r > lo) & (r < hi))
    total = 0.0
    idx = np.flatnonzero(keep)
    if idx.size < 2:
        return 0.0
    breaks = np.flatnonzero(np.diff(idx) > 1)
    start = 0
    for b in list(breaks) + [idx.size - 1]:
        seg = idx[start : b + 1]
        if seg.size >= 2:
            total += float(np.trapezoid(y[seg], r[seg]))
        start = b + 1
    return total


def pv_hilbert_residual(target, pair: PairGeometry, eps_values) -> float:
    """Symmetric-exclusion principal-value form of the parallel-fan condition.

    Both side integrals exclude a symmetric ``eps`` neighborhood of their
    stated center (the vertex offset on view 1, the family angle on view 2);
    the residual left-minus-right is evaluated for each ``eps`` and
    extrapolated to ``eps -> 0`` by first-order Richardson over the last
    three values.

    Raises
    ------
    ResolutionError
        If a genuinely singular parameter falls strictly inside a grid and
        closer than half a bin to a sample node: the symmetric cancellation
        the principal value relies on is then unreliable at this resolution.
    """
    if pair.kind != "par-fan":
        raise ConfigurationError("the principal-value condition applies to parallel-fan pairs")
    eps_values = [float(e) for e in eps_values]
    if len(eps_values) < 3:
        raise ConfigurationError("need at least three eps values for extrapolation")
    if any(e <= 0 for e in eps_values):
        raise ConfigurationError("eps values must be positive")
    eps_values = sorted(eps_values, reverse=True)
    d1, d2 = _as_views(target)
    theta = pair.first.theta
    fan = pair.second
    s0 = float(fan.vertex_xy @ direction(theta))

    # Genuine singularities: the vertex offset on view 1; the angles where
    # the fan ray is parallel to the family lines on view 2.
    sing2 = [
        lift_angle(theta + 0.5 * math.pi, fan.theta0),
        lift_angle(theta - 0.5 * math.pi, fan.theta0),
    ]
    for grid, sing in ((d1.grid, [s0]), (d2.grid, sing2)):
        for s in sing:
            if grid.lo < s < grid.hi:
                dist = float(np.min(np.abs(grid.centers - s)))
                if dist < 0.5 * grid.width * (1.0 - 1e-12):
                    raise ResolutionError(
                        f"singular parameter {s!r} lies within half a bin of a sample node"
                    )

    centers2 = [lift_angle(theta, fan.theta0), lift_angle(theta + math.pi, fan.theta0)]
    r1 = d1.grid.centers
    r2 = d2.grid.centers
    with np.errstate(divide="ignore"):
        y1 = d1.values / (r1 - s0)
        y2 = d2.values / np.cos(theta - r2)
    values = []
    for eps in eps_values:
        holes1 = [(s0 - eps, s0 + eps)]
        holes2 = [(c - eps, c + eps) for c in centers2] + [(s - eps, s + eps) for s in sing2]
        left = _gap_trapezoid(r1, y1, holes1)
        right = _gap_trapezoid(r2, y2, holes2)
        values.append(left - right)
    a1 = 2.0 * values[-2] - values[-3]
    a2 = 2.0 * values[-1] - values[-2]
    return (4.0 * a2 - a1) / 3.0


# ---------------------------------------------------------------------------
# Exponential fan-fan: the log kernel-condition surface and separability


def expo_lhs_log(r1, r2, mu: float, vertex1, vertex2):
    """Log of the normalized exponential fan-fan kernel-condition left side.

        mu * ((perp(d1) - perp(d2)) . dl) / (perp(d1) . d2)

    with ``dl = vertex2 - vertex1``.  This equals ``mu * (t1 - t2)`` at the
    ray intersection; the remaining (separable) log factors are dropped.
    """
    d1 = direction(r1)
    d2 = direction(r2)
    dl = np.asarray(vertex2, float) - np.asarray(vertex1, float)
    den = np.sum(perp(d1) * d2, axis=-1)
    if np.any(np.abs(den) < DENOM_TOL):
        raise DomainError("parallel rays: kernel-condition left side undefined")
    return mu * ((perp(d1) - perp(d2)) @ dl) / den


def kernel_lhs_log(r1, r2, mu: float, vertex1, vertex2, orientation: int = 1):
    """Full log of the exponential fan-fan kernel-condition left side.

    Adds the (separable) ``log(perp(di) . dl)`` factors to
    :func:`expo_lhs_log`; ``orientation`` flips ``dl`` so both logs are
    defined on admissible configurations regardless of vertex labeling.
    """
    d1 = direction(r1)
    d2 = direction(r2)
    dls = float(orientation) * (np.asarray(vertex2, float) - np.asarray(vertex1, float))
    p1 = perp(d1) @ dls
    p2 = perp(d2) @ dls
    if np.any(p1 <= 0) or np.any(p2 <= 0):
        raise DomainError("ray angles leave the oriented half-plane; log factor undefined")
    return expo_lhs_log(r1, r2, mu, vertex1, vertex2) + np.log(p1) - np.log(p2)


def eval_G(r1, r1t, r2, r2t, mu: float, dl):
    """Closed-form double difference of the log kernel-condition surface.

    With ``T(a, b) = (perp(direction(a)) - perp(direction(b))) / (perp(direction(a)) . direction(b))``,

        G = mu * (T(r1, r2) - T(r1t, r2) - T(r1, r2t) + T(r1t, r2t)) . dl

    A nonzero value at any admissible quadruple certifies that the surface
    is not additively separable, hence that no kernels exist for mu != 0.
    """
    dl = np.asarray(dl, float)

    def T(a, b):
        da = direction(a)
        db = direction(b)
        den = np.sum(perp(da) * db, axis=-1)
        if np.any(np.abs(den) < DENOM_TOL):
            raise DomainError("zero denominator in the separability bracket")
        return (perp(da) - perp(db)) / den[..., None]

    bracket = T(r1, r2) - T(r1t, r2) - T(r1, r2t) + T(r1t, r2t)
    return mu * (bracket @ dl)


@dataclass(frozen=True)
class SeparabilityReport:
    """Outcome of the additive-separability test on a sampled surface."""

    max_abs_D: float
    argmax: tuple[float, float, float, float]
    threshold: float
    scale: float
    verdict: str
    n_rows: int
    n_cols: int


def separability_test(
    L: np.ndarray,
    r1_values: np.ndarray,
    r2_values: np.ndarray,
    threshold: float | None = None,
    valid: np.ndarray | None = None,
) -> SeparabilityReport:
    """Test whether ``L[i, j] ~ a(r1_i) + b(r2_j)`` on the valid entries.

    Computes the largest double difference
    ``D = L[i,j] - L[it,j] - L[i,jt] + L[it,jt]`` over all quadruples with
    both rows valid at both columns (O(n1^2 * n2) via a running max-min per
    row pair).  ``scale`` is the largest ``|L|``; the default threshold is
    ``1e-8 * scale``.  A surface is separable exactly when D vanishes
    identically.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2:
        raise ConfigurationError("L must be a 2-d array of samples")
    n1, n2 = L.shape
    r1_values = np.asarray(r1_values, float)
    r2_values = np.asarray(r2_values, float)
    if r1_values.size != n1 or r2_values.size != n2:
        raise ConfigurationError("axis value arrays must match the shape of L")
    if valid is None:
        valid = np.isfinite(L)
    else:
        valid = np.asarray(valid, bool) & np.isfinite(L)
    work = np.where(valid, L, np.nan)
    scale = float(np.max(np.abs(work[valid]))) if np.any(valid) else 0.0
    if threshold is None:
        threshold = 1e-8 * scale
    best = -1.0
    arg = (0, 0, 0, 0)
    with np.errstate(invalid="ignore"):
        for i in range(n1 - 1):
            diff = work[i + 1 :, :] - work[i, :][None, :]
            finite = np.isfinite(diff)
            rows_ok = np.sum(finite, axis=1) >= 2
            if not np.any(rows_ok):
                continue
            hi = np.where(finite, diff, -np.inf).max(axis=1)
            lo = np.where(finite, diff, np.inf).min(axis=1)
            spread = np.where(rows_ok, hi - lo, -np.inf)
            k = int(np.argmax(spread))
            if spread[k] > best:
                row = diff[k]
                j_hi = int(np.nanargmax(np.where(np.isfinite(row), row, -np.inf)))
                j_lo = int(np.nanargmin(np.where(np.isfinite(row), row, np.inf)))
                best = float(spread[k])
                arg = (i, i + 1 + k, j_hi, j_lo)
    if best < 0.0:
        raise ConfigurationError("not enough valid samples for any quadruple")
    i, it, j_hi, j_lo = arg
    verdict = "separable" if best <= threshold else "non-separable"
    return SeparabilityReport(
        max_abs_D=best,
        argmax=(float(r1_values[i]), float(r1_values[it]), float(r2_values[j_hi]), float(r2_values[j_lo])),
        threshold=float(threshold),
        scale=scale,
        verdict=verdict,
        n_rows=n1,
        n_cols=n2,
    )


def expo_surface(
    r1_values: np.ndarray,
    r2_values: np.ndarray,
    mu: float,
    vertex1,
    vertex2,
    orientation: int = 1,
    require_order: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Sample the full log kernel-condition surface on a parameter grid.

    Returns ``(L, valid)``; entries with ``r1 <= r2`` (when ``require_order``)
    or with undefined log factors are flagged invalid rather than raising.
    """
    r1 = np.asarray(r1_values, float)[:, None]
    r2 = np.asarray(r2_values, float)[None, :]
    d1 = direction(r1)
    d2 = direction(r2)
    dl = np.asarray(vertex2, float) - np.asarray(vertex1, float)
    dls = float(orientation) * dl
    den = np.sum(perp(d1) * d2, axis=-1)
    p1 = np.broadcast_to(perp(d1) @ dls, den.shape)
    p2 = np.broadcast_to(perp(d2) @ dls, den.shape)
    valid = (np.abs(den) > DENOM_TOL) & (p1 > 0) & (p2 > 0)
    if require_order:
        valid &= np.broadcast_to(r1 > r2, den.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        L = mu * (((perp(d1) - perp(d2)) @ dl) / den) + np.log(p1) - np.log(p2)
    L = np.where(valid, L, np.nan)
    return L, valid
