"""Convex rate regions: per-tuple polytopes, hulls, support functions, membership."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..errors import ValidationError

BOUND_TOL = 1e-9
COLLINEAR_TOL = 1e-9
# Candidate coordinates are rounded to this many decimals before hulling so
# that last-bit noise in the entropy arithmetic cannot create spurious vertices.
ROUND_DECIMALS = 12


class RatePoint(NamedTuple):
    r1: float
    r2: float


@dataclass(frozen=True)
class RateRegion:
    """Convex region of rate pairs.

    ``hull_vertices`` run counterclockwise starting at the origin.
    ``support_samples`` holds ``(lambda, max lambda*r1 + (1-lambda)*r2)``.
    ``empty`` is set when no searched tuple yields a non-empty polytope, in
    which case not even the zero-rate pair is known to be achievable.
    """

    hull_vertices: tuple[RatePoint, ...]
    support_samples: tuple[tuple[float, float], ...] = ()
    empty: bool = False
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.empty and self.hull_vertices:
            raise ValidationError("an empty region cannot have vertices")
        for p in self.hull_vertices:
            if p.r1 < -BOUND_TOL or p.r2 < -BOUND_TOL:
                raise ValidationError(f"vertex {p} outside the non-negative quadrant")

    @classmethod
    def from_points(cls, points, lambdas=(), info=None) -> "RateRegion":
        """Hull of candidate points (origin-containing, down-closed regions)."""
        pts = snap(points)
        if pts.size == 0:
            return cls((), (), True, info or {})
        verts = tuple(RatePoint(float(a), float(b)) for a, b in convex_hull(pts))
        region = cls(verts, (), False, info or {})
        samples = tuple((float(lam), support_function(region, lam)) for lam in lambdas)
        return cls(verts, samples, False, info or {})

    @classmethod
    def from_bounds(cls, bounds, lambdas=(), info=None) -> "RateRegion":
        return cls.from_points(polytope_vertices(bounds), lambdas, info)

    def vertices_array(self) -> np.ndarray:
        return np.array(self.hull_vertices, dtype=float).reshape(-1, 2)

    def support_point(self, lam: float) -> RatePoint:
        """A vertex attaining the support value; ties go to the first vertex in order."""
        v = self._require_vertices()
        vals = lam * v[:, 0] + (1.0 - lam) * v[:, 1]
        best = vals.max()
        i = int(np.flatnonzero(vals >= best - 1e-12)[0])
        return self.hull_vertices[i]

    def _require_vertices(self):
        if self.empty:
            raise ValidationError("support function of an empty region is undefined")
        return self.vertices_array()


def snap(points) -> np.ndarray:
    """Round candidate points to ``ROUND_DECIMALS`` (and turn -0.0 into 0.0)."""
    pts = np.round(np.asarray(points, dtype=float).reshape(-1, 2), ROUND_DECIMALS)
    return pts + 0.0


def normalize_bounds(bounds) -> tuple[np.ndarray, np.ndarray]:
    """Clip bound rows (b1, b2, b12) and flag the rows that describe a non-empty set.

    A negative individual bound pins that rate to zero; a row contributes
    nothing when both individual bounds are negative or the sum bound is.
    Values within ``BOUND_TOL`` below zero count as zero.
    """
    b = np.array(bounds, dtype=float).reshape(-1, 3)
    neg = b < -BOUND_TOL
    ok = ~(neg[:, 2] | (neg[:, 0] & neg[:, 1]))
    return np.maximum(b, 0.0), ok


def polytope_vertices(bounds) -> np.ndarray:
    """Vertices of {r >= 0 : r1 <= b1, r2 <= b2, r1 + r2 <= b12} for each usable bound row.

    See :func:`normalize_bounds` for negative bounds.  Returns an array
    (5 * usable rows, 2); ``b12 = inf`` gives a rectangle.
    """
    b, ok = normalize_bounds(bounds)
    b = b[ok]
    if b.size == 0:
        return np.zeros((0, 2))
    c1 = np.minimum(b[:, 0], b[:, 2])
    c2 = np.minimum(b[:, 1], b[:, 2])
    zero = np.zeros_like(c1)
    corners = [zero, zero, c1, zero, c1, np.minimum(c2, b[:, 2] - c1),
               np.minimum(c1, b[:, 2] - c2), c2, zero, c2]
    pts = np.stack(corners, axis=1).reshape(-1, 2)
    return np.maximum(pts, 0.0)


def polytope_support(bounds, lam: float) -> np.ndarray:
    """Support value of each bound row's polytope in direction (lam, 1-lam); -inf if empty."""
    b, ok = normalize_bounds(bounds)
    c1 = np.minimum(b[:, 0], b[:, 2])
    c2 = np.minimum(b[:, 1], b[:, 2])
    # The greedy vertex is optimal: fill the more heavily weighted rate first.
    if lam >= 0.5:
        r1 = c1
        r2 = np.minimum(c2, b[:, 2] - c1)
    else:
        r2 = c2
        r1 = np.minimum(c1, b[:, 2] - c2)
    val = lam * r1 + (1.0 - lam) * r2
    return np.where(ok, val, -np.inf)


def convex_hull(points) -> np.ndarray:
    """Andrew's monotone chain; counterclockwise from the lowest-leftmost point.

    Collinear and duplicate points are dropped (cross-product tolerance
    ``COLLINEAR_TOL``).
    """
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) <= 1:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = [tuple(p) for p in pts[order]]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= COLLINEAR_TOL:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= COLLINEAR_TOL:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        hull = hull[:1]
    return np.array(hull, dtype=float)


def support_function(region: RateRegion, lam: float) -> float:
    """max over the region of lam*r1 + (1-lam)*r2."""
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"lambda must lie in [0, 1], got {lam}")
    v = region._require_vertices()
    return float(np.max(lam * v[:, 0] + (1.0 - lam) * v[:, 1]))


def contains(region: RateRegion, point, tol: float = 1e-9) -> bool:
    """Whether ``point`` lies in the region, up to distance ``tol``."""
    if region.empty:
        return False
    p = np.asarray(point, dtype=float)
    if p[0] < -tol or p[1] < -tol:
        return False
    v = region.vertices_array()
    if len(v) == 1:
        return bool(np.hypot(*(p - v[0])) <= tol)
    if len(v) == 2:
        return _segment_distance(p, v[0], v[1]) <= tol
    for a, b in zip(v, np.roll(v, -1, axis=0)):
        edge = b - a
        length = math.hypot(*edge)
        # Signed distance to the left of the edge; CCW order means inside is left.
        if (edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0])) / length < -tol:
            return False
    return True


def _segment_distance(p, a, b):
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
    return float(np.hypot(*(p - (a + t * ab))))


def max_violation(inner: RateRegion, outer: RateRegion, lambdas) -> float:
    """Largest amount by which ``inner`` sticks out of ``outer`` along the given directions."""
    if inner.empty:
        return 0.0
    if outer.empty:
        return math.inf
    return max(0.0, max(support_function(inner, lam) - support_function(outer, lam) for lam in lambdas))


def containment_violation(inner: RateRegion, outer: RateRegion, lambdas=()) -> float:
    """Exact amount by which ``inner`` leaves ``outer`` (0 when contained).

    Both regions are down-closed in the quadrant, so containment only needs
    the support inequality along the outer region's non-negative edge
    normals (plus the axes and any extra ``lambdas``).
    """
    lams = {0.0, 1.0, *map(float, lambdas)}
    if not outer.empty:
        v = outer.vertices_array()
        for a, b in zip(v, np.roll(v, -1, axis=0)):
            nx, ny = b[1] - a[1], a[0] - b[0]
            if nx >= 0 and ny >= 0 and nx + ny > 0:
                lams.add(float(nx / (nx + ny)))
    return max_violation(inner, outer, sorted(lams))
