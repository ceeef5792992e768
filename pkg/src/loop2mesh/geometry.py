"""2D geometric primitives shared by every pipeline stage.

Polygon containment (strict interior, even-odd ray casting), arc-length
resampling of closed contours, per-axis standardisation, and componentwise
clamping. Coordinates are float64 ``(N, 2)`` arrays throughout; every
function is pure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDataError,
    FrameMismatchError,
    InvalidGeometryError,
    InvalidInputError,
)

Point2 = tuple[float, float]


class Frame(enum.Enum):
    """Coordinate frame tag: raw chord units vs standardised units."""

    ORIGINAL = "original"
    STANDARDISED = "standardised"


def as_point_array(points, *, name: str = "points") -> np.ndarray:
    """Coerce to a finite (N, 2) float64 array or raise InvalidInputError."""
    xy = np.asarray(points, dtype=np.float64)
    if xy.ndim != 2 or xy.shape[1] != 2:
        raise InvalidInputError(f"{name} must be an (N, 2) array, got shape {xy.shape}")
    if not np.all(np.isfinite(xy)):
        raise InvalidInputError(f"{name} contains non-finite coordinates")
    return xy


def _frozen(xy: np.ndarray) -> np.ndarray:
    out = xy.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PointSet:
    """Ordered 2D point cloud tagged with the frame it lives in."""

    xy: np.ndarray
    frame: Frame = Frame.ORIGINAL

    def __post_init__(self):
        xy = as_point_array(self.xy, name="point set")
        if xy.shape[0] == 0:
            raise InvalidInputError("point set must be non-empty")
        if not isinstance(self.frame, Frame):
            raise InvalidInputError(f"frame must be a Frame member, got {self.frame!r}")
        object.__setattr__(self, "xy", _frozen(xy))

    def __len__(self) -> int:
        return int(self.xy.shape[0])


def _signed_area(v: np.ndarray) -> float:
    w = np.roll(v, -1, axis=0)
    return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(a, b, c, d) -> bool:
    # proper crossings only; shared endpoints and collinear touches pass
    d1 = _orient(c, d, a)
    d2 = _orient(c, d, b)
    d3 = _orient(a, b, c)
    d4 = _orient(a, b, d)
    return ((d1 > 0) != (d2 > 0)) and (d1 != 0) and (d2 != 0) and \
           ((d3 > 0) != (d4 > 0)) and (d3 != 0) and (d4 != 0)


def _is_simple(v: np.ndarray) -> bool:
    n = v.shape[0]
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        for j in range(i + 1, n):
            # skip adjacent edges (they share a vertex by construction)
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_cross(a, b, v[j], v[(j + 1) % n]):
                return False
    return True


@dataclass(frozen=True)
class AirfoilLoop:
    """Closed simple polygon of boundary vertices.

    The polygon closes implicitly from the last vertex back to the first;
    the vertex list never repeats the first vertex. Its strict interior is
    the region mesh points must not enter.
    """

    vertices: np.ndarray
    frame: Frame = Frame.ORIGINAL

    def __post_init__(self):
        v = as_point_array(self.vertices, name="loop vertices")
        if v.shape[0] < 3:
            raise InvalidGeometryError(f"a loop needs at least 3 vertices, got {v.shape[0]}")
        if not isinstance(self.frame, Frame):
            raise InvalidInputError(f"frame must be a Frame member, got {self.frame!r}")
        if np.any(np.all(v == np.roll(v, -1, axis=0), axis=1)):
            raise InvalidGeometryError("loop has zero-length edges (repeated consecutive vertices)")
        span = v.max(axis=0) - v.min(axis=0)
        if abs(_signed_area(v)) <= 1e-14 * max(1.0, float(span[0] + span[1]) ** 2):
            raise InvalidGeometryError("degenerate loop: enclosed area is numerically zero")
        if not _is_simple(v):
            raise InvalidGeometryError("loop is self-intersecting")
        object.__setattr__(self, "vertices", _frozen(v))

    def __len__(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def signed_area(self) -> float:
        return _signed_area(self.vertices)

    @property
    def perimeter(self) -> float:
        e = np.roll(self.vertices, -1, axis=0) - self.vertices
        return float(np.hypot(e[:, 0], e[:, 1]).sum())

    def as_pointset(self) -> PointSet:
        return PointSet(self.vertices, self.frame)


def polygon_edges(loop: AirfoilLoop) -> tuple[np.ndarray, np.ndarray]:
    """Edge start/end vertex arrays, each (L, 2), edge i = a[i] -> b[i]."""
    a = loop.vertices
    return a, np.roll(a, -1, axis=0)


def nearest_edge(points, loop: AirfoilLoop) -> tuple[np.ndarray, np.ndarray]:
    """Distance to, and closest point on, the nearest loop edge.

    Returns ``(dist (N,), closest (N, 2))``. Ties between equidistant edges
    resolve to the lowest edge index.
    """
    pts = as_point_array(points)
    a, b = polygon_edges(loop)
    ab = b - a
    denom = (ab ** 2).sum(axis=1)  # no zero-length edges by loop invariant
    ap = pts[:, None, :] - a[None, :, :]
    t = np.clip((ap * ab[None, :, :]).sum(axis=2) / denom[None, :], 0.0, 1.0)
    q = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d2 = ((pts[:, None, :] - q) ** 2).sum(axis=2)
    j = d2.argmin(axis=1)
    rows = np.arange(pts.shape[0])
    return np.sqrt(d2[rows, j]), q[rows, j]


def _even_odd_inside(pts: np.ndarray, loop: AirfoilLoop) -> np.ndarray:
    x = pts[:, 0]
    y = pts[:, 1]
    a, b = polygon_edges(loop)
    inside = np.zeros(pts.shape[0], dtype=bool)
    for (x1, y1), (x2, y2) in zip(a, b):
        if y1 == y2:
            continue  # horizontal edges never count under the half-open rule
        cond = (y1 > y) != (y2 > y)
        xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= cond & (x < xint)
    return inside


def points_in_polygon(points, loop: AirfoilLoop, *, edge_distances: np.ndarray | None = None) -> np.ndarray:
    """Strict-interior test for many points at once (bool (N,)).

    Even-odd ray casting; points exactly on an edge classify as outside, so
    wall nodes sitting on the boundary are legal. Pass precomputed
    ``edge_distances`` (from nearest_edge) to skip recomputing them.
    """
    pts = as_point_array(points)
    if edge_distances is None:
        edge_distances, _ = nearest_edge(pts, loop)
    return _even_odd_inside(pts, loop) & (edge_distances > 0.0)


def point_in_polygon(p: Point2, loop: AirfoilLoop) -> bool:
    """True iff ``p`` lies strictly inside the loop (edge points are outside)."""
    return bool(points_in_polygon(np.asarray([p], dtype=np.float64), loop)[0])


def resample_loop(raw: PointSet, target: int) -> AirfoilLoop:
    """Resample a closed contour to ``target`` vertices at uniform arc-length spacing.

    Closure is imposed between the last and first vertex (an explicit closing
    duplicate is dropped first, as are repeated consecutive points). The first
    output vertex coincides with the contour's first vertex; orientation is
    preserved; interpolation is linear along the polyline.
    """
    if target < 3:
        raise InvalidGeometryError(f"resample target must be at least 3, got {target}")
    v = raw.xy
    keep = np.ones(v.shape[0], dtype=bool)
    keep[1:] = np.any(v[1:] != v[:-1], axis=1)
    v = v[keep]
    if v.shape[0] > 1 and np.all(v[-1] == v[0]):
        v = v[:-1]
    if np.unique(v, axis=0).shape[0] < 3:
        raise InvalidGeometryError("contour needs at least 3 distinct points")
    closed = np.vstack([v, v[:1]])
    seg = np.diff(closed, axis=0)
    seglen = np.hypot(seg[:, 0], seg[:, 1])
    s = np.concatenate([[0.0], np.cumsum(seglen)])
    perimeter = s[-1]
    tpos = np.arange(target) * (perimeter / target)
    idx = np.clip(np.searchsorted(s, tpos, side="right") - 1, 0, seglen.shape[0] - 1)
    frac = (tpos - s[idx]) / seglen[idx]
    pts = closed[idx] + frac[:, None] * seg[idx]
    return AirfoilLoop(pts, raw.frame)


@dataclass(frozen=True)
class StandardizeTransform:
    """Per-axis affine map to zero mean and unit variance (population sigma)."""

    mean_x: float
    mean_y: float
    scale_x: float
    scale_y: float

    def __post_init__(self):
        vals = (self.mean_x, self.mean_y, self.scale_x, self.scale_y)
        if not all(np.isfinite(vals)):
            raise InvalidInputError("transform parameters must be finite")
        if self.scale_x <= 0.0 or self.scale_y <= 0.0:
            raise InvalidInputError("transform scales must be positive")

    def to_dict(self) -> dict:
        return {
            "mean_x": self.mean_x,
            "mean_y": self.mean_y,
            "scale_x": self.scale_x,
            "scale_y": self.scale_y,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StandardizeTransform":
        return cls(float(d["mean_x"]), float(d["mean_y"]),
                   float(d["scale_x"]), float(d["scale_y"]))

    @property
    def _mean(self) -> np.ndarray:
        return np.array([self.mean_x, self.mean_y])

    @property
    def _scale(self) -> np.ndarray:
        return np.array([self.scale_x, self.scale_y])


def fit_standardize(ps: PointSet) -> StandardizeTransform:
    """Fit per-axis mean/sigma on a point set; sigma is the population value."""
    if len(ps) < 2:
        raise DegenerateDataError("standardisation needs at least 2 points")
    mean = ps.xy.mean(axis=0)
    sigma = ps.xy.std(axis=0)  # divides by N, not N-1
    if sigma[0] == 0.0 or sigma[1] == 0.0:
        raise DegenerateDataError("zero variance on an axis; cannot standardise")
    return StandardizeTransform(float(mean[0]), float(mean[1]), float(sigma[0]), float(sigma[1]))


def apply_standardize(t: StandardizeTransform, ps: PointSet) -> PointSet:
    if ps.frame is not Frame.ORIGINAL:
        raise FrameMismatchError("point set is already standardised")
    return PointSet((ps.xy - t._mean) / t._scale, Frame.STANDARDISED)


def invert_standardize(t: StandardizeTransform, ps: PointSet) -> PointSet:
    if ps.frame is not Frame.STANDARDISED:
        raise FrameMismatchError("point set is not in the standardised frame")
    return PointSet(ps.xy * t._scale + t._mean, Frame.ORIGINAL)


def standardize_loop(t: StandardizeTransform, loop: AirfoilLoop) -> AirfoilLoop:
    """Standardise loop vertices (containment is preserved under affine maps)."""
    if loop.frame is not Frame.ORIGINAL:
        raise FrameMismatchError("loop is already standardised")
    return AirfoilLoop((loop.vertices - t._mean) / t._scale, Frame.STANDARDISED)


def clamp_points(ps: PointSet,
                 x_range: tuple[float, float] | None = None,
                 y_range: tuple[float, float] | None = None) -> PointSet:
    """Clip coordinates componentwise; ``None`` leaves that axis unconstrained.

    Idempotent; the frame tag is preserved.
    """
    for rng in (x_range, y_range):
        if rng is not None and not (rng[0] <= rng[1]):
            raise InvalidInputError(f"empty clamp range {rng}")
    xy = ps.xy.copy()
    if x_range is not None:
        xy[:, 0] = np.clip(xy[:, 0], x_range[0], x_range[1])
    if y_range is not None:
        xy[:, 1] = np.clip(xy[:, 1], y_range[0], y_range[1])
    return PointSet(xy, ps.frame)
