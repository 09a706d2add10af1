"""Vectorized map primitives: points, lane vectors, polylines, maps.

A polyline stores its points once as an ``(n, 2)`` float64 array; the lane
vectors exposed through :attr:`Polyline.vectors` are views derived from
consecutive point pairs, so the chaining invariant
``vectors[k].end == vectors[k+1].start`` holds bit-exactly by construction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ElementType(enum.IntEnum):
    DIVIDER = 0
    BOUNDARY = 1
    CROSSING = 2
    CENTERLINE = 3


@dataclass(frozen=True)
class MapPoint:
    x: float
    y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=np.float64)


@dataclass(frozen=True)
class LaneAttrs:
    orientation: float
    polyline_type: ElementType


@dataclass(frozen=True)
class LaneVector:
    """One segment of a polyline: [start, end, attributes]."""

    start: MapPoint
    end: MapPoint
    attrs: LaneAttrs

    @property
    def length(self) -> float:
        return math.hypot(self.end.x - self.start.x, self.end.y - self.start.y)


class Polyline:
    """Ordered chain of lane vectors sharing endpoints exactly."""

    __slots__ = ("points", "lane_id", "element_type")

    def __init__(self, points, lane_id: int, element_type: ElementType):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"polyline points must be (n, 2), got {pts.shape}")
        if pts.shape[0] < 2:
            raise ValueError("polyline needs at least 2 points (1 vector)")
        if not np.all(np.isfinite(pts)):
            raise ValueError("polyline points must be finite")
        self.points = pts
        self.lane_id = int(lane_id)
        self.element_type = ElementType(element_type)

    @property
    def n_vectors(self) -> int:
        return self.points.shape[0] - 1

    @property
    def vectors(self) -> list[LaneVector]:
        out = []
        for k in range(self.n_vectors):
            sx, sy = self.points[k]
            ex, ey = self.points[k + 1]
            out.append(
                LaneVector(
                    start=MapPoint(float(sx), float(sy)),
                    end=MapPoint(float(ex), float(ey)),
                    attrs=LaneAttrs(
                        orientation=math.atan2(ey - sy, ex - sx),
                        polyline_type=self.element_type,
                    ),
                )
            )
        return out

    def arc_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))

    def with_points(self, points) -> "Polyline":
        return Polyline(points, self.lane_id, self.element_type)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polyline)
            and self.lane_id == other.lane_id
            and self.element_type == other.element_type
            and self.points.shape == other.points.shape
            and bool(np.all(self.points == other.points))
        )

    def __repr__(self) -> str:
        return (
            f"Polyline(lane_id={self.lane_id}, type={self.element_type.name}, "
            f"n_points={self.points.shape[0]})"
        )


@dataclass
class VectorMap:
    """A set of polylines with unique lane ids.

    Generated maps always carry at least one polyline; fully dropped-out
    corruption can legally produce an empty map, which every downstream
    consumer must tolerate.
    """

    polylines: list[Polyline] = field(default_factory=list)

    def __post_init__(self):
        ids = [p.lane_id for p in self.polylines]
        if len(ids) != len(set(ids)):
            raise ValueError("lane_ids must be unique")

    @property
    def n_lanes(self) -> int:
        return len(self.polylines)

    def by_id(self, lane_id: int) -> Polyline:
        for p in self.polylines:
            if p.lane_id == lane_id:
                return p
        raise KeyError(f"no polyline with lane_id={lane_id}")

    def of_type(self, element_type: ElementType) -> list[Polyline]:
        return [p for p in self.polylines if p.element_type == element_type]

    def all_points(self) -> np.ndarray:
        if not self.polylines:
            return np.zeros((0, 2), dtype=np.float64)
        return np.concatenate([p.points for p in self.polylines], axis=0)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, VectorMap)
            and len(self.polylines) == len(other.polylines)
            and all(a == b for a, b in zip(self.polylines, other.polylines))
        )


# ---------------------------------------------------------------------------
# polyline helpers


def cumulative_arclength(points: np.ndarray) -> np.ndarray:
    """Arc-length at each point, starting at 0."""
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def resample_polyline(points: np.ndarray, n: int) -> np.ndarray:
    """Resample to exactly n points, evenly spaced in arc length."""
    if n < 2:
        raise ValueError("need at least 2 resampled points")
    s = cumulative_arclength(points)
    total = s[-1]
    if total == 0.0:
        return np.repeat(points[:1], n, axis=0)
    target = np.linspace(0.0, total, n)
    x = np.interp(target, s, points[:, 0])
    y = np.interp(target, s, points[:, 1])
    return np.stack([x, y], axis=1)


def resample_step(points: np.ndarray, step: float) -> np.ndarray:
    """Resample at spacing <= step (endpoints always included)."""
    if step <= 0:
        raise ValueError("sample step must be positive")
    total = cumulative_arclength(points)[-1]
    n = max(2, int(math.floor(total / step)) + 1)
    return resample_polyline(points, n)


def point_at_arclength(points: np.ndarray, s_query: float) -> np.ndarray:
    """Point on the polyline at the given arc length (clamped to ends)."""
    s = cumulative_arclength(points)
    sq = min(max(s_query, 0.0), s[-1])
    x = np.interp(sq, s, points[:, 0])
    y = np.interp(sq, s, points[:, 1])
    return np.array([x, y])


def tangent_at_arclength(points: np.ndarray, s_query: float) -> np.ndarray:
    """Unit tangent of the segment containing the given arc length."""
    s = cumulative_arclength(points)
    sq = min(max(s_query, 0.0), s[-1])
    k = int(np.searchsorted(s, sq, side="right") - 1)
    k = min(max(k, 0), points.shape[0] - 2)
    d = points[k + 1] - points[k]
    norm = np.linalg.norm(d)
    if norm == 0.0:
        return np.array([1.0, 0.0])
    return d / norm


def project_to_polyline(points: np.ndarray, q: np.ndarray) -> tuple[float, float]:
    """Project q onto the polyline.

    Returns (arc length of the foot point, signed lateral offset); the
    offset is positive to the left of the local direction of travel.
    """
    best_d2 = math.inf
    best_s = 0.0
    best_lat = 0.0
    s = cumulative_arclength(points)
    for k in range(points.shape[0] - 1):
        a, b = points[k], points[k + 1]
        ab = b - a
        denom = float(ab @ ab)
        if denom == 0.0:
            t = 0.0
        else:
            t = min(max(float((q - a) @ ab) / denom, 0.0), 1.0)
        foot = a + t * ab
        diff = q - foot
        d2 = float(diff @ diff)
        if d2 < best_d2:
            best_d2 = d2
            best_s = float(s[k]) + t * float(np.linalg.norm(ab))
            if denom > 0.0:
                tang = ab / math.sqrt(denom)
                best_lat = float(tang[0] * diff[1] - tang[1] * diff[0])
            else:
                best_lat = math.sqrt(d2)
    return best_s, best_lat


def transform_points(points: np.ndarray, angle: float, offset: np.ndarray,
                     pivot: np.ndarray | None = None) -> np.ndarray:
    """Rotate about pivot (default origin) by angle, then translate."""
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    if pivot is None:
        pivot = np.zeros(2)
    return (points - pivot) @ rot.T + pivot + offset


def oriented_box_corners(cx: float, cy: float, length: float, width: float,
                         yaw: float) -> np.ndarray:
    """Corners of an oriented rectangle, counter-clockwise, shape (4, 2)."""
    c, s = math.cos(yaw), math.sin(yaw)
    hl, hw = length / 2.0, width / 2.0
    local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([cx, cy])


def boxes_overlap(corners_a: np.ndarray, corners_b: np.ndarray) -> bool:
    """Separating-axis test between two convex quads."""
    for quad in (corners_a, corners_b):
        for k in range(4):
            edge = quad[(k + 1) % 4] - quad[k]
            axis = np.array([-edge[1], edge[0]])
            pa = corners_a @ axis
            pb = corners_b @ axis
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False
    return True


def point_in_polygon(q: np.ndarray, polygon: np.ndarray) -> bool:
    """Even-odd rule; points exactly on an edge count as inside."""
    x, y = float(q[0]), float(q[1])
    n = polygon.shape[0]
    inside = False
    for k in range(n):
        x1, y1 = polygon[k]
        x2, y2 = polygon[(k + 1) % n]
        # on-edge check
        if (min(x1, x2) - 1e-12 <= x <= max(x1, x2) + 1e-12
                and min(y1, y2) - 1e-12 <= y <= max(y1, y2) + 1e-12):
            cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
            if abs(cross) < 1e-12:
                return True
        if (y1 > y) != (y2 > y):
            x_int = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_int:
                inside = not inside
    return inside
