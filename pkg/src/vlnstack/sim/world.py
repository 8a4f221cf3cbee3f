"""2D worlds built from line segments and axis-aligned boxes, plus raycasting."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from ..core import InvalidArgument, Pose2D
from ..waypoint.costmap import LidarScan

Rect = tuple[float, float, float, float]  # xmin, ymin, xmax, ymax
Segment = tuple[float, float, float, float]  # x0, y0, x1, y1


@dataclass(frozen=True, eq=False)
class World:
    name: str
    width: float
    height: float
    rects: tuple[Rect, ...] = ()
    segments: tuple[Segment, ...] = ()
    style: str = "seen"
    kind: str = "custom"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise InvalidArgument("world bounds must be positive")
        eps = 1e-9
        for x0, y0, x1, y1 in self.rects:
            if not (x0 < x1 and y0 < y1):
                raise InvalidArgument(f"degenerate rectangle {(x0, y0, x1, y1)}")
            if x0 < -eps or y0 < -eps or x1 > self.width + eps or y1 > self.height + eps:
                raise InvalidArgument(f"rectangle {(x0, y0, x1, y1)} outside bounds")
        for x0, y0, x1, y1 in self.segments:
            for x, y in ((x0, y0), (x1, y1)):
                if not (-eps <= x <= self.width + eps and -eps <= y <= self.height + eps):
                    raise InvalidArgument(f"segment endpoint {(x, y)} outside bounds")

    @cached_property
    def edges(self) -> np.ndarray:
        """All blocking segments (bounds, rectangle sides, free segments) as an (M, 4) array."""
        w, h = self.width, self.height
        edges: list[Segment] = [(0, 0, w, 0), (w, 0, w, h), (w, h, 0, h), (0, h, 0, 0)]
        for x0, y0, x1, y1 in self.rects:
            edges += [(x0, y0, x1, y0), (x1, y0, x1, y1), (x1, y1, x0, y1), (x0, y1, x0, y0)]
        edges += list(self.segments)
        return np.asarray(edges, dtype=float)

    def inside_bounds(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height

    def inside_rect(self, x: float, y: float) -> bool:
        return any(x0 < x < x1 and y0 < y < y1 for x0, y0, x1, y1 in self.rects)

    def clearance(self, x: float, y: float) -> float:
        """Distance from a point to the nearest blocking edge (0 inside a box)."""
        if self.inside_rect(x, y) or not self.inside_bounds(x, y):
            return 0.0
        return float(point_segment_distance(np.array([x, y]), self.edges).min())

    def is_free(self, x: float, y: float, radius: float) -> bool:
        return self.clearance(x, y) >= radius

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "style": self.style,
            "bounds": [self.width, self.height],
            "rects": [list(r) for r in self.rects],
            "segments": [list(s) for s in self.segments],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "World":
        return cls(
            name=d["name"],
            width=float(d["bounds"][0]),
            height=float(d["bounds"][1]),
            rects=tuple(tuple(float(v) for v in r) for r in d.get("rects", ())),
            segments=tuple(tuple(float(v) for v in s) for s in d.get("segments", ())),
            style=d.get("style", "seen"),
            kind=d.get("kind", "custom"),
            metadata=dict(d.get("metadata", {})),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "World":
        return cls.from_dict(json.loads(Path(path).read_text()))


def point_segment_distance(p: np.ndarray, segs: np.ndarray) -> np.ndarray:
    """Distance from point p (2,) to each segment row of segs (M, 4)."""
    a = segs[:, :2]
    ab = segs[:, 2:] - a
    denom = (ab**2).sum(axis=1)
    t = np.where(denom > 0, ((p - a) * ab).sum(axis=1) / np.where(denom > 0, denom, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return np.hypot(*(p - closest).T)


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def segment_segment_distance(p0: np.ndarray, p1: np.ndarray, segs: np.ndarray) -> np.ndarray:
    """Distance between segment p0-p1 and each row of segs; 0 where they cross."""
    q0, q1 = segs[:, :2], segs[:, 2:]
    d = np.minimum.reduce(
        [
            point_segment_distance(p0, segs),
            point_segment_distance(p1, segs),
            point_segment_distance_many(q0, p0, p1),
            point_segment_distance_many(q1, p0, p1),
        ]
    )
    r = p1 - p0
    s = q1 - q0
    denom = _cross(r[0], r[1], s[:, 0], s[:, 1])
    qp = q0 - p0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross(qp[:, 0], qp[:, 1], s[:, 0], s[:, 1]) / denom
        u = _cross(qp[:, 0], qp[:, 1], r[0], r[1]) / denom
    crossing = (denom != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
    return np.where(crossing, 0.0, d)


def point_segment_distance_many(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.hypot(*(points - a).T)
    t = np.clip(((points - a) @ ab) / denom, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return np.hypot(*(points - closest).T)


def raycast_many(world: World, origin: Sequence[float], bearings: np.ndarray, max_range: float) -> np.ndarray:
    """Distances along absolute bearings to the first edge, clamped to max_range."""
    ox, oy = float(origin[0]), float(origin[1])
    if not world.inside_bounds(ox, oy):
        raise InvalidArgument(f"ray origin {(ox, oy)} outside world bounds")
    edges = world.edges
    dx, dy = np.cos(bearings)[:, None], np.sin(bearings)[:, None]
    ax, ay = edges[:, 0][None, :], edges[:, 1][None, :]
    ex, ey = (edges[:, 2] - edges[:, 0])[None, :], (edges[:, 3] - edges[:, 1])[None, :]
    denom = _cross(dx, dy, ex, ey)
    wx, wy = ax - ox, ay - oy
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross(wx, wy, ex, ey) / denom  # along the ray
        u = _cross(wx, wy, dx, dy) / denom  # along the edge
    valid = (denom != 0) & (t >= 0) & (u >= 0) & (u <= 1)
    t = np.where(valid, t, np.inf)
    return np.minimum(t.min(axis=1), max_range)


def raycast(world: World, origin: Sequence[float], bearing: float, max_range: float) -> float:
    return float(raycast_many(world, origin, np.array([bearing], dtype=float), max_range)[0])


def scan(world: World, pose: Pose2D, n_beams: int = 360, max_range: float = 6.0) -> LidarScan:
    """Evenly spaced beams starting at the robot heading; angles are robot-relative."""
    if n_beams < 1:
        raise InvalidArgument("n_beams must be >= 1")
    rel = np.arange(n_beams) * (2 * math.pi / n_beams)
    ranges = raycast_many(world, pose.xy, pose.heading + rel, max_range)
    # a zero range would mean the sensor sits on an edge
    ranges = np.maximum(ranges, 1e-6)
    return LidarScan(rel, ranges, float(max_range))
