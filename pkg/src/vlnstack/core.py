"""Shared domain types and frame conventions.

World frame is right-handed: x east, y north, heading measured
counter-clockwise from +x. Bearings are relative to the robot heading,
positive to the left.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class VlnError(Exception):
    """Base class for all package errors."""


class InvalidArgument(VlnError, ValueError):
    pass


def normalize_heading(angle: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    if not math.isfinite(angle):
        raise InvalidArgument(f"non-finite angle: {angle!r}")
    wrapped = math.remainder(angle, 2.0 * math.pi)
    # remainder() returns [-pi, pi]; -pi maps onto the closed end
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "heading", normalize_heading(self.heading))

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)

    def distance_to(self, point: Sequence[float]) -> float:
        return math.hypot(point[0] - self.x, point[1] - self.y)

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "heading": self.heading}

    @classmethod
    def from_dict(cls, d: dict) -> "Pose2D":
        return cls(float(d["x"]), float(d["y"]), float(d.get("heading", 0.0)))


class NavAction(enum.Enum):
    FORWARD = "FORWARD"
    TURN_LEFT = "TURN_LEFT"
    TURN_RIGHT = "TURN_RIGHT"
    STOP = "STOP"


class WaypointKind(enum.Enum):
    GHOST = "ghost"
    VISITED = "visited"
    CURRENT = "current"


def relative_to_world(pose: Pose2D, bearing: float, distance: float) -> tuple[float, float]:
    """Point reached by moving `distance` along `pose.heading + bearing`."""
    if distance < 0 or not math.isfinite(distance):
        raise InvalidArgument(f"distance must be finite and >= 0, got {distance!r}")
    theta = pose.heading + bearing
    return (pose.x + distance * math.cos(theta), pose.y + distance * math.sin(theta))


def world_to_relative(pose: Pose2D, point: Sequence[float]) -> tuple[float, float]:
    """Inverse of :func:`relative_to_world`: returns (bearing, distance)."""
    dx = point[0] - pose.x
    dy = point[1] - pose.y
    distance = math.hypot(dx, dy)
    if distance == 0.0:
        return 0.0, 0.0
    return normalize_heading(math.atan2(dy, dx) - pose.heading), distance


@dataclass(frozen=True)
class Waypoint:
    id: int
    bearing: float
    distance: float
    world_xy: tuple[float, float]
    kind: WaypointKind = WaypointKind.GHOST

    def __post_init__(self) -> None:
        if self.distance < 0:
            raise InvalidArgument("waypoint distance must be >= 0")

    @classmethod
    def from_relative(
        cls, id: int, pose: Pose2D, bearing: float, distance: float, kind: WaypointKind = WaypointKind.GHOST
    ) -> "Waypoint":
        bearing = normalize_heading(bearing)
        return cls(id, bearing, distance, relative_to_world(pose, bearing, distance), kind)

    @property
    def is_stop(self) -> bool:
        return self.kind is WaypointKind.CURRENT

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "bearing": self.bearing,
            "distance": self.distance,
            "world_xy": list(self.world_xy),
            "kind": self.kind.value,
        }


def stop_candidate(pose: Pose2D) -> Waypoint:
    return Waypoint(0, 0.0, 0.0, pose.xy, WaypointKind.CURRENT)


@dataclass(frozen=True)
class CandidateSet:
    """Ordered candidates; index 0 is always the STOP candidate."""

    candidates: tuple[Waypoint, ...]

    def __post_init__(self) -> None:
        if not self.candidates:
            raise InvalidArgument("candidate set must be non-empty")
        if not self.candidates[0].is_stop:
            raise InvalidArgument("candidate 0 must be the STOP candidate")
        ids = [c.id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise InvalidArgument("duplicate waypoint ids in candidate set")

    @classmethod
    def build(cls, pose: Pose2D, waypoints: Sequence[Waypoint]) -> "CandidateSet":
        return cls((stop_candidate(pose), *waypoints))

    def __len__(self) -> int:
        return len(self.candidates)

    def __getitem__(self, i: int) -> Waypoint:
        return self.candidates[i]

    def __iter__(self):
        return iter(self.candidates)

    def label(self, i: int) -> str:
        return "stop" if i == 0 else f"g{self.candidates[i].id}"


@dataclass(frozen=True)
class ActionDistribution:
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        p = tuple(float(v) for v in self.probs)
        if not p:
            raise InvalidArgument("empty distribution")
        if any(not (0.0 <= v <= 1.0) for v in p):
            raise InvalidArgument(f"probabilities must lie in [0, 1]: {p}")
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def argmax(self) -> int:
        # first maximal index, matching numpy
        return int(np.argmax(self.as_array()))


@dataclass(frozen=True)
class EpisodeSpec:
    id: int
    world: str
    start: Pose2D
    goal: tuple[float, float]
    instruction: str
    shortest_path_length: float
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.shortest_path_length > 0:
            raise InvalidArgument("shortest_path_length must be > 0")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "world": self.world,
            "start": self.start.to_dict(),
            "goal": list(self.goal),
            "instruction": self.instruction,
            "shortest_path_length": self.shortest_path_length,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeSpec":
        return cls(
            id=int(d["id"]),
            world=d["world"],
            start=Pose2D.from_dict(d["start"]),
            goal=(float(d["goal"][0]), float(d["goal"][1])),
            instruction=d["instruction"],
            shortest_path_length=float(d["shortest_path_length"]),
            metadata=dict(d.get("metadata", {})),
        )
