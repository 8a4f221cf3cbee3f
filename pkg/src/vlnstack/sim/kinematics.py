"""Discrete-action kinematics with a blocking (non-sliding) collision model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import InvalidArgument, NavAction, Pose2D
from .world import World, segment_segment_distance


@dataclass(frozen=True)
class KinematicsConfig:
    forward_step: float = 0.25
    turn_step: float = math.radians(15.0)
    agent_radius: float = 0.18
    max_steps: int = 500

    def __post_init__(self) -> None:
        if min(self.forward_step, self.turn_step, self.agent_radius) <= 0 or self.max_steps <= 0:
            raise InvalidArgument("kinematics parameters must be positive")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def swept_clearance(world: World, a, b) -> float:
    """Smallest distance from the segment a-b to any blocking edge."""
    p0 = np.asarray(a, dtype=float)
    p1 = np.asarray(b, dtype=float)
    return float(segment_segment_distance(p0, p1, world.edges).min())


def disc_path_free(world: World, a, b, radius: float) -> bool:
    if world.inside_rect(*b) or not world.inside_bounds(*b):
        return False
    return swept_clearance(world, a, b) >= radius


def step(world: World, pose: Pose2D, action: NavAction, cfg: KinematicsConfig = KinematicsConfig()) -> tuple[Pose2D, bool]:
    if action is NavAction.FORWARD:
        nx = pose.x + cfg.forward_step * math.cos(pose.heading)
        ny = pose.y + cfg.forward_step * math.sin(pose.heading)
        if not disc_path_free(world, pose.xy, (nx, ny), cfg.agent_radius):
            return pose, True
        return Pose2D(nx, ny, pose.heading), False
    if action is NavAction.TURN_LEFT:
        return Pose2D(pose.x, pose.y, pose.heading + cfg.turn_step), False
    if action is NavAction.TURN_RIGHT:
        return Pose2D(pose.x, pose.y, pose.heading - cfg.turn_step), False
    return pose, False
