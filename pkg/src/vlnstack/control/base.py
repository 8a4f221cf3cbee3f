from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from ..core import InvalidArgument, NavAction, Pose2D, normalize_heading


@dataclass
class ControllerOutcome:
    actions: list[NavAction] = field(default_factory=list)
    poses: list[Pose2D] = field(default_factory=list)  # pose after each action
    reached: bool = False
    deadlocked: bool = False
    unreachable: bool = False
    collisions: int = 0
    path_length: float = 0.0

    def __post_init__(self) -> None:
        if self.reached and self.deadlocked:
            raise InvalidArgument("an outcome cannot be both reached and deadlocked")

    def record(self, action: NavAction, before: Pose2D, after: Pose2D, collided: bool) -> None:
        self.actions.append(action)
        self.poses.append(after)
        self.path_length += before.distance_to(after.xy)
        self.collisions += int(collided)

    def to_dict(self) -> dict:
        return {
            "n_actions": len(self.actions),
            "reached": self.reached,
            "deadlocked": self.deadlocked,
            "unreachable": self.unreachable,
            "collisions": self.collisions,
            "path_length": self.path_length,
        }


def detect_deadlock(recent: Sequence[Pose2D], forward_step: float = 0.25) -> bool:
    """True when every pair of poses in the window lies within half a forward step."""
    if len(recent) < 2:
        return False
    limit = 0.5 * forward_step
    return all(
        math.hypot(a.x - b.x, a.y - b.y) < limit for i, a in enumerate(recent) for b in recent[i + 1 :]
    )


def heading_action(pose: Pose2D, target_heading: float, turn_step: float) -> NavAction | None:
    """Turn needed to bring the heading within half a turn step of the target, if any."""
    err = normalize_heading(target_heading - pose.heading)
    if abs(err) <= turn_step / 2 + 1e-9:
        return None
    return NavAction.TURN_LEFT if err > 0 else NavAction.TURN_RIGHT


def bearing_to(pose: Pose2D, target) -> float:
    return math.atan2(target[1] - pose.y, target[0] - pose.x)
