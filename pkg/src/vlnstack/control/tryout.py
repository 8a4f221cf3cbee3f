"""Rule-based rotate-then-forward controller with preset-angle recovery."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..core import InvalidArgument, NavAction, Pose2D, normalize_heading
from ..sim.kinematics import KinematicsConfig, step
from ..sim.world import World
from .base import ControllerOutcome, bearing_to, detect_deadlock, heading_action

_DEFAULT_PRESETS = tuple(math.radians(a) for a in (30, -30, 60, -60, 90, -90, 180))


@dataclass(frozen=True)
class TryoutConfig:
    preset_angles: tuple[float, ...] = _DEFAULT_PRESETS
    stuck_threshold: int = 2
    goal_radius: float = 0.2

    def __post_init__(self) -> None:
        if not self.preset_angles:
            raise InvalidArgument("preset_angles must be non-empty")
        if self.stuck_threshold < 1:
            raise InvalidArgument("stuck_threshold must be >= 1")


def _default_budget(start: Pose2D, goal, kin: KinematicsConfig) -> int:
    return 4 * int(math.ceil(start.distance_to(goal) / kin.forward_step)) + 60


def tryout_controller(
    world: World,
    start: Pose2D,
    goal,
    cfg: TryoutConfig = TryoutConfig(),
    kin: KinematicsConfig = KinematicsConfig(),
    max_actions: Optional[int] = None,
) -> ControllerOutcome:
    budget = _default_budget(start, goal, kin) if max_actions is None else max_actions
    out = ControllerOutcome()
    pose = start
    stuck_window: list[Pose2D] = []

    def act(action: NavAction) -> bool:
        nonlocal pose
        new, collided = step(world, pose, action, kin)
        out.record(action, pose, new, collided)
        moved = not collided and action is NavAction.FORWARD
        pose = new
        return moved

    def turn_to(heading: float) -> None:
        while len(out.actions) < budget:
            a = heading_action(pose, heading, kin.turn_step)
            if a is None:
                return
            act(a)

    while len(out.actions) < budget:
        if pose.distance_to(goal) <= cfg.goal_radius:
            out.reached = True
            return out
        turn = heading_action(pose, bearing_to(pose, goal), kin.turn_step)
        if turn is not None:
            act(turn)
            continue
        act(NavAction.FORWARD)
        stuck_window.append(pose)
        stuck_window = stuck_window[-(cfg.stuck_threshold + 1) :]
        if len(stuck_window) <= cfg.stuck_threshold or not detect_deadlock(stuck_window, kin.forward_step):
            continue

        # blocked: rotate through presets relative to the blocked heading
        base = pose.heading
        escaped = False
        for preset in cfg.preset_angles:
            if len(out.actions) >= budget:
                break
            turn_to(normalize_heading(base + preset))
            if len(out.actions) < budget and act(NavAction.FORWARD):
                escaped = True
                break
        stuck_window = []
        if not escaped:
            out.deadlocked = True
            return out

    if pose.distance_to(goal) <= cfg.goal_radius:
        out.reached = True
    else:
        out.deadlocked = True
    return out
