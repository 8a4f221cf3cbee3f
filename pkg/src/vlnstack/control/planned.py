"""Grid shortest-path planning plus turn/forward path following."""

from __future__ import annotations

import math
from typing import Optional

from ..core import NavAction, Pose2D
from ..sim.grid import NavGrid, nav_grid
from ..sim.kinematics import KinematicsConfig, disc_path_free, step
from ..sim.world import World
from .base import ControllerOutcome, bearing_to, heading_action

GOAL_RADIUS = 0.2
MAX_REPLANS = 4
SNAP_RADIUS = 0.35
# slack for heading quantisation when tracking a straight segment
PATH_MARGIN = 0.07


def plan_path(grid: NavGrid, start, goal, agent_radius: float, snap_radius: float = SNAP_RADIUS) -> Optional[list[tuple[float, float]]]:
    """Waypoint polyline from start to goal, or None when unreachable.

    The raw A* cell path is shortcut wherever the straight segment keeps the
    agent disc clear in the continuous world.
    """
    world = grid.world
    if not world.is_free(goal[0], goal[1], agent_radius):
        return None
    s = grid.nearest_free(start[0], start[1], snap_radius)
    g = grid.nearest_free(goal[0], goal[1], snap_radius)
    if s is None or g is None:
        return None
    cells = grid.astar(s, g)
    if cells is None:
        return None
    pts = [tuple(start)] + [grid.center_of(*c) for c in cells] + [tuple(goal)]
    return shortcut(world, pts, agent_radius + PATH_MARGIN)


def shortcut(world: World, pts: list, radius: float) -> list:
    out = [pts[0]]
    i = 0
    while i < len(pts) - 1:
        j = len(pts) - 1
        while j > i + 1 and not disc_path_free(world, pts[i], pts[j], radius):
            j -= 1
        out.append(pts[j])
        i = j
    return out


def polyline_length(pts) -> float:
    return sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:]))


def planned_controller(
    world_or_grid: World | NavGrid,
    start: Pose2D,
    goal,
    kin: KinematicsConfig = KinematicsConfig(),
    goal_radius: float = GOAL_RADIUS,
    max_actions: Optional[int] = None,
) -> ControllerOutcome:
    grid = world_or_grid if isinstance(world_or_grid, NavGrid) else nav_grid(world_or_grid)
    world = grid.world
    goal = (float(goal[0]), float(goal[1]))
    out = ControllerOutcome()
    if start.distance_to(goal) <= goal_radius:
        out.reached = True
        return out

    path = plan_path(grid, start.xy, goal, kin.agent_radius)
    if path is None:
        out.unreachable = True
        return out
    if max_actions is None:
        max_actions = 3 * int(math.ceil(polyline_length(path) / kin.forward_step)) + 60

    pose = start
    nxt = 1
    replans = 0
    while len(out.actions) < max_actions:
        if pose.distance_to(goal) <= goal_radius:
            out.reached = True
            return out
        while (
            nxt < len(path) - 1
            and pose.distance_to(path[nxt]) < kin.forward_step
            and disc_path_free(world, pose.xy, path[nxt + 1], kin.agent_radius + 0.5 * PATH_MARGIN)
        ):
            nxt += 1
        target = path[nxt]
        action = heading_action(pose, bearing_to(pose, target), kin.turn_step) or NavAction.FORWARD
        new, collided = step(world, pose, action, kin)
        out.record(action, pose, new, collided)
        pose = new
        if collided:
            replans += 1
            if replans > MAX_REPLANS:
                break
            path = plan_path(grid, pose.xy, goal, kin.agent_radius)
            if path is None:
                break
            nxt = 1

    if pose.distance_to(goal) <= goal_radius:
        out.reached = True
    else:
        out.deadlocked = True
    return out
