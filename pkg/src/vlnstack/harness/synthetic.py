"""Exchangeable decision-point generator for coverage checks.

Each item is one (planner distribution, path-optimal index) pair. Items come
from random poses and goals in seeded worlds: the LiDAR waypoint pipeline
proposes candidates, the geodesic goal field prices them, and the noisy expert
planner scores them. The pool is shuffled before splitting, so calibration and
test items are exchangeable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import ActionDistribution, CandidateSet, Pose2D, Waypoint
from ..decision import PlannerSkill, StepContext, fuse_branch_logits, noisy_expert_planner, optimal_index, softmax
from ..seeding import derive_seed
from ..sim.grid import GoalField, nav_grid
from ..sim.world import scan
from ..waypoint import DegeneratePose, run_lidar_pipeline
from .worlds import generate_worlds

Item = tuple[ActionDistribution, int]


@dataclass(frozen=True)
class SyntheticConfig:
    kind: str = "rooms"
    n_worlds: int = 6
    poses_per_world: int = 50
    goals_per_world: int = 50
    planner: PlannerSkill = PlannerSkill(beta=2.0, sigma=1.0)
    min_waypoint_distance: float = 0.5
    move_penalty: float = 0.25
    seed: int = 0


def _candidate_sets(world, rng, n: int, min_dist: float) -> list[tuple[Pose2D, CandidateSet]]:
    grid = nav_grid(world)
    free = np.argwhere(grid.free)
    out = []
    while len(out) < n:
        cx, cy = grid.center_of(*free[rng.integers(len(free))])
        pose = Pose2D(cx, cy, float(rng.uniform(-math.pi, math.pi)))
        try:
            raw = run_lidar_pipeline(scan(world, pose), pose).waypoints
        except DegeneratePose:
            continue
        wps = [w for w in raw if w.distance >= min_dist]
        wps = [Waypoint(i + 1, w.bearing, w.distance, w.world_xy, w.kind) for i, w in enumerate(wps)]
        out.append((pose, CandidateSet.build(pose, wps)))
    return out


def _goal_fields(world, rng, n: int) -> list[GoalField]:
    grid = nav_grid(world)
    free = np.argwhere(grid.free)
    return [GoalField(grid, grid.center_of(*free[rng.integers(len(free))])) for _ in range(n)]


def generate_items(cfg: SyntheticConfig = SyntheticConfig()) -> list[Item]:
    worlds = generate_worlds(cfg.kind, cfg.n_worlds, derive_seed(cfg.seed, "synthetic", "worlds"))
    items: list[Item] = []
    for w in worlds:
        rng = np.random.default_rng(derive_seed(cfg.seed, "synthetic", w.name))
        sets = _candidate_sets(w, rng, cfg.poses_per_world, cfg.min_waypoint_distance)
        fields = _goal_fields(w, rng, cfg.goals_per_world)
        for pose, cands in sets:
            xy = np.array([c.world_xy for c in cands.candidates])
            for f in fields:
                costs = np.array([f.remaining(x, y) for x, y in xy])
                costs[1:] += cfg.move_penalty
                ctx = StepContext("", pose, cands, (), costs)
                dist = softmax(fuse_branch_logits(noisy_expert_planner(ctx, cfg.planner, rng)))
                items.append((dist, optimal_index(costs)))
    return items


def split(items: list[Item], n_cal: int, seed: int = 0) -> tuple[list[Item], list[Item]]:
    """Random calibration/test split of a pooled item list."""
    if not 0 < n_cal < len(items):
        raise ValueError("n_cal must leave at least one test item")
    order = np.random.default_rng(derive_seed(seed, "synthetic", "split")).permutation(len(items))
    cal = [items[i] for i in order[:n_cal]]
    test = [items[i] for i in order[n_cal:]]
    return cal, test


def scores_of(items: list[Item]) -> list[float]:
    return [1.0 - d.probs[y] for d, y in items]
