"""Procedural worlds and episode sampling."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

from ..core import EpisodeSpec, Pose2D, VlnError
from ..decision.prompt import format_bearing
from ..seeding import derive_seed
from ..sim.grid import nav_grid
from ..sim.world import World

KINDS = ("open", "corridor", "rooms", "trap")
MIN_FREE_PATH = 3.0
MAX_ATTEMPTS = 50


class GenerationError(VlnError):
    pass


def _open(rng, name):
    return World(name, 10.0, 10.0, kind="open")


def _corridor(rng, name):
    width = float(rng.uniform(1.0, 1.6))
    h = 4.0
    lo = (h - width) / 2
    rects = [(0.0, 0.0, 12.0, lo), (0.0, lo + width, 12.0, h)]
    # a staggered pillar pinches the corridor without closing it
    if rng.random() < 0.5 and width > 1.3:
        x = float(rng.uniform(4.0, 8.0))
        rects.append((x, lo, x + 0.3, lo + 0.2))
    return World(name, 12.0, h, rects=tuple(rects), kind="corridor", metadata={"corridor": [lo, lo + width]})


def _rooms(rng, name):
    t = 0.2
    rects = []
    # vertical wall at x=5 with one door, horizontal wall at y=5 with one door per half
    door = float(rng.uniform(1.0, 1.4))
    dy = float(rng.uniform(1.0, 9.0 - door))
    rects += [(5 - t / 2, 0.0, 5 + t / 2, dy), (5 - t / 2, dy + door, 5 + t / 2, 10.0)]
    for x0, x1 in ((0.0, 5 - t / 2), (5 + t / 2, 10.0)):
        dx = float(rng.uniform(x0 + 0.5, x1 - 0.5 - door))
        rects += [(x0, 5 - t / 2, dx, 5 + t / 2), (dx + door, 5 - t / 2, x1, 5 + t / 2)]
    for _ in range(int(rng.integers(0, 4))):
        cx, cy = rng.uniform(1.2, 8.8, size=2)
        sx, sy = rng.uniform(0.3, 0.8, size=2)
        rects.append((float(cx - sx / 2), float(cy - sy / 2), float(cx + sx / 2), float(cy + sy / 2)))
    rects = [r for r in rects if r[2] - r[0] > 1e-6 and r[3] - r[1] > 1e-6]
    return World(name, 10.0, 10.0, rects=tuple(rects), kind="rooms")


def trap_rects(back_x: float, cy: float, depth: float, width: float, t: float = 0.2) -> list:
    """U-shaped pocket opening toward -x: back wall at back_x, arms reaching depth back."""
    y0, y1 = cy - width / 2, cy + width / 2
    return [
        (back_x, y0 - t, back_x + t, y1 + t),
        (back_x - depth, y0 - t, back_x, y0),
        (back_x - depth, y1, back_x, y1 + t),
    ]


def _trap(rng, name):
    cy = float(rng.uniform(4.0, 6.0))
    back = float(rng.uniform(5.5, 6.5))
    depth = float(rng.uniform(1.5, 2.5))
    width = float(rng.uniform(1.6, 2.4))
    rects = trap_rects(back, cy, depth, width)
    start = (1.2, cy)
    goal = (min(back + 2.2, 9.0), cy)
    return World(
        name,
        10.0,
        10.0,
        rects=tuple(rects),
        kind="trap",
        metadata={"start": list(start), "goal": list(goal), "pocket": [back - depth, cy - width / 2, back, cy + width / 2]},
    )


_BUILDERS = {"open": _open, "corridor": _corridor, "rooms": _rooms, "trap": _trap}


def max_free_path(world: World) -> float:
    grid = nav_grid(world)
    free = np.argwhere(grid.free)
    if len(free) == 0:
        return 0.0
    # two sweeps approximate the geodesic diameter from below
    d = grid.distance_field(tuple(free[len(free) // 2]))
    far = np.unravel_index(np.argmax(np.where(np.isfinite(d), d, -1)), d.shape)
    d2 = grid.distance_field(far)
    return float(np.max(np.where(np.isfinite(d2), d2, 0.0)))


def generate_worlds(kind: str, count: int, seed: int, styles: Sequence[str] = ("seen",)) -> list[World]:
    if kind not in _BUILDERS:
        raise ValueError(f"unknown world kind {kind!r}; expected one of {KINDS}")
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    for i in range(count):
        for attempt in range(MAX_ATTEMPTS):
            rng = np.random.default_rng(derive_seed(seed, "world", kind, i, attempt))
            w = _BUILDERS[kind](rng, f"{kind}_{i:03d}")
            w = World(w.name, w.width, w.height, w.rects, w.segments, styles[i % len(styles)], w.kind, w.metadata)
            if max_free_path(w) >= MIN_FREE_PATH:
                out.append(w)
                break
        else:
            raise GenerationError(f"could not generate a valid {kind} world #{i}")
    return out


def has_pocket_on_line(world: World) -> bool:
    """Whether the straight start-goal segment passes through the concave pocket."""
    meta = world.metadata
    if "pocket" not in meta:
        return False
    x0, y0, x1, y1 = meta["pocket"]
    (sx, sy), (gx, gy) = meta["start"], meta["goal"]
    for t in np.linspace(0, 1, 200):
        x, y = sx + t * (gx - sx), sy + t * (gy - sy)
        if x0 <= x <= x1 and y0 <= y <= y1:
            return True
    return False


def save_worlds(worlds: Sequence[World], directory: str | Path) -> list[Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for w in worlds:
        p = d / f"{w.name}.json"
        w.save(p)
        paths.append(p)
    return paths


def load_worlds(directory: str | Path) -> list[World]:
    paths = sorted(Path(directory).glob("*.json"))
    if not paths:
        raise FileNotFoundError(f"no world files in {directory}")
    return [World.load(p) for p in paths]


def instruction_for(start: Pose2D, goal, length: float) -> str:
    bearing = math.remainder(math.atan2(goal[1] - start.y, goal[0] - start.x) - start.heading, 2 * math.pi)
    return f"Turn to {format_bearing(bearing)}, walk about {length:.1f} meters and stop at the goal."


def sample_episode(world: World, episode_id: int, rng: np.random.Generator, min_len: float = 3.0, max_len: float = 9.0) -> EpisodeSpec:
    grid = nav_grid(world)
    free = np.argwhere(grid.free)
    for _ in range(MAX_ATTEMPTS):
        if "start" in world.metadata and "goal" in world.metadata:
            jitter = rng.uniform(-0.2, 0.2, size=4)
            sx, sy = world.metadata["start"][0] + jitter[0], world.metadata["start"][1] + jitter[1]
            gx, gy = world.metadata["goal"][0] + jitter[2], world.metadata["goal"][1] + jitter[3]
            s_cell, g_cell = grid.cell_of(sx, sy), grid.cell_of(gx, gy)
            if not (grid.free[s_cell] and grid.free[g_cell]):
                continue
            start_xy, goal_xy = grid.center_of(*s_cell), grid.center_of(*g_cell)
        else:
            s_cell = tuple(free[rng.integers(len(free))])
            g_cell = tuple(free[rng.integers(len(free))])
            start_xy, goal_xy = grid.center_of(*s_cell), grid.center_of(*g_cell)
        d = grid.distance_field(g_cell)[s_cell]
        if not (min_len <= d <= max_len):
            continue
        heading = float(rng.uniform(-math.pi, math.pi))
        start = Pose2D(start_xy[0], start_xy[1], heading)
        euclid = math.hypot(goal_xy[0] - start_xy[0], goal_xy[1] - start_xy[1])
        length = max(float(d), euclid)
        return EpisodeSpec(
            id=episode_id,
            world=world.name,
            start=start,
            goal=goal_xy,
            instruction=instruction_for(start, goal_xy, length),
            shortest_path_length=length,
            metadata={"style": world.style, "kind": world.kind},
        )
    raise GenerationError(f"no valid start/goal pair in world {world.name}")


def generate_episodes(worlds: Sequence[World], count: int, seed: int, id_offset: int = 0) -> list[EpisodeSpec]:
    specs = []
    for i in range(count):
        eid = id_offset + i
        world = worlds[i % len(worlds)]
        rng = np.random.default_rng(derive_seed(seed, "episode", eid))
        specs.append(sample_episode(world, eid, rng))
    return specs
