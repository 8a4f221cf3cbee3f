"""Polar waypoint heatmap and greedy non-maximum suppression."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import InvalidArgument, Pose2D, Waypoint, WaypointKind, normalize_heading

N_ANGLES = 120
N_DISTANCES = 12
ANGLE_STEP = math.radians(3.0)
DISTANCE_STEP = 0.25


@dataclass(frozen=True)
class WaypointHeatmap:
    """values[a, d]: angle bin a (3 deg, counter-clockwise from ahead), distance bin d (0.25 m steps)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (N_ANGLES, N_DISTANCES):
            raise InvalidArgument(f"heatmap must be {N_ANGLES}x{N_DISTANCES}, got {v.shape}")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise InvalidArgument("heatmap values must be finite and >= 0")
        object.__setattr__(self, "values", v)


def bin_bearing(a: int) -> float:
    # degrees first so bin 60 lands exactly on pi
    return normalize_heading(math.radians(3.0 * a))


def bin_distance(d: int) -> float:
    return DISTANCE_STEP * (d + 1)


def nms_heatmap(
    hm: WaypointHeatmap,
    p: int,
    suppression: tuple[int, int] = (5, 2),
    pose: Pose2D = Pose2D(0.0, 0.0, 0.0),
    min_value: float = 0.0,
) -> list[Waypoint]:
    """Greedy peak picking with a wrapped angular / clamped radial exclusion window.

    Cells are visited in descending value, ties by lower linear index
    ``a * 12 + d``; only values strictly above `min_value` are eligible.
    """
    if p < 1:
        raise InvalidArgument("p must be >= 1")
    da, dd = suppression
    if da < 0 or dd < 0:
        raise InvalidArgument("suppression radii must be >= 0")
    flat = hm.values.ravel()
    order = np.lexsort((np.arange(flat.size), -flat))
    suppressed = np.zeros(hm.values.shape, dtype=bool)
    picks = []
    for lin in order:
        if len(picks) == p or flat[lin] <= min_value:
            break
        a, d = divmod(int(lin), N_DISTANCES)
        if suppressed[a, d]:
            continue
        picks.append((a, d))
        rows = [(a + off) % N_ANGLES for off in range(-da, da + 1)]
        suppressed[np.ix_(rows, range(max(0, d - dd), min(N_DISTANCES, d + dd + 1)))] = True
    return [
        Waypoint.from_relative(i, pose, bin_bearing(a), bin_distance(d), WaypointKind.GHOST)
        for i, (a, d) in enumerate(picks, start=1)
    ]


def suppressed_by(a1: int, d1: int, a2: int, d2: int, suppression: tuple[int, int]) -> bool:
    """Whether cell 2 falls in the exclusion window of cell 1."""
    diff = abs(a1 - a2) % N_ANGLES
    return min(diff, N_ANGLES - diff) <= suppression[0] and abs(d1 - d2) <= suppression[1]
