"""Training-free waypoint generation by clustering navigable LiDAR space."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import Pose2D, Waypoint, WaypointKind
from .costmap import CellState, CostMapParams, LidarScan, OccupancyCostMap, build_cost_map, extract_navigable
from .kmeans import kmeans


@dataclass(frozen=True)
class LidarWaypointParams:
    k: int = 10
    costmap: CostMapParams = field(default_factory=CostMapParams)
    min_clearance: float = 0.25
    min_separation: float = 0.5
    seed: int = 0


@dataclass(frozen=True)
class LidarWaypointResult:
    waypoints: list[Waypoint]
    cost_map: OccupancyCostMap
    navigable: np.ndarray
    centers: np.ndarray


def filter_centers(
    centers,
    cmap: OccupancyCostMap,
    min_clearance: float = 0.25,
    min_separation: float = 0.5,
    navigable: np.ndarray | None = None,
) -> list[Waypoint]:
    """Drop centres that are not navigable, too close to obstacles, or too close together.

    Centres snap to their cell centre. On a separation conflict the centre
    with more clearance survives, ties going to the lower index.
    """
    if navigable is None:
        reachable = cmap.state == CellState.FREE
    else:
        reachable = np.zeros(cmap.state.shape, dtype=bool)
        reachable[navigable[:, 0], navigable[:, 1]] = True

    candidates = []
    for i, (x, y) in enumerate(np.asarray(centers, dtype=float).reshape(-1, 2)):
        ix, iy = cmap.cell_of(x, y)
        if not cmap.in_bounds(ix, iy) or not reachable[ix, iy]:
            continue
        clearance = float(cmap.distance[ix, iy])
        if clearance < min_clearance:
            continue
        cx, cy = cmap.center_of(ix, iy)
        candidates.append((-clearance, i, float(cx), float(cy)))

    kept: list[tuple[int, float, float]] = []
    for _, i, cx, cy in sorted(candidates):
        if all(math.hypot(cx - kx, cy - ky) >= min_separation for _, kx, ky in kept):
            kept.append((i, cx, cy))
    kept.sort()

    out = []
    for n, (_, cx, cy) in enumerate(kept, start=1):
        out.append(Waypoint.from_relative(n, cmap.pose, math.atan2(cy, cx), math.hypot(cx, cy), WaypointKind.GHOST))
    return out


def run_lidar_pipeline(scan: LidarScan, pose: Pose2D, params: LidarWaypointParams = LidarWaypointParams()) -> LidarWaypointResult:
    cmap = build_cost_map(scan, params.costmap, pose)
    cells = extract_navigable(cmap)
    xs, ys = cmap.center_of(cells[:, 0], cells[:, 1])
    points = np.column_stack([xs, ys])
    centers = kmeans(points, params.k, params.seed)
    wps = filter_centers(centers, cmap, params.min_clearance, params.min_separation, cells)
    return LidarWaypointResult(wps, cmap, cells, centers)


def predict_waypoints_lidar(
    scan: LidarScan, pose: Pose2D = Pose2D(0.0, 0.0, 0.0), params: LidarWaypointParams = LidarWaypointParams()
) -> list[Waypoint]:
    """Cost map -> navigable cells -> k-means -> filter -> robot/world frames."""
    return run_lidar_pipeline(scan, pose, params).waypoints
