"""Robot-centred occupancy cost map built from a single LiDAR scan."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from ..core import InvalidArgument, Pose2D, VlnError


class DegeneratePose(VlnError):
    """The robot's own cell is not free, so nothing is reachable."""


class CellState(enum.IntEnum):
    FREE = 0
    INFLATED = 1
    OCCUPIED = 2
    UNKNOWN = 3


@dataclass(frozen=True)
class LidarScan:
    angles: np.ndarray  # relative to robot heading
    ranges: np.ndarray
    max_range: float

    def __post_init__(self) -> None:
        if len(self.angles) != len(self.ranges):
            raise InvalidArgument("angles and ranges differ in length")
        if len(self.ranges) == 0:
            raise InvalidArgument("empty scan")
        r = np.asarray(self.ranges)
        if np.any(r <= 0) or np.any(r > self.max_range):
            raise InvalidArgument("ranges must lie in (0, max_range]")

    @classmethod
    def uniform(cls, ranges, max_range: float) -> "LidarScan":
        ranges = np.asarray(ranges, dtype=float)
        angles = np.arange(len(ranges)) * (2 * math.pi / len(ranges))
        return cls(angles, ranges, float(max_range))

    def to_dict(self) -> dict:
        return {"angles": self.angles.tolist(), "ranges": self.ranges.tolist(), "max_range": self.max_range}

    @classmethod
    def from_dict(cls, d: dict) -> "LidarScan":
        return cls(np.asarray(d["angles"], float), np.asarray(d["ranges"], float), float(d["max_range"]))


@dataclass(frozen=True)
class CostMapParams:
    resolution: float = 0.05
    size: int = 120
    clearance_radius: float = 0.10

    def __post_init__(self) -> None:
        if self.size <= 0 or self.resolution <= 0:
            raise InvalidArgument("cost map size and resolution must be positive")
        if self.clearance_radius < 0:
            raise InvalidArgument("clearance_radius must be >= 0")


@dataclass(frozen=True)
class OccupancyCostMap:
    """Cells are indexed ``[ix, iy]`` in the robot frame (x ahead, y left).

    `distance` holds the Euclidean distance (m) from each cell centre to the
    nearest OCCUPIED cell centre; inf when the scan saw no obstacle.
    """

    state: np.ndarray
    distance: np.ndarray
    resolution: float
    origin: Pose2D  # robot-frame position of the corner of cell (0, 0)
    pose: Pose2D  # world pose of the robot when the scan was taken

    @property
    def size(self) -> int:
        return self.state.shape[0]

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin.x) / self.resolution)),
            int(math.floor((y - self.origin.y) / self.resolution)),
        )

    def center_of(self, ix, iy):
        return (
            self.origin.x + (np.asarray(ix) + 0.5) * self.resolution,
            self.origin.y + (np.asarray(iy) + 0.5) * self.resolution,
        )

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.state.shape[0] and 0 <= iy < self.state.shape[1]

    @property
    def robot_cell(self) -> tuple[int, int]:
        return self.cell_of(0.0, 0.0)

    def to_pgm(self, path: str | Path) -> None:
        """Write a binary greymap: free white, inflated light, occupied black, unknown mid grey."""
        shades = np.array([255, 190, 0, 128], dtype=np.uint8)
        # image rows run top-down, i.e. +y first
        img = shades[self.state.T[::-1]]
        h, w = img.shape
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode())
            fh.write(img.tobytes())


def build_cost_map(scan: LidarScan, params: CostMapParams = CostMapParams(), pose: Pose2D = Pose2D(0, 0, 0)) -> OccupancyCostMap:
    res, n = params.resolution, params.size
    half = n * res / 2.0
    origin = Pose2D(-half, -half, 0.0)
    angles = np.asarray(scan.angles, dtype=float)
    ranges = np.asarray(scan.ranges, dtype=float)
    cos, sin = np.cos(angles), np.sin(angles)

    def to_cells(x, y):
        ix = np.floor((x + half) / res).astype(np.int64)
        iy = np.floor((y + half) / res).astype(np.int64)
        ok = (ix >= 0) & (ix < n) & (iy >= 0) & (iy < n)
        return ix[ok], iy[ok]

    swept = np.zeros((n, n), dtype=bool)
    reach = min(scan.max_range, half * math.sqrt(2.0))
    ts = np.arange(0.0, reach, res / 2.0)
    along = ts[None, :] < ranges[:, None]
    bx = (cos[:, None] * ts[None, :])[along]
    by = (sin[:, None] * ts[None, :])[along]
    swept[to_cells(bx, by)] = True

    occupied = np.zeros((n, n), dtype=bool)
    hit = ranges < scan.max_range
    occupied[to_cells(ranges[hit] * cos[hit], ranges[hit] * sin[hit])] = True

    if occupied.any():
        distance = ndimage.distance_transform_edt(~occupied) * res
    else:
        distance = np.full((n, n), np.inf)

    state = np.full((n, n), CellState.UNKNOWN, dtype=np.int8)
    state[swept] = CellState.FREE
    state[(distance <= params.clearance_radius) & ~occupied] = CellState.INFLATED
    state[occupied] = CellState.OCCUPIED
    return OccupancyCostMap(state, distance, res, origin, pose)


def extract_navigable(cmap: OccupancyCostMap) -> np.ndarray:
    """FREE cells 8-connected to the robot cell, as an (N, 2) array of [ix, iy]."""
    rx, ry = cmap.robot_cell
    if not cmap.in_bounds(rx, ry) or cmap.state[rx, ry] != CellState.FREE:
        raise DegeneratePose(f"robot cell {(rx, ry)} is not free")
    labels, _ = ndimage.label(cmap.state == CellState.FREE, structure=np.ones((3, 3), dtype=bool))
    return np.argwhere(labels == labels[rx, ry])
