"""Rasterised navigation grid over a world: shortest paths and goal distance fields."""

from __future__ import annotations

import heapq
import math
from functools import cached_property, lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .world import World, point_segment_distance

SQRT2 = math.sqrt(2.0)
_NEIGHBOURS = [(1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0), (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2)]


class NavGrid:
    """Cells ``[ix, iy]`` of side `resolution`; a cell is free when its centre
    keeps at least `inflation` metres from every edge."""

    def __init__(self, world: World, resolution: float = 0.1, inflation: float = 0.25):
        self.world = world
        self.resolution = resolution
        self.inflation = inflation
        self.nx = max(1, int(math.floor(world.width / resolution)))
        self.ny = max(1, int(math.floor(world.height / resolution)))
        xs = (np.arange(self.nx) + 0.5) * resolution
        ys = (np.arange(self.ny) + 0.5) * resolution
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        clear = np.full(len(pts), np.inf)
        for seg in world.edges:
            clear = np.minimum(clear, point_segment_distance_batch(pts, seg))
        for x0, y0, x1, y1 in world.rects:
            inside = (pts[:, 0] > x0) & (pts[:, 0] < x1) & (pts[:, 1] > y0) & (pts[:, 1] < y1)
            clear[inside] = 0.0
        self.clearance = clear.reshape(self.nx, self.ny)
        self.free = self.clearance >= inflation

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        ix = min(max(int(math.floor(x / self.resolution)), 0), self.nx - 1)
        iy = min(max(int(math.floor(y / self.resolution)), 0), self.ny - 1)
        return ix, iy

    def center_of(self, ix: int, iy: int) -> tuple[float, float]:
        return ((ix + 0.5) * self.resolution, (iy + 0.5) * self.resolution)

    def index(self, ix: int, iy: int) -> int:
        return ix * self.ny + iy

    def nearest_free(self, x: float, y: float, max_dist: float) -> Optional[tuple[int, int]]:
        """Free cell closest to (x, y), searching cell centres within max_dist."""
        cx, cy = self.cell_of(x, y)
        if self.free[cx, cy]:
            return cx, cy
        r = int(math.ceil(max_dist / self.resolution)) + 1
        best, best_d = None, math.inf
        for ix in range(max(0, cx - r), min(self.nx, cx + r + 1)):
            for iy in range(max(0, cy - r), min(self.ny, cy + r + 1)):
                if not self.free[ix, iy]:
                    continue
                px, py = self.center_of(ix, iy)
                d = math.hypot(px - x, py - y)
                if d <= max_dist and (d, ix, iy) < (best_d, *(best or (0, 0))):
                    best, best_d = (ix, iy), d
        return best

    @cached_property
    def graph(self) -> csr_matrix:
        rows, cols, w = [], [], []
        free = self.free
        for dx, dy, cost in _NEIGHBOURS:
            src = np.zeros_like(free)
            xs = slice(max(0, -dx), self.nx - max(0, dx))
            ys = slice(max(0, -dy), self.ny - max(0, dy))
            xd = slice(max(0, dx), self.nx - max(0, -dx))
            yd = slice(max(0, dy), self.ny - max(0, -dy))
            ok = free[xs, ys] & free[xd, yd]
            if dx and dy:
                # no corner cutting past a blocked orthogonal neighbour
                ox = slice(max(0, dx), self.nx - max(0, -dx))
                ok &= free[ox, ys] & free[xs, yd]
            src[xs, ys] = ok
            ix, iy = np.nonzero(src)
            rows.append(ix * self.ny + iy)
            cols.append((ix + dx) * self.ny + (iy + dy))
            w.append(np.full(len(ix), cost * self.resolution))
        n = self.nx * self.ny
        return csr_matrix((np.concatenate(w), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))

    def distance_field(self, cell: tuple[int, int]) -> np.ndarray:
        """Grid geodesic distance (m) from `cell` to every cell; inf if unreachable."""
        d = dijkstra(self.graph, directed=True, indices=self.index(*cell))
        return d.reshape(self.nx, self.ny)

    def neighbours(self, ix: int, iy: int):
        free = self.free
        for dx, dy, cost in _NEIGHBOURS:
            jx, jy = ix + dx, iy + dy
            if not (0 <= jx < self.nx and 0 <= jy < self.ny) or not free[jx, jy]:
                continue
            if dx and dy and not (free[ix + dx, iy] and free[ix, iy + dy]):
                continue
            yield jx, jy, cost * self.resolution

    def astar(self, start: tuple[int, int], goal: tuple[int, int]) -> Optional[list[tuple[int, int]]]:
        """8-connected A* with the octile heuristic; None when no path exists."""
        if not (self.free[start] and self.free[goal]):
            return None
        res = self.resolution

        def h(c):
            dx, dy = abs(c[0] - goal[0]), abs(c[1] - goal[1])
            return res * (max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy))

        g = {start: 0.0}
        parent = {start: None}
        heap = [(h(start), 0.0, start)]
        closed = set()
        while heap:
            _, gc, cur = heapq.heappop(heap)
            if cur in closed:
                continue
            if cur == goal:
                path = [cur]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            closed.add(cur)
            for jx, jy, cost in self.neighbours(*cur):
                nxt = (jx, jy)
                ng = gc + cost
                if ng < g.get(nxt, math.inf) - 1e-12:
                    g[nxt] = ng
                    parent[nxt] = cur
                    heapq.heappush(heap, (ng + h(nxt), ng, nxt))
        return None

    def path_cost(self, path: Sequence[tuple[int, int]]) -> float:
        return sum(
            self.resolution * math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(path, path[1:])
        )


def point_segment_distance_batch(points: np.ndarray, seg: np.ndarray) -> np.ndarray:
    a = seg[:2]
    ab = seg[2:] - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.hypot(*(points - a).T)
    t = np.clip(((points - a) @ ab) / denom, 0.0, 1.0)
    return np.hypot(*(points - (a + t[:, None] * ab)).T)


@lru_cache(maxsize=64)
def nav_grid(world: World, resolution: float = 0.1, inflation: float = 0.25) -> NavGrid:
    return NavGrid(world, resolution, inflation)


class GoalField:
    """Remaining geodesic distance to a goal, defined everywhere in the world.

    Points off the reachable free grid take the value of the nearest
    reachable cell plus the straight-line gap to it.
    """

    def __init__(self, grid: NavGrid, goal: Sequence[float]):
        self.grid = grid
        self.goal = (float(goal[0]), float(goal[1]))
        cell = grid.nearest_free(*self.goal, max_dist=1.0)
        if cell is None:
            raise ValueError(f"goal {self.goal} has no free grid cell nearby")
        self.goal_cell = cell
        gx, gy = grid.center_of(*cell)
        self.field = grid.distance_field(cell) + math.hypot(gx - self.goal[0], gy - self.goal[1])
        finite = np.isfinite(self.field)
        _, (self._ix, self._iy) = ndimage.distance_transform_edt(~finite, return_indices=True)

    def remaining(self, x: float, y: float) -> float:
        ix, iy = self.grid.cell_of(x, y)
        jx, jy = int(self._ix[ix, iy]), int(self._iy[ix, iy])
        cx, cy = self.grid.center_of(jx, jy)
        base = float(self.field[jx, jy])
        if (jx, jy) == (ix, iy) and self.grid.free[ix, iy]:
            # interpolate within the cell by the offset from its centre
            return max(base, math.hypot(x - self.goal[0], y - self.goal[1]))
        return base + math.hypot(x - cx, y - cy)
