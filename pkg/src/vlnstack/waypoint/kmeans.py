"""Seeded k-means (k-means++ seeding, Lloyd iterations)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import InvalidArgument

MAX_ITER = 50
REL_TOL = 1e-4


@dataclass(frozen=True)
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray
    inertia_history: tuple[float, ...]

    @property
    def inertia(self) -> float:
        return self.inertia_history[-1]


def _sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (points**2).sum(axis=1)[:, None] - 2.0 * points @ centers.T + (centers**2).sum(axis=1)[None, :]
    return np.maximum(d2, 0.0)


def kmeans_plus_plus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    chosen = [int(rng.integers(n))]
    d2 = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            break
        # inverse-CDF draw keeps the sequence of rng calls fixed
        idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
        idx = min(idx, n - 1)
        chosen.append(idx)
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return points[chosen].copy()


def lloyd(
    points, k: int, seed: int = 0, max_iter: int = MAX_ITER, tol: float = REL_TOL
) -> KMeansResult:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise InvalidArgument("kmeans needs a non-empty (N, D) point array")
    if k < 1:
        raise InvalidArgument("k must be >= 1")

    rng = np.random.default_rng(seed)
    centers = kmeans_plus_plus(pts, k, rng)
    if len(centers) < k:
        # seeding ran out of distinct points: every point coincides with a centre
        labels = np.argmin(_sq_dists(pts, centers), axis=1)
        return KMeansResult(centers, labels, (0.0,))

    total_sq = float((pts**2).sum())
    rows = np.arange(len(pts))
    history: list[float] = []
    labels = np.zeros(len(pts), dtype=np.int64)
    for _ in range(max_iter):
        # |x|^2 is constant per row, so argmin only needs |c|^2 - 2 x.c
        partial = (centers**2).sum(axis=1)[None, :] - 2.0 * (pts @ centers.T)
        labels = np.argmin(partial, axis=1)
        inertia = max(total_sq + float(partial[rows, labels].sum()), 0.0)
        if history and history[-1] > 0 and (history[-1] - inertia) / history[-1] < tol:
            history.append(inertia)
            break
        history.append(inertia)
        counts = np.bincount(labels, minlength=len(centers))
        sums = np.column_stack(
            [np.bincount(labels, weights=pts[:, j], minlength=len(centers)) for j in range(pts.shape[1])]
        )
        nonempty = counts > 0
        # empty clusters keep their previous centre
        centers[nonempty] = sums[nonempty] / counts[nonempty, None]
        if inertia == 0.0:
            break
    return KMeansResult(centers, labels, tuple(history))


def kmeans(points, k: int, seed: int = 0) -> np.ndarray:
    """Cluster centres, shape (min(k, #distinct points), D)."""
    return lloyd(points, k, seed).centers
