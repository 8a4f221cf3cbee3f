"""Navigation metrics: TL, NE, OSR, SR, SPL and success-threshold sweeps."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .core import EpisodeSpec, InvalidArgument, VlnError

DEFAULT_SDT = 3.0
DEFAULT_SWEEP = (1.0, 1.5, 2.0, 2.5, 3.0)


class InvalidSpec(VlnError):
    pass


@dataclass(frozen=True)
class EpisodeMetrics:
    tl: float
    ne: float
    osr: int
    sr: int
    spl: float
    sdt: float

    def to_dict(self) -> dict:
        return asdict(self)


def _xy(pose):
    return (pose.x, pose.y) if hasattr(pose, "x") else (float(pose[0]), float(pose[1]))


def compute(log, spec: EpisodeSpec, sdt: float = DEFAULT_SDT) -> EpisodeMetrics:
    """Metrics for one trajectory; success needs an explicit STOP within `sdt` of the goal."""
    if not log.poses:
        raise InvalidArgument("empty trajectory log")
    if not spec.shortest_path_length > 0:
        raise InvalidSpec("shortest path length must be positive")
    pts = [_xy(p) for p in log.poses]
    gx, gy = spec.goal
    tl = math.fsum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:]))
    ne = math.hypot(pts[-1][0] - gx, pts[-1][1] - gy)
    closest = min(math.hypot(x - gx, y - gy) for x, y in pts)
    sr = int(bool(log.stopped) and ne <= sdt)
    osr = int(closest <= sdt)
    l = spec.shortest_path_length
    spl = sr * l / max(tl, l)
    return EpisodeMetrics(tl=tl, ne=ne, osr=osr, sr=sr, spl=spl, sdt=sdt)


@dataclass(frozen=True)
class Summary:
    n: int
    tl: float
    ne: float
    osr: float
    sr: float
    spl: float
    sdt: float

    def to_dict(self) -> dict:
        return asdict(self)


def aggregate(items: Sequence[EpisodeMetrics]) -> Summary:
    """Means of TL/NE; OSR, SR and SPL as percentages."""
    if not items:
        raise InvalidArgument("cannot aggregate an empty list")
    n = len(items)
    sdts = {m.sdt for m in items}
    return Summary(
        n=n,
        tl=math.fsum(m.tl for m in items) / n,
        ne=math.fsum(m.ne for m in items) / n,
        osr=100.0 * math.fsum(m.osr for m in items) / n,
        sr=100.0 * math.fsum(m.sr for m in items) / n,
        spl=100.0 * math.fsum(m.spl for m in items) / n,
        sdt=sdts.pop() if len(sdts) == 1 else float("nan"),
    )


def sdt_sweep(pairs: Iterable[tuple], thresholds: Sequence[float] = DEFAULT_SWEEP) -> list[Summary]:
    """One aggregate row per threshold over (log, spec) pairs."""
    thresholds = list(thresholds)
    if any(t <= 0 for t in thresholds) or thresholds != sorted(thresholds):
        raise InvalidArgument("thresholds must be positive and ascending")
    pairs = list(pairs)
    return [aggregate([compute(log, spec, t) for log, spec in pairs]) for t in thresholds]


HEADER = ("SDT", "n", "TL", "NE", "OSR", "SR", "SPL")


def format_table(rows: Sequence[Summary], title: str = "") -> str:
    lines = [title] if title else []
    lines.append("{:>5} {:>5} {:>7} {:>7} {:>7} {:>7} {:>7}".format(*HEADER))
    for r in rows:
        lines.append(f"{r.sdt:>5.2f} {r.n:>5d} {r.tl:>7.2f} {r.ne:>7.2f} {r.osr:>7.2f} {r.sr:>7.2f} {r.spl:>7.2f}")
    return "\n".join(lines) + "\n"
