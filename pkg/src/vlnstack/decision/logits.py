"""Branch-logit fusion and softmax for the planner head."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ActionDistribution, InvalidArgument


@dataclass(frozen=True)
class CandidateLogits:
    local: tuple[float, ...]
    global_: tuple[float, ...]
    weight: float = 0.5

    def __post_init__(self) -> None:
        if len(self.local) != len(self.global_):
            raise InvalidArgument(f"branch shapes differ: {len(self.local)} vs {len(self.global_)}")
        if not (0.0 <= self.weight <= 1.0):
            raise InvalidArgument(f"branch weight outside [0, 1]: {self.weight}")


def fuse_branch_logits(cl: CandidateLogits) -> np.ndarray:
    """w * local + (1 - w) * global."""
    local = np.asarray(cl.local, dtype=float)
    glob = np.asarray(cl.global_, dtype=float)
    if local.shape != glob.shape:
        raise InvalidArgument("branch shapes differ")
    return cl.weight * local + (1.0 - cl.weight) * glob


def softmax(logits) -> ActionDistribution:
    z = np.asarray(logits, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise InvalidArgument("softmax expects a non-empty vector")
    if not np.all(np.isfinite(z)):
        raise InvalidArgument(f"non-finite logit in {z}")
    e = np.exp(z - z.max())
    return ActionDistribution(tuple(e / e.sum()))
