"""Split conformal prediction over action candidates."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import ActionDistribution, InvalidArgument, VlnError


class EmptyCalibration(VlnError):
    pass


QUANTILE_CONFORMAL = "conformal"
QUANTILE_EMPIRICAL = "empirical"


@dataclass(frozen=True)
class CalibrationRecord:
    score: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.score <= 1.0):
            raise InvalidArgument(f"nonconformity score outside [0, 1]: {self.score}")


@dataclass(frozen=True)
class ConformalModel:
    epsilon: float
    tau: float
    n: int
    sorted_scores: tuple[float, ...] = field(repr=False, default=())
    quantile: str = QUANTILE_CONFORMAL

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "tau": self.tau,
            "n": self.n,
            "quantile": self.quantile,
            "scores": list(self.sorted_scores),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConformalModel":
        scores = tuple(float(s) for s in d.get("scores", ()))
        model = cls(
            epsilon=float(d["epsilon"]),
            tau=float(d["tau"]),
            n=int(d["n"]),
            sorted_scores=scores,
            quantile=d.get("quantile", QUANTILE_CONFORMAL),
        )
        if scores:
            expected = _quantile(np.asarray(scores), model.epsilon, model.quantile)
            if expected != model.tau:
                raise InvalidArgument(f"stored tau {model.tau} disagrees with scores ({expected})")
        return model

    @classmethod
    def fixed(cls, tau: float) -> "ConformalModel":
        """A model with a hand-set threshold and no calibration data."""
        if not (0.0 <= tau <= 1.0):
            raise InvalidArgument(f"tau must lie in [0, 1], got {tau}")
        return cls(epsilon=float("nan"), tau=float(tau), n=0)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ConformalModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class PredictionSet:
    member_indices: tuple[int, ...]
    fallback: bool = False

    @property
    def cardinality(self) -> int:
        return len(self.member_indices)

    def __contains__(self, i: int) -> bool:
        return i in self.member_indices

    def __len__(self) -> int:
        return len(self.member_indices)


def nonconformity(dist: ActionDistribution, label: int) -> float:
    if not (0 <= label < len(dist)):
        raise InvalidArgument(f"label {label} out of range for {len(dist)} candidates")
    return 1.0 - dist.probs[label]


def _rank(n: int, epsilon: float) -> int:
    # 1-based rank of the finite-sample conformal quantile
    return min(max(math.ceil((n + 1) * (1.0 - epsilon)), 1), n)


def _quantile(scores: np.ndarray, epsilon: float, method: str) -> float:
    ordered = np.sort(scores)
    n = len(ordered)
    if method == QUANTILE_CONFORMAL:
        return float(ordered[_rank(n, epsilon) - 1])
    if method == QUANTILE_EMPIRICAL:
        return float(np.quantile(ordered, 1.0 - epsilon, method="inverted_cdf"))
    raise InvalidArgument(f"unknown quantile method {method!r}")


def calibrate(
    records: Iterable[CalibrationRecord | float],
    epsilon: float,
    quantile: str = QUANTILE_CONFORMAL,
) -> ConformalModel:
    """Fit the threshold tau from calibration nonconformity scores.

    With ``quantile="conformal"`` tau is the ceil((n+1)(1-eps))-th smallest
    score (clamped to n). ``"empirical"`` uses the plain (1-eps) quantile.
    """
    if not (0.0 < epsilon < 1.0):
        raise InvalidArgument(f"epsilon must lie in (0, 1), got {epsilon}")
    scores = [r.score if isinstance(r, CalibrationRecord) else CalibrationRecord(float(r)).score for r in records]
    if not scores:
        raise EmptyCalibration("no calibration records")
    arr = np.sort(np.asarray(scores, dtype=float))
    tau = _quantile(arr, epsilon, quantile)
    return ConformalModel(
        epsilon=float(epsilon),
        tau=tau,
        n=len(arr),
        sorted_scores=tuple(float(s) for s in arr),
        quantile=quantile,
    )


def raw_prediction_set(tau: float, dist: ActionDistribution) -> tuple[int, ...]:
    """Indices whose nonconformity is <= tau, without the empty-set fallback."""
    scores = 1.0 - dist.as_array()
    return tuple(int(i) for i in np.flatnonzero(scores <= tau))


def prediction_set(model: ConformalModel, dist: ActionDistribution) -> PredictionSet:
    members = raw_prediction_set(model.tau, dist)
    if not members:
        return PredictionSet((dist.argmax(),), fallback=True)
    return PredictionSet(members)


def empirical_coverage(
    model: ConformalModel, labeled: Iterable[tuple[ActionDistribution, int]]
) -> float:
    hits = 0
    total = 0
    for dist, label in labeled:
        total += 1
        hits += label in prediction_set(model, dist)
    if total == 0:
        raise InvalidArgument("empty labeled stream")
    return hits / total


def coverage_lower_bound(epsilon: float, n_test: int, sigmas: float = 3.0) -> float:
    """1 - eps minus `sigmas` binomial standard deviations over n_test items."""
    return 1.0 - epsilon - sigmas * math.sqrt(epsilon * (1.0 - epsilon) / n_test)


def mean_set_size(model: ConformalModel, dists: Sequence[ActionDistribution]) -> float:
    return float(np.mean([prediction_set(model, d).cardinality for d in dists]))
