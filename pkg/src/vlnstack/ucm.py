"""Uncertainty-aware collaboration between a fast planner and a reasoner.

The planner's conformal prediction set gates the reasoner: a singleton set
is executed directly, otherwise the reasoner's verdict is blended into the
planner distribution with a weight that grows with the set size.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .conformal import ConformalModel, PredictionSet, prediction_set
from .core import ActionDistribution, InvalidArgument, VlnError

log = logging.getLogger(__name__)

ALPHA_CAP = 0.9
DEFAULT_L_MAX = 10


class ReasonerUnavailable(VlnError):
    pass


@dataclass(frozen=True)
class ReasonerVerdict:
    chosen: int
    confidence: float
    rationale: str = ""

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence <= 1.0):
            raise InvalidArgument(f"confidence outside [0, 1]: {self.confidence}")


@dataclass(frozen=True)
class UcmConfig:
    l_max: int = DEFAULT_L_MAX
    retries: int = 1
    strict: bool = False

    def __post_init__(self) -> None:
        if self.l_max < 1:
            raise InvalidArgument("l_max must be >= 1")


@dataclass(frozen=True)
class FusionOutcome:
    selected: int
    reasoner_invoked: bool
    prediction_set: PredictionSet
    alpha: Optional[float] = None
    fused: Optional[tuple[float, ...]] = None
    verdict: Optional[ReasonerVerdict] = None
    reasoner_failed: bool = False
    error: Optional[str] = None

    def audit(self, planner: ActionDistribution, tau: float) -> dict:
        return {
            "planner_probs": list(planner.probs),
            "tau": tau,
            "set": list(self.prediction_set.member_indices),
            "set_fallback": self.prediction_set.fallback,
            "alpha": self.alpha,
            "verdict": None
            if self.verdict is None
            else {
                "chosen": self.verdict.chosen,
                "confidence": self.verdict.confidence,
                "rationale": self.verdict.rationale,
            },
            "fused": None if self.fused is None else list(self.fused),
            "selected": self.selected,
            "reasoner_invoked": self.reasoner_invoked,
            "reasoner_failed": self.reasoner_failed,
            "error": self.error,
        }


Reasoner = Callable[[PredictionSet, Any], ReasonerVerdict]


def uncertainty_weight(set_cardinality: int, l_max: int = DEFAULT_L_MAX) -> float:
    if set_cardinality < 1:
        raise InvalidArgument("prediction set cardinality must be >= 1")
    if l_max < 1:
        raise InvalidArgument("l_max must be >= 1")
    return min(set_cardinality / l_max, ALPHA_CAP)


def sparse_reasoner_distribution(verdict: ReasonerVerdict, k: int) -> np.ndarray:
    if not (0 <= verdict.chosen < k):
        raise InvalidArgument(f"reasoner chose {verdict.chosen}, outside {k} candidates")
    out = np.zeros(k)
    out[verdict.chosen] = verdict.confidence
    return out


def fuse(p_planner: ActionDistribution | np.ndarray, p_reasoner: np.ndarray, alpha: float) -> np.ndarray:
    """(1 - alpha) * planner + alpha * reasoner, element-wise, not renormalized."""
    p = p_planner.as_array() if isinstance(p_planner, ActionDistribution) else np.asarray(p_planner, float)
    q = np.asarray(p_reasoner, dtype=float)
    if p.shape != q.shape:
        raise InvalidArgument(f"length mismatch: {p.shape} vs {q.shape}")
    if not (0.0 <= alpha <= ALPHA_CAP):
        raise InvalidArgument(f"alpha outside [0, {ALPHA_CAP}]: {alpha}")
    return (1.0 - alpha) * p + alpha * q


def _ask(reasoner: Reasoner, pset: PredictionSet, context: Any, retries: int) -> ReasonerVerdict:
    last: Optional[ReasonerVerdict] = None
    for _ in range(retries + 1):
        verdict = reasoner(pset, context)
        if verdict.chosen in pset:
            return verdict
        last = verdict
        log.debug("reasoner chose %d outside set %s", verdict.chosen, pset.member_indices)
    raise ReasonerUnavailable(f"reasoner kept choosing outside the prediction set (last: {last.chosen})")


def decide(
    p_planner: ActionDistribution,
    model: ConformalModel,
    reasoner: Reasoner,
    context: Any = None,
    config: UcmConfig = UcmConfig(),
) -> FusionOutcome:
    pset = prediction_set(model, p_planner)
    if pset.cardinality == 1:
        return FusionOutcome(selected=pset.member_indices[0], reasoner_invoked=False, prediction_set=pset)

    try:
        verdict = _ask(reasoner, pset, context, config.retries)
    except Exception as exc:  # any reasoner outage degrades to the planner
        if config.strict:
            if isinstance(exc, ReasonerUnavailable):
                raise
            raise ReasonerUnavailable(str(exc)) from exc
        return FusionOutcome(
            selected=p_planner.argmax(),
            reasoner_invoked=True,
            prediction_set=pset,
            reasoner_failed=True,
            error=f"{type(exc).__name__}: {exc}",
        )

    alpha = uncertainty_weight(pset.cardinality, config.l_max)
    fused = fuse(p_planner, sparse_reasoner_distribution(verdict, len(p_planner)), alpha)
    return FusionOutcome(
        selected=int(np.argmax(fused)),
        reasoner_invoked=True,
        prediction_set=pset,
        alpha=alpha,
        fused=tuple(float(v) for v in fused),
        verdict=verdict,
    )
