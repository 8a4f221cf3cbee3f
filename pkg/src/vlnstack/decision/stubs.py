"""Stand-ins for the learned planner and the language-model reasoner.

Both read privileged remaining-path costs from the step context and corrupt
them in a controlled, seeded way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..conformal import PredictionSet
from ..core import InvalidArgument
from ..ucm import ReasonerVerdict
from .logits import CandidateLogits
from .prompt import StepContext, StructuredPrompt, build_structured_prompt

UNSEEN = "unseen"


@dataclass(frozen=True)
class PlannerSkill:
    beta: float = 8.0
    sigma: float = 0.5
    weight: float = 0.5
    unseen_beta_scale: float = 1.0
    unseen_sigma_scale: float = 1.0

    def for_style(self, style: str) -> tuple[float, float]:
        if style == UNSEEN:
            return self.beta * self.unseen_beta_scale, self.sigma * self.unseen_sigma_scale
        return self.beta, self.sigma

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ReasonerSkill:
    error_rate: float = 0.0
    unseen_error_rate: Optional[float] = None
    confidence: float = 0.9
    # when set, confidence is drawn uniformly from [confidence_low, confidence]
    confidence_low: Optional[float] = None

    def __post_init__(self) -> None:
        for r in (self.error_rate, self.unseen_error_rate):
            if r is not None and not (0.0 <= r <= 1.0):
                raise InvalidArgument(f"error rate outside [0, 1]: {r}")
        if not (0.0 <= self.confidence <= 1.0):
            raise InvalidArgument("confidence outside [0, 1]")

    def error_for(self, style: str) -> float:
        if style == UNSEEN and self.unseen_error_rate is not None:
            return self.unseen_error_rate
        return self.error_rate

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _costs(context: StepContext) -> np.ndarray:
    if context.costs is None:
        raise InvalidArgument("step context carries no oracle costs")
    costs = np.asarray(context.costs, dtype=float)
    if costs.shape != (len(context.candidates),):
        raise InvalidArgument("oracle costs do not align with candidates")
    return costs


def optimal_index(costs, members=None) -> int:
    costs = np.asarray(costs, dtype=float)
    if members is None:
        return int(np.argmin(costs))
    members = list(members)
    return members[int(np.argmin(costs[members]))]


def noisy_expert_planner(
    context: StepContext, skill: PlannerSkill, rng: np.random.Generator
) -> CandidateLogits:
    """Logits = -beta * remaining distance + Gaussian noise, per branch."""
    costs = _costs(context)
    beta, sigma = skill.for_style(context.style)
    base = -beta * costs
    local = base + sigma * rng.standard_normal(costs.size)
    glob = base + sigma * rng.standard_normal(costs.size)
    return CandidateLogits(tuple(local), tuple(glob), skill.weight)


def _rationale(prompt: StructuredPrompt, labels: list[str], chosen: str, optimal: str, c: float) -> str:
    steps = len(prompt.history)
    agree = "agrees with" if prompt.suggestion.startswith(chosen + " ") else "departs from"
    return "\n".join(
        [
            f"Trajectory status: {steps} prior step(s) taken toward the instruction target.",
            f"Action planning: plausible candidates are {', '.join(labels)}.",
            f"Visual grounding: {optimal} lies along the most direct route visible in the panorama.",
            f"Suggestion evaluation: the planner suggests {prompt.suggestion}; this choice {agree} it.",
            f"Final decision: {chosen} with confidence {c:.2f}.",
        ]
    )


def scripted_reasoner(
    prompt: StructuredPrompt,
    pset: PredictionSet,
    costs,
    *,
    error_rate: float = 0.0,
    confidence: float = 0.9,
    confidence_low: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
    labels: Optional[list[str]] = None,
) -> ReasonerVerdict:
    """Pick the set member with the least remaining path, erring at `error_rate`.

    An error is a uniformly random non-optimal member (when one exists).
    """
    members = list(pset.member_indices)
    if not members:
        raise InvalidArgument("empty prediction set")
    rng = rng if rng is not None else np.random.default_rng(0)
    best = optimal_index(costs, members)
    chosen = best
    u = rng.random()
    others = [m for m in members if m != best]
    if others and u < error_rate:
        chosen = others[int(rng.integers(len(others)))]
    if confidence_low is None:
        c = confidence
    else:
        c = float(rng.uniform(confidence_low, confidence))
    names = labels or [("stop" if i == 0 else f"g{i}") for i in range(max(members) + 1)]
    text = _rationale(prompt, [names[m] for m in members], names[chosen], names[best], c)
    return ReasonerVerdict(chosen=chosen, confidence=c, rationale=text)


class ScriptedReasoner:
    """Callback adapter matching ``ucm.decide``'s reasoner signature."""

    def __init__(self, skill: ReasonerSkill, rng: np.random.Generator):
        self.skill = skill
        self.rng = rng
        self.suggestion: Optional[tuple[int, float]] = None
        self.last_prompt: Optional[StructuredPrompt] = None

    def __call__(self, pset: PredictionSet, context: StepContext) -> ReasonerVerdict:
        prompt = build_structured_prompt(context, self.suggestion)
        self.last_prompt = prompt
        labels = [context.candidates.label(i) for i in range(len(context.candidates))]
        return scripted_reasoner(
            prompt,
            pset,
            _costs(context),
            error_rate=self.skill.error_for(context.style),
            confidence=self.skill.confidence,
            confidence_low=self.skill.confidence_low,
            rng=self.rng,
            labels=labels,
        )
