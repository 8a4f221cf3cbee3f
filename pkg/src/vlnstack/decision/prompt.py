"""Structured five-section prompt for the reflective reasoner."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..core import CandidateSet, InvalidArgument, Pose2D, WaypointKind

SECTIONS = ("system", "instruction", "history", "candidate", "suggestion")
NO_HISTORY = "no prior steps"

SYSTEM_TEXT = (
    "You are a navigation agent in an indoor scene. You receive a panoramic view with "
    "numbered candidate waypoints, an instruction, your step history and a suggestion "
    "from a fast planner. Reply with the chosen candidate and a confidence in [0, 1]."
)


@dataclass(frozen=True)
class HistoryStep:
    bearing: float
    distance: float

    @property
    def view(self) -> str:
        return view_tag(self.bearing)


@dataclass(frozen=True)
class StepContext:
    """Everything one decision step can see.

    `costs` is privileged world knowledge (remaining path length to the goal
    if each candidate is taken) used only by the scripted stubs.
    """

    instruction: str
    pose: Pose2D
    candidates: CandidateSet
    history: tuple[HistoryStep, ...] = ()
    costs: Optional[np.ndarray] = field(default=None, compare=False)
    style: str = "seen"
    step: int = 0


@dataclass(frozen=True)
class StructuredPrompt:
    system: str
    instruction: str
    history: tuple[str, ...]
    candidates: tuple[str, ...]
    suggestion: str

    def render(self) -> str:
        parts = [
            ("system", [self.system]),
            ("instruction", [self.instruction]),
            ("history", list(self.history) or [NO_HISTORY]),
            ("candidate", list(self.candidates)),
            ("suggestion", [self.suggestion]),
        ]
        lines = []
        for name, body in parts:
            lines.append(f"[{name}]")
            lines.extend(body)
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return self.render()


def format_bearing(bearing: float) -> str:
    deg = round(math.degrees(bearing))
    if deg == 0:
        return "0° ahead"
    side = "left" if deg > 0 else "right"
    return f"{abs(deg)}° {side}"


def view_tag(bearing: float) -> str:
    deg = math.degrees(bearing)
    if abs(deg) <= 45:
        return "front"
    if 45 < deg <= 135:
        return "left"
    if -135 <= deg < -45:
        return "right"
    return "rear"


def candidate_line(wp) -> str:
    line = f"g{wp.id}: {format_bearing(wp.bearing)}, {wp.distance:.2f} m"
    if wp.kind is WaypointKind.VISITED:
        line += ", visited"
    return line


def build_structured_prompt(
    context: StepContext, suggestion: Optional[tuple[int, float]] = None
) -> StructuredPrompt:
    history = tuple(
        f"step {i}: {format_bearing(h.bearing)}, {h.distance:.2f} m, view {h.view}"
        for i, h in enumerate(context.history, start=1)
    )
    cand_lines = ["stop: end the episode here"]
    cand_lines += [candidate_line(wp) for wp in context.candidates.candidates[1:]]
    if suggestion is None:
        sugg = "none"
    else:
        idx, prob = suggestion
        sugg = f"{context.candidates.label(idx)} (p={prob:.2f})"
    return StructuredPrompt(
        system=SYSTEM_TEXT,
        instruction=context.instruction,
        history=history,
        candidates=tuple(cand_lines),
        suggestion=sugg,
    )


_CAND_RE = re.compile(r"^g(\d+): (\d+)° (ahead|left|right), (\d+\.\d+) m(, visited)?$")


def parse_sections(text: str) -> dict[str, list[str]]:
    sections: dict[str, list[str]] = {}
    current = None
    for line in text.splitlines():
        m = re.fullmatch(r"\[(\w+)\]", line)
        if m:
            current = m.group(1)
            if current in sections:
                raise InvalidArgument(f"duplicate section {current!r}")
            sections[current] = []
        elif current is None:
            raise InvalidArgument("text before first section header")
        else:
            sections[current].append(line)
    if tuple(sections) != SECTIONS:
        raise InvalidArgument(f"sections out of order or missing: {tuple(sections)}")
    return sections


def parse_candidates(text: str) -> list[tuple[int, float, float]]:
    """(id, bearing in radians, distance) for every waypoint line of a prompt."""
    out = []
    for line in parse_sections(text)["candidate"]:
        if line.startswith("stop:"):
            continue
        m = _CAND_RE.match(line)
        if not m:
            raise InvalidArgument(f"malformed candidate line {line!r}")
        deg = float(m.group(2)) * (-1.0 if m.group(3) == "right" else 1.0)
        out.append((int(m.group(1)), math.radians(deg), float(m.group(4))))
    return out


def history_steps(poses: Sequence[Pose2D]) -> tuple[HistoryStep, ...]:
    """Relative direction and length of each leg between consecutive decision poses."""
    steps = []
    for a, b in zip(poses, poses[1:]):
        d = a.distance_to(b.xy)
        if d == 0.0:
            continue
        steps.append(HistoryStep(math.remainder(math.atan2(b.y - a.y, b.x - a.x) - a.heading, 2 * math.pi), d))
    return tuple(steps)
