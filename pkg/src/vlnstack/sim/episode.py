"""Episode loop: scan -> waypoints -> decision -> point-goal controller."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..conformal import ConformalModel, PredictionSet
from ..control import ControllerOutcome, TryoutConfig, planned_controller, tryout_controller
from ..core import CandidateSet, EpisodeSpec, NavAction, Pose2D, Waypoint, WaypointKind
from ..decision import (
    PanoramaLayout,
    PlannerSkill,
    ReasonerSkill,
    ScriptedReasoner,
    StepContext,
    candidate_markers,
    fuse_branch_logits,
    noisy_expert_planner,
    softmax,
)
from ..decision.prompt import history_steps
from ..seeding import derive_seed
from ..ucm import UcmConfig, decide
from ..waypoint import DegeneratePose, LidarWaypointParams, run_lidar_pipeline
from .grid import GoalField, nav_grid
from .kinematics import KinematicsConfig
from .world import World, scan

MODES = ("planner", "reasoner", "ucm")
CONTROLLERS = ("planned", "tryout")


@dataclass(frozen=True)
class Agents:
    mode: str = "ucm"
    planner: PlannerSkill = field(default_factory=PlannerSkill)
    reasoner: ReasonerSkill = field(default_factory=ReasonerSkill)
    conformal: Optional[ConformalModel] = None
    ucm: UcmConfig = field(default_factory=UcmConfig)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown agent mode {self.mode!r}; expected one of {MODES}")
        if self.mode == "ucm" and self.conformal is None:
            raise ValueError("ucm mode needs a conformal model")


@dataclass(frozen=True)
class EpisodeConfig:
    kinematics: KinematicsConfig = field(default_factory=KinematicsConfig)
    controller: str = "planned"
    tryout: TryoutConfig = field(default_factory=TryoutConfig)
    waypoints: LidarWaypointParams = field(default_factory=LidarWaypointParams)
    n_beams: int = 360
    max_range: float = 6.0
    max_decisions: int = 40
    retry_budget: int = 3
    # extra path length a move must save over stopping here
    move_penalty: float = 0.25
    # waypoints closer than this are dropped as no-ops
    min_waypoint_distance: float = 0.5
    visited_radius: float = 0.5
    panorama: PanoramaLayout = field(default_factory=PanoramaLayout)

    def __post_init__(self) -> None:
        if self.controller not in CONTROLLERS:
            raise ValueError(f"unknown controller {self.controller!r}")


@dataclass
class TrajectoryLog:
    episode_id: int
    poses: list[Pose2D]
    actions: list[NavAction] = field(default_factory=list)
    collisions: int = 0
    stopped: bool = False
    termination: str = ""
    decisions: list[dict] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    # index into `actions` at which each decision was taken
    decision_steps: list[int] = field(default_factory=list)

    def check(self) -> None:
        if len(self.poses) != len(self.actions) + 1:
            raise AssertionError("log must hold one more pose than actions")
        if self.stopped and (not self.actions or self.actions[-1] is not NavAction.STOP):
            raise AssertionError("stopped log must end with STOP")

    def to_records(self) -> list[dict]:
        recs: list[dict] = []
        by_step: dict[int, list[dict]] = {}
        for at, d in zip(self.decision_steps, self.decisions):
            by_step.setdefault(at, []).append(d)
        recs.append({"type": "start", "episode": self.episode_id, "pose": self.poses[0].to_dict()})
        for t, (a, p) in enumerate(zip(self.actions, self.poses[1:])):
            for d in by_step.pop(t, []):
                recs.append({"type": "decision", "episode": self.episode_id, "t": t, **d})
            recs.append({"type": "step", "episode": self.episode_id, "t": t, "action": a.value, "pose": p.to_dict()})
        for t, ds in sorted(by_step.items()):
            for d in ds:
                recs.append({"type": "decision", "episode": self.episode_id, "t": t, **d})
        for e in self.events:
            recs.append({"type": "event", "episode": self.episode_id, **e})
        recs.append(
            {
                "type": "end",
                "episode": self.episode_id,
                "stopped": self.stopped,
                "collisions": self.collisions,
                "termination": self.termination,
                "n_actions": len(self.actions),
            }
        )
        return recs

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.to_records())

    @classmethod
    def from_records(cls, records: list[dict]) -> "TrajectoryLog":
        start = next(r for r in records if r["type"] == "start")
        end = next(r for r in records if r["type"] == "end")
        log = cls(episode_id=start["episode"], poses=[Pose2D.from_dict(start["pose"])])
        for r in records:
            if r["type"] == "step":
                log.actions.append(NavAction(r["action"]))
                log.poses.append(Pose2D.from_dict(r["pose"]))
            elif r["type"] == "decision":
                d = {k: v for k, v in r.items() if k not in ("type", "episode", "t")}
                log.decisions.append(d)
                log.decision_steps.append(r["t"])
            elif r["type"] == "event":
                log.events.append({k: v for k, v in r.items() if k not in ("type", "episode")})
        log.collisions = end["collisions"]
        log.stopped = end["stopped"]
        log.termination = end["termination"]
        return log

    @classmethod
    def from_jsonl(cls, text: str) -> "TrajectoryLog":
        return cls.from_records([json.loads(line) for line in text.splitlines() if line.strip()])


Controller = Callable[[World, Pose2D, tuple, KinematicsConfig, int], ControllerOutcome]


def make_controller(cfg: EpisodeConfig) -> Controller:
    if cfg.controller == "tryout":
        return lambda world, pose, goal, kin, budget: tryout_controller(world, pose, goal, cfg.tryout, kin, max_actions=budget)
    return lambda world, pose, goal, kin, budget: planned_controller(
        world, pose, goal, kin, max_actions=budget
    )


def candidate_costs(field_: GoalField, pose: Pose2D, candidates: CandidateSet, move_penalty: float) -> np.ndarray:
    """Remaining path to the goal if each candidate is taken; index 0 is stopping here."""
    costs = [field_.remaining(*pose.xy)]
    for wp in candidates.candidates[1:]:
        costs.append(field_.remaining(*wp.world_xy) + move_penalty)
    return np.asarray(costs)


def _waypoints(world: World, pose: Pose2D, cfg: EpisodeConfig, visited: list) -> tuple[list[Waypoint], Optional[str]]:
    sc = scan(world, pose, cfg.n_beams, cfg.max_range)
    try:
        raw = run_lidar_pipeline(sc, pose, cfg.waypoints).waypoints
    except DegeneratePose as exc:
        return [], str(exc)
    out = []
    for wp in raw:
        if wp.distance < cfg.min_waypoint_distance:
            continue
        near = any(math.hypot(wp.world_xy[0] - v[0], wp.world_xy[1] - v[1]) < cfg.visited_radius for v in visited)
        kind = WaypointKind.VISITED if near else WaypointKind.GHOST
        out.append(Waypoint(len(out) + 1, wp.bearing, wp.distance, wp.world_xy, kind))
    return out, None


def run_episode(
    spec: EpisodeSpec,
    world: World,
    agents: Agents,
    cfg: EpisodeConfig = EpisodeConfig(),
    controller: Optional[Controller] = None,
) -> TrajectoryLog:
    kin = cfg.kinematics
    controller = controller or make_controller(cfg)
    planner_rng = np.random.default_rng(derive_seed(agents.seed, "planner", spec.id))
    reasoner = ScriptedReasoner(agents.reasoner, np.random.default_rng(derive_seed(agents.seed, "reasoner", spec.id)))
    field_ = GoalField(nav_grid(world), spec.goal)
    style = world.style

    pose = spec.start
    log = TrajectoryLog(spec.id, [pose])
    decision_poses = [pose]
    failures = 0

    for n_decision in range(cfg.max_decisions):
        if len(log.actions) >= kin.max_steps - 1:
            log.termination = "max_steps"
            break
        wps, err = _waypoints(world, pose, cfg, [p.xy for p in decision_poses])
        if err:
            log.events.append({"t": len(log.actions), "event": "degenerate_pose", "detail": err})
        cands = CandidateSet.build(pose, wps)
        costs = candidate_costs(field_, pose, cands, cfg.move_penalty)
        ctx = StepContext(
            instruction=spec.instruction,
            pose=pose,
            candidates=cands,
            history=history_steps(decision_poses),
            costs=costs,
            style=style,
            step=n_decision,
        )

        logits = noisy_expert_planner(ctx, agents.planner, planner_rng)
        dist = softmax(fuse_branch_logits(logits))
        suggestion = dist.argmax()
        reasoner.suggestion = (suggestion, dist.probs[suggestion])
        audit: dict = {"candidates": [c.to_dict() for c in cands], "costs": costs.tolist()}
        if agents.mode == "planner":
            selected = suggestion
            audit.update({"planner_probs": list(dist.probs), "selected": selected})
        elif agents.mode == "reasoner":
            verdict = reasoner(PredictionSet(tuple(range(len(cands)))), ctx)
            selected = verdict.chosen
            audit.update(
                {
                    "planner_probs": list(dist.probs),
                    "verdict": {"chosen": verdict.chosen, "confidence": verdict.confidence, "rationale": verdict.rationale},
                    "selected": selected,
                }
            )
        else:
            outcome = decide(dist, agents.conformal, reasoner, ctx, agents.ucm)
            selected = outcome.selected
            audit.update(outcome.audit(dist, agents.conformal.tau))
        if reasoner.last_prompt is not None:
            audit["prompt"] = reasoner.last_prompt.render()
            reasoner.last_prompt = None
        audit["markers"] = candidate_markers(cands.candidates[1:], cfg.panorama)
        log.decisions.append(audit)
        log.decision_steps.append(len(log.actions))

        if selected == 0:
            log.actions.append(NavAction.STOP)
            log.poses.append(pose)
            log.stopped = True
            log.termination = "stop"
            break

        target = cands[selected].world_xy
        budget = kin.max_steps - 1 - len(log.actions)
        result = controller(world, pose, target, kin, budget)
        log.actions.extend(result.actions)
        log.poses.extend(result.poses)
        log.collisions += result.collisions
        if result.poses:
            pose = result.poses[-1]
        decision_poses.append(pose)
        if not result.reached:
            failures += 1
            log.events.append(
                {"t": len(log.actions), "event": "controller_failure", "target": list(target), **result.to_dict()}
            )
            if failures > cfg.retry_budget:
                log.termination = "deadlock"
                break
    else:
        log.termination = "max_decisions"

    if not log.termination:
        log.termination = "max_steps"
    log.check()
    return log
