"""Run configuration, presets and (de)serialisation."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from ..decision import PlannerSkill, ReasonerSkill
from ..metrics import DEFAULT_SWEEP
from ..sim.kinematics import KinematicsConfig

CALIBRATION_ID_OFFSET = 1_000_000


@dataclass
class WorldSpec:
    kind: str
    count: int
    styles: list[str] = field(default_factory=lambda: ["seen"])


@dataclass
class RunConfig:
    worlds: list[WorldSpec] = field(default_factory=lambda: [WorldSpec("rooms", 4)])
    world_dir: Optional[str] = None
    episodes: int = 20
    seed: int = 0
    planner: PlannerSkill = field(default_factory=PlannerSkill)
    reasoner: ReasonerSkill = field(default_factory=ReasonerSkill)
    # "planner", "reasoner", "ucm" (uses tau/calibration below) or "ucm@<tau>"
    modes: list[str] = field(default_factory=lambda: ["planner", "reasoner", "ucm"])
    tau: Optional[float] = None
    epsilon: float = 0.1
    calibration: Optional[str] = None
    calibration_episodes: int = 40
    l_max: int = 10
    controller: str = "planned"
    kinematics: KinematicsConfig = field(default_factory=KinematicsConfig)
    sdt: list[float] = field(default_factory=lambda: list(DEFAULT_SWEEP))
    out: str = "runs/default"
    workers: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kinematics"] = self.kinematics.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = copy.deepcopy(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "worlds" in d:
            d["worlds"] = [WorldSpec(**w) for w in d["worlds"]]
        if "planner" in d:
            d["planner"] = PlannerSkill(**d["planner"])
        if "reasoner" in d:
            d["reasoner"] = ReasonerSkill(**d["reasoner"])
        if "kinematics" in d:
            d["kinematics"] = KinematicsConfig(**d["kinematics"])
        return cls(**d)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def parse_mode(mode: str) -> tuple[str, Optional[float]]:
    if mode.startswith("ucm@"):
        return "ucm", float(mode[4:])
    if mode in ("planner", "reasoner", "ucm"):
        return mode, None
    raise ValueError(f"unknown mode {mode!r}")


# Planner sharp on "seen" worlds and flat on "unseen"; reasoner the reverse.
COMPLEMENTARY_PLANNER = PlannerSkill(beta=8.0, sigma=0.3, unseen_beta_scale=0.25, unseen_sigma_scale=4.0)
COMPLEMENTARY_REASONER = ReasonerSkill(error_rate=0.6, unseen_error_rate=0.05, confidence=0.9)


def preset(name: str) -> RunConfig:
    if name == "complementary":
        return RunConfig(
            worlds=[WorldSpec("rooms", 4, ["seen", "unseen"]), WorldSpec("corridor", 2, ["seen", "unseen"])],
            episodes=200,
            planner=COMPLEMENTARY_PLANNER,
            reasoner=COMPLEMENTARY_REASONER,
            modes=["planner", "reasoner", "ucm@0.97", "ucm@0.0"],
            out="runs/complementary",
        )
    if name == "tau-sweep":
        return RunConfig(
            worlds=[WorldSpec("rooms", 4, ["seen", "unseen"]), WorldSpec("corridor", 2, ["seen", "unseen"])],
            episodes=100,
            planner=COMPLEMENTARY_PLANNER,
            reasoner=COMPLEMENTARY_REASONER,
            modes=["planner", "reasoner", "ucm@0.99", "ucm@0.97", "ucm@0.95", "ucm@0.93"],
            out="runs/tau-sweep",
        )
    if name == "controllers":
        return RunConfig(
            worlds=[WorldSpec("trap", 5)],
            episodes=10,
            planner=PlannerSkill(beta=8.0, sigma=0.0),
            modes=["planner"],
            out="runs/controllers",
        )
    if name == "smoke":
        return RunConfig(worlds=[WorldSpec("rooms", 2)], episodes=4, calibration_episodes=8, out="runs/smoke")
    raise ValueError(f"unknown preset {name!r}")


PRESETS = ("complementary", "tau-sweep", "controllers", "smoke")


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    clean = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **clean)


def is_finite(x: Optional[float]) -> bool:
    return x is not None and math.isfinite(x)
