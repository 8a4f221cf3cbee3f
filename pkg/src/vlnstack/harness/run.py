"""Calibration runs, benchmark execution and report emission."""

from __future__ import annotations

import json
import logging
import shutil
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .. import plotting
from ..conformal import ConformalModel, calibrate
from ..core import EpisodeSpec, VlnError
from ..decision import optimal_index
from ..metrics import Summary, aggregate, compute, format_table, sdt_sweep
from ..seeding import derive_seed
from ..sim.episode import Agents, EpisodeConfig, TrajectoryLog, run_episode
from ..sim.world import World
from ..ucm import UcmConfig
from .config import CALIBRATION_ID_OFFSET, RunConfig, parse_mode
from .worlds import generate_episodes, generate_worlds, load_worlds, save_worlds

log = logging.getLogger(__name__)

MIN_CALIBRATION_POINTS = 100


class InvariantViolation(VlnError):
    pass


class InsufficientCalibration(UserWarning):
    pass


def build_worlds(cfg: RunConfig) -> list[World]:
    if cfg.world_dir:
        return load_worlds(cfg.world_dir)
    worlds: list[World] = []
    for ws in cfg.worlds:
        worlds += generate_worlds(ws.kind, ws.count, derive_seed(cfg.seed, "worlds"), ws.styles)
    return worlds


def episode_config(cfg: RunConfig) -> EpisodeConfig:
    return EpisodeConfig(kinematics=cfg.kinematics, controller=cfg.controller)


def eval_episodes(cfg: RunConfig, worlds: Sequence[World]) -> list[EpisodeSpec]:
    return generate_episodes(worlds, cfg.episodes, derive_seed(cfg.seed, "eval"), id_offset=0)


def calibration_episodes(cfg: RunConfig, worlds: Sequence[World]) -> list[EpisodeSpec]:
    return generate_episodes(
        worlds, cfg.calibration_episodes, derive_seed(cfg.seed, "calibration"), id_offset=CALIBRATION_ID_OFFSET
    )


def assert_disjoint(eval_specs: Sequence[EpisodeSpec], cal_specs: Sequence[EpisodeSpec]) -> None:
    if any(s.id >= CALIBRATION_ID_OFFSET for s in eval_specs):
        raise InvariantViolation("evaluation episode id inside the calibration range")
    if any(s.id < CALIBRATION_ID_OFFSET for s in cal_specs):
        raise InvariantViolation("calibration episode id inside the evaluation range")


def _world_map(worlds: Sequence[World]) -> dict[str, World]:
    return {w.name: w for w in worlds}


def calibration_scores(logs: Sequence[TrajectoryLog]) -> list[float]:
    """Nonconformity of the path-optimal candidate at every logged decision."""
    scores = []
    for lg in logs:
        for d in lg.decisions:
            probs = d["planner_probs"]
            scores.append(min(max(1.0 - probs[optimal_index(d["costs"])], 0.0), 1.0))
    return scores


def run_calibration(cfg: RunConfig, out: Optional[str | Path] = None) -> ConformalModel:
    """Play the planner over the calibration split and fit tau at cfg.epsilon."""
    worlds = build_worlds(cfg)
    specs = calibration_episodes(cfg, worlds)
    assert_disjoint([], specs)
    wm = _world_map(worlds)
    agents = Agents(mode="planner", planner=cfg.planner, reasoner=cfg.reasoner, seed=derive_seed(cfg.seed, "agents"))
    ecfg = episode_config(cfg)
    logs = [run_episode(s, wm[s.world], agents, ecfg) for s in specs]
    scores = calibration_scores(logs)
    if len(scores) < MIN_CALIBRATION_POINTS:
        warnings.warn(
            f"only {len(scores)} calibration decision points (< {MIN_CALIBRATION_POINTS})", InsufficientCalibration
        )
    model = calibrate(scores, cfg.epsilon)
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        model.save(out)
        plotting.plot_calibration(model.sorted_scores, model.tau, model.epsilon, out.with_suffix(".png"))
    return model


def resolve_model(cfg: RunConfig, mode: str, cache: dict) -> Optional[ConformalModel]:
    kind, tau = parse_mode(mode)
    if kind != "ucm":
        return None
    if tau is not None:
        return ConformalModel.fixed(tau)
    if cfg.tau is not None:
        return ConformalModel.fixed(cfg.tau)
    if cfg.calibration:
        return ConformalModel.load(cfg.calibration)
    if "calibrated" not in cache:
        cache["calibrated"] = run_calibration(cfg, Path(cfg.out) / "calibration.json")
    return cache["calibrated"]


def check_log(lg: TrajectoryLog, world: World, radius: float) -> None:
    lg.check()
    for p in lg.poses:
        if world.clearance(p.x, p.y) < radius - 1e-9:
            raise InvariantViolation(f"episode {lg.episode_id}: pose {p} intersects an obstacle")


def check_metrics(lg: TrajectoryLog, spec: EpisodeSpec, thresholds: Sequence[float]) -> None:
    tl = sum(a.distance_to(b.xy) for a, b in zip(lg.poses, lg.poses[1:]))
    for t in thresholds:
        m = compute(lg, spec, t)
        if not (m.spl <= m.sr <= m.osr):
            raise InvariantViolation(f"episode {spec.id}: spl <= sr <= osr violated at sdt {t}")
        if abs(m.tl - tl) > 1e-9:
            raise InvariantViolation(f"episode {spec.id}: TL mismatch")


def _run_one(args) -> str:
    spec, world, agents, ecfg = args
    return run_episode(spec, world, agents, ecfg).to_jsonl()


@dataclass
class BenchmarkResult:
    out: Path
    specs: list[EpisodeSpec]
    logs: dict[str, list[TrajectoryLog]]
    sweeps: dict[str, list[Summary]]


def run_benchmark(cfg: RunConfig) -> BenchmarkResult:
    out = Path(cfg.out)
    worlds = build_worlds(cfg)
    wm = _world_map(worlds)
    specs = eval_episodes(cfg, worlds)
    assert_disjoint(specs, calibration_episodes(cfg, worlds) if cfg.calibration_episodes else [])
    ecfg = episode_config(cfg)

    # fail fast on fixture problems before any episode runs
    for s in specs:
        if s.world not in wm:
            raise InvariantViolation(f"episode {s.id} references unknown world {s.world}")
    cache: dict = {}
    agents_by_mode = {}
    for mode in cfg.modes:
        kind, _ = parse_mode(mode)
        agents_by_mode[mode] = Agents(
            mode=kind,
            planner=cfg.planner,
            reasoner=cfg.reasoner,
            conformal=resolve_model(cfg, mode, cache),
            ucm=UcmConfig(l_max=cfg.l_max),
            seed=derive_seed(cfg.seed, "agents"),
        )

    if out.exists():
        for sub in ("logs", "figures"):
            shutil.rmtree(out / sub, ignore_errors=True)
    (out / "logs").mkdir(parents=True, exist_ok=True)
    cfg.save(out / "config.json")
    save_worlds(worlds, out / "worlds")
    with open(out / "episodes.jsonl", "w") as fh:
        for s in specs:
            fh.write(json.dumps(s.to_dict(), sort_keys=True) + "\n")

    tasks = [(s, wm[s.world], agents_by_mode[m], ecfg) for m in cfg.modes for s in specs]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            texts = list(pool.map(_run_one, tasks, chunksize=4))
    else:
        texts = [_run_one(t) for t in tasks]

    logs: dict[str, list[TrajectoryLog]] = {m: [] for m in cfg.modes}
    for (spec, world, agents, _), text in zip(tasks, texts):
        mode = next(m for m in cfg.modes if agents_by_mode[m] is agents)
        d = out / "logs" / mode
        d.mkdir(parents=True, exist_ok=True)
        (d / f"ep_{spec.id:06d}.jsonl").write_text(text)
        lg = TrajectoryLog.from_jsonl(text)
        check_log(lg, world, cfg.kinematics.agent_radius)
        check_metrics(lg, spec, cfg.sdt)
        logs[mode].append(lg)

    sweeps = write_report(out, specs, logs, cfg.sdt)
    return BenchmarkResult(out, specs, logs, sweeps)


def load_run(out: str | Path) -> tuple[RunConfig, list[EpisodeSpec], dict[str, list[TrajectoryLog]]]:
    out = Path(out)
    cfg = RunConfig.load(out / "config.json")
    specs = [EpisodeSpec.from_dict(json.loads(l)) for l in (out / "episodes.jsonl").read_text().splitlines() if l]
    logs = {}
    for mode in cfg.modes:
        d = out / "logs" / mode
        logs[mode] = [TrajectoryLog.from_jsonl((d / f"ep_{s.id:06d}.jsonl").read_text()) for s in specs]
    return cfg, specs, logs


def write_report(
    out: Path, specs: Sequence[EpisodeSpec], logs: dict[str, list[TrajectoryLog]], thresholds: Sequence[float], stem: str = "report"
) -> dict[str, list[Summary]]:
    by_id = {s.id: s for s in specs}
    sweeps = {}
    text = []
    records = []
    for mode, lgs in logs.items():
        pairs = [(lg, by_id[lg.episode_id]) for lg in lgs]
        rows = sdt_sweep(pairs, thresholds)
        sweeps[mode] = rows
        text.append(format_table(rows, title=f"mode: {mode}"))
        for r in rows:
            records.append({"mode": mode, **r.to_dict()})
    (out / f"{stem}.txt").write_text("\n".join(text))
    with open(out / f"{stem}.jsonl", "w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    with open(out / "metrics.jsonl", "w") as fh:
        for mode, lgs in logs.items():
            for lg in lgs:
                for t in thresholds:
                    m = compute(lg, by_id[lg.episode_id], t)
                    fh.write(json.dumps({"mode": mode, "episode": lg.episode_id, **m.to_dict()}, sort_keys=True) + "\n")
    plotting.plot_sdt_sweep(sweeps, out / "figures" / f"{stem}_sdt.png")
    sizes = {
        mode: [len(d["set"]) for lg in lgs for d in lg.decisions if "set" in d]
        for mode, lgs in logs.items()
    }
    if any(sizes.values()):
        plotting.plot_set_sizes({m: v for m, v in sizes.items() if v}, out / "figures" / f"{stem}_set_sizes.png")
    return sweeps


def report(out: str | Path) -> dict[str, list[Summary]]:
    cfg, specs, logs = load_run(out)
    return write_report(Path(out), specs, logs, cfg.sdt)


def sweep(out: str | Path, thresholds: Sequence[float]) -> dict[str, list[Summary]]:
    _, specs, logs = load_run(out)
    return write_report(Path(out), specs, logs, thresholds, stem="sweep")


def summary_at(result: BenchmarkResult, mode: str, sdt: float = 3.0) -> Summary:
    by_id = {s.id: s for s in result.specs}
    return aggregate([compute(lg, by_id[lg.episode_id], sdt) for lg in result.logs[mode]])
