"""Acceptance suite; each test records one PASS/FAIL line shown in the terminal summary."""

import itertools
import json
import math
import time
import warnings
from fractions import Fraction
from types import SimpleNamespace

import numpy as np
import pytest
from scipy import ndimage

from vlnstack.conformal import ConformalModel, calibrate, coverage_lower_bound, empirical_coverage
from vlnstack.control import planned_controller, tryout_controller
from vlnstack.core import ActionDistribution, EpisodeSpec, Pose2D
from vlnstack.harness import InsufficientCalibration, generate_worlds, preset, run_benchmark, summary_at, with_overrides
from vlnstack.harness.synthetic import SyntheticConfig, generate_items, scores_of, split
from vlnstack.metrics import compute
from vlnstack.sim import nav_grid, scan
from vlnstack.ucm import ReasonerVerdict, decide, fuse, sparse_reasoner_distribution
from vlnstack.waypoint import CellState, DegeneratePose, run_lidar_pipeline


def test_1_conformal_coverage(acceptance):
    t0 = time.perf_counter()
    items = generate_items(SyntheticConfig(n_worlds=8, poses_per_world=50, goals_per_world=50, seed=2024))
    cal, test = split(items, 5000, seed=1)
    rows, ok = [], True
    for eps in (0.05, 0.1, 0.25):
        model = calibrate(scores_of(cal), eps)
        cov = empirical_coverage(model, test)
        bound = coverage_lower_bound(eps, len(test))
        ok &= cov >= bound
        rows.append(f"eps={eps}: {cov:.4f}>={bound:.4f}")
    elapsed = time.perf_counter() - t0
    ok &= len(test) >= 10_000 and elapsed < 60
    acceptance.record(1, ok, f"n_test={len(test)} {'; '.join(rows)} ({elapsed:.1f}s)")
    assert ok


def test_2_ucm_algebra(acceptance):
    grid = [Fraction(i, 16) for i in range(17)]
    alphas = [a for a in grid if a <= Fraction(9, 10)]
    override_ok = stability_ok = True
    n = 0
    for p1, p2, alpha, c in itertools.product(grid, grid, alphas, grid):
        if not (p1 >= p2 and p1 + p2 <= 1):
            continue
        rest = 1 - p1 - p2
        p = np.array([float(p1), float(p2), float(rest)])
        # override: reasoner backs the runner-up (when it is the runner-up)
        if p1 > p2 and rest <= p2:
            f = fuse(p, sparse_reasoner_distribution(ReasonerVerdict(1, float(c)), 3), float(alpha))
            override_ok &= (int(np.argmax(f)) == 1) == (alpha * c > (1 - alpha) * (p1 - p2))
            n += 1
        # stability: reasoner agrees with the planner's argmax
        j = int(np.argmax(p))
        f = fuse(p, sparse_reasoner_distribution(ReasonerVerdict(j, float(c)), 3), float(alpha))
        stability_ok &= int(np.argmax(f)) == j
    out = decide(ActionDistribution((0.56, 0.43, 0.01)), ConformalModel.fixed(0.97), lambda ps, ctx: ReasonerVerdict(1, 0.9))
    fig_ok = out.selected == 1 and out.alpha == pytest.approx(0.2) and out.fused[1] == pytest.approx(0.524)
    ok = override_ok and stability_ok and fig_ok
    acceptance.record(
        2, ok, f"override {override_ok} ({n} cases), stability {stability_ok}, replay selects #{out.selected} fused={out.fused[1]:.3f}"
    )
    assert ok


@pytest.mark.slow
def test_3_complementary_suite(acceptance, tmp_path):
    t0 = time.perf_counter()
    res = run_benchmark(with_overrides(preset("complementary"), out=str(tmp_path / "comp")))
    elapsed = time.perf_counter() - t0
    ok = elapsed < 300
    rows = []
    for sdt in (1.0, 3.0):
        sr = {m: summary_at(res, m, sdt).sr for m in res.logs}
        ok &= sr["ucm@0.97"] >= max(sr["planner"], sr["reasoner"]) - 2.0
        rows.append(f"sdt={sdt}: " + " ".join(f"{m}={v:.1f}" for m, v in sr.items()))
    same = all(
        json.dumps([p.to_dict() for p in a.poses]) == json.dumps([p.to_dict() for p in b.poses])
        and a.actions == b.actions
        for a, b in zip(res.logs["planner"], res.logs["ucm@0.0"])
    )
    singleton = all(len(d["set"]) == 1 and not d["reasoner_invoked"] for lg in res.logs["ucm@0.0"] for d in lg.decisions)
    ok &= same and singleton and len(res.specs) == 200
    acceptance.record(3, ok, f"{' | '.join(rows)}; planner==ucm@0.0 {same} ({elapsed:.0f}s)")
    assert ok


def _robot_frame_xy(wp):
    return wp.distance * math.cos(wp.bearing), wp.distance * math.sin(wp.bearing)


def test_4_waypoint_invariants(acceptance):
    rng = np.random.default_rng(4)
    worlds = generate_worlds("rooms", 5, seed=4) + generate_worlds("corridor", 3, seed=4) + generate_worlds("trap", 2, seed=4)
    grids = [nav_grid(w) for w in worlds]
    ok, n_scans, n_wps, times = True, 0, 0, []
    while n_scans < 1000:
        i = int(rng.integers(len(worlds)))
        free = np.argwhere(grids[i].free)
        x, y = grids[i].center_of(*free[rng.integers(len(free))])
        pose = Pose2D(x, y, float(rng.uniform(-math.pi, math.pi)))
        sc = scan(worlds[i], pose)
        t = time.perf_counter()
        try:
            res = run_lidar_pipeline(sc, pose)
        except DegeneratePose:
            continue
        times.append(time.perf_counter() - t)
        n_scans += 1
        cm = res.cost_map
        occ = np.argwhere(cm.state == CellState.OCCUPIED)
        ox, oy = cm.center_of(occ[:, 0], occ[:, 1])
        pts = []
        for wp in res.waypoints:
            px, py = _robot_frame_xy(wp)
            ix, iy = cm.cell_of(px, py)
            ok &= cm.state[ix, iy] == CellState.FREE
            # brute-force clearance: distance to every occupied cell centre
            if len(occ):
                ok &= float(np.min(np.hypot(ox - px, oy - py))) >= 0.25 - 1e-9
            pts.append((px, py))
        for a, b in itertools.combinations(pts, 2):
            ok &= math.hypot(a[0] - b[0], a[1] - b[1]) >= 0.5 - 1e-9
        n_wps += len(pts)
    mean_ms = 1000 * float(np.mean(times))
    ok &= mean_ms <= 50
    acceptance.record(4, ok, f"{n_scans} scans, {n_wps} waypoints checked, mean pipeline {mean_ms:.1f} ms/scan")
    assert ok


def _controller_suite():
    rows = []
    for w in generate_worlds("trap", 5, seed=0):
        start = Pose2D(*w.metadata["start"], 0.0)
        goal = tuple(w.metadata["goal"])
        p = planned_controller(w, start, goal)
        t = tryout_controller(w, start, goal)
        rows.append((w.name, p.reached, t.reached, [a.value for a in p.actions], [a.value for a in t.actions]))
    return rows


def test_5_controllers_on_traps(acceptance):
    rows = _controller_suite()
    again = _controller_suite()
    planned_sr = 100.0 * np.mean([r[1] for r in rows])
    tryout_sr = 100.0 * np.mean([r[2] for r in rows])
    deterministic = rows == again
    ok = planned_sr == 100.0 and tryout_sr < 100.0 and deterministic
    acceptance.record(5, ok, f"planned SR={planned_sr:.0f}% tryout SR={tryout_sr:.0f}% deterministic {deterministic}")
    assert ok


def test_6_metric_identities(acceptance):
    rng = np.random.default_rng(6)
    sdts = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
    ok = True
    for i in range(10_000):
        pts = np.cumsum(rng.normal(0, 0.8, size=(int(rng.integers(1, 25)), 2)), axis=0)
        log = SimpleNamespace(poses=[Pose2D(x, y) for x, y in pts], stopped=bool(rng.random() < 0.8))
        spec = EpisodeSpec(i, "w", Pose2D(0, 0), tuple(rng.uniform(-4, 4, 2)), "", float(rng.uniform(0.2, 10)))
        ms = [compute(log, spec, t) for t in sdts]
        ok &= all(m.spl <= m.sr <= m.osr for m in ms)
        ok &= all(a.sr <= b.sr and a.osr <= b.osr and a.spl <= b.spl for a, b in zip(ms, ms[1:]))
    # hand fixture: L-shaped 7 m walk to a goal 5 m away
    log = SimpleNamespace(poses=[Pose2D(0, 0), Pose2D(0, 3), Pose2D(4, 3)], stopped=True)
    m = compute(log, EpisodeSpec(0, "w", Pose2D(0, 0), (4.0, 3.0), "", 5.0), 1.0)
    hand = abs(m.tl - 7.0) <= 1e-9 and abs(m.ne) <= 1e-9 and abs(m.spl - 5 / 7) <= 1e-9 and m.sr == m.osr == 1
    ok &= hand
    acceptance.record(6, ok, f"10000 random logs x {len(sdts)} thresholds; hand fixture {hand}")
    assert ok


@pytest.mark.slow
def test_7_rerun_byte_identical(acceptance, tmp_path):
    cfg = with_overrides(preset("smoke"), out=str(tmp_path / "run"), modes=["planner", "reasoner", "ucm", "ucm@0.9"])

    def snapshot():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", InsufficientCalibration)
            run_benchmark(cfg)
        root = tmp_path / "run"
        return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}

    a = snapshot()
    b = snapshot()
    ok = a == b and any(k.startswith("logs/") for k in a) and "report.txt" in a
    diff = sorted(k for k in set(a) | set(b) if a.get(k) != b.get(k))
    acceptance.record(7, ok, f"{len(a)} files compared, {len(diff)} differ")
    assert ok
