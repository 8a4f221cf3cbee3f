import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vlnstack.core import InvalidArgument, Pose2D
from vlnstack.waypoint import (
    CellState,
    CostMapParams,
    DegeneratePose,
    LidarScan,
    LidarWaypointParams,
    WaypointHeatmap,
    build_cost_map,
    extract_navigable,
    filter_centers,
    kmeans,
    nms_heatmap,
    predict_waypoints_lidar,
    run_lidar_pipeline,
)
from vlnstack.waypoint.heatmap import N_ANGLES, N_DISTANCES, bin_bearing, bin_distance, suppressed_by
from vlnstack.waypoint.kmeans import lloyd


def open_scan(n=360, max_range=6.0):
    return LidarScan.uniform(np.full(n, max_range), max_range)


def ring_scan(radius, n=720, max_range=6.0):
    return LidarScan.uniform(np.full(n, radius), max_range)


def flood_fill(free, start):
    """Plain BFS over 8-neighbours."""
    seen = np.zeros_like(free)
    stack = [start]
    seen[start] = True
    while stack:
        x, y = stack.pop()
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                nx, ny = x + dx, y + dy
                if 0 <= nx < free.shape[0] and 0 <= ny < free.shape[1] and free[nx, ny] and not seen[nx, ny]:
                    seen[nx, ny] = True
                    stack.append((nx, ny))
    return seen


class TestScan:
    def test_validation(self):
        with pytest.raises(InvalidArgument):
            LidarScan(np.zeros(3), np.ones(2), 6.0)
        with pytest.raises(InvalidArgument):
            LidarScan.uniform([0.0, 1.0], 6.0)
        with pytest.raises(InvalidArgument):
            LidarScan.uniform([7.0], 6.0)

    def test_fixture_roundtrip(self, tmp_path):
        sc = LidarScan.uniform(np.linspace(0.5, 6.0, 36), 6.0)
        p = tmp_path / "scan.json"
        p.write_text(json.dumps(sc.to_dict()))
        back = LidarScan.from_dict(json.loads(p.read_text()))
        assert np.array_equal(back.angles, sc.angles) and np.array_equal(back.ranges, sc.ranges)
        assert set(sc.to_dict()) == {"angles", "ranges", "max_range"}


class TestCostMap:
    def test_empty_world(self):
        cm = build_cost_map(open_scan())
        assert not (cm.state == CellState.OCCUPIED).any()
        assert (cm.state == CellState.FREE).sum() > 0
        assert set(np.unique(cm.state)) <= {CellState.FREE, CellState.UNKNOWN}

    def test_default_extent(self):
        cm = build_cost_map(open_scan())
        assert cm.state.shape == (120, 120)
        assert cm.size * cm.resolution == pytest.approx(6.0)
        assert cm.robot_cell == (60, 60)

    def test_single_return(self):
        ranges = np.full(360, 6.0)
        ranges[0] = 1.0
        cm = build_cost_map(LidarScan.uniform(ranges, 6.0))
        occ = np.argwhere(cm.state == CellState.OCCUPIED)
        assert len(occ) == 1
        rx, ry = cm.robot_cell
        assert abs(occ[0][0] - (rx + 20)) <= 1 and abs(occ[0][1] - ry) <= 1

    def test_occupied_near_return(self):
        rng = np.random.default_rng(0)
        sc = LidarScan.uniform(rng.uniform(0.5, 6.0, 180), 6.0)
        cm = build_cost_map(sc)
        hits = np.column_stack([sc.ranges * np.cos(sc.angles), sc.ranges * np.sin(sc.angles)])[sc.ranges < 6.0]
        for ix, iy in np.argwhere(cm.state == CellState.OCCUPIED):
            cx, cy = cm.center_of(ix, iy)
            d = np.min(np.hypot(hits[:, 0] - cx, hits[:, 1] - cy))
            assert d <= cm.resolution * math.sqrt(2) / 2 + 1e-9

    def test_inflation_band(self):
        cm = build_cost_map(ring_scan(1.0), CostMapParams(clearance_radius=0.2))
        infl = cm.state == CellState.INFLATED
        assert infl.any()
        d = cm.distance[infl]
        assert np.all(d > 0) and np.all(d <= 0.2 + 1e-12)

    def test_bad_params(self):
        with pytest.raises(InvalidArgument):
            CostMapParams(size=0)

    def test_pgm(self, tmp_path):
        cm = build_cost_map(ring_scan(1.0))
        p = tmp_path / "map.pgm"
        cm.to_pgm(p)
        raw = p.read_bytes()
        assert raw.startswith(b"P5\n120 120\n255\n")
        assert len(raw) == len(b"P5\n120 120\n255\n") + 120 * 120


class TestNavigable:
    def test_empty_world_all_swept(self):
        cm = build_cost_map(open_scan(720))
        nav = extract_navigable(cm)
        assert len(nav) == (cm.state == CellState.FREE).sum()

    def test_ring(self):
        cm = build_cost_map(ring_scan(0.3))
        nav = extract_navigable(cm)
        rx, ry = cm.robot_cell
        xs, ys = cm.center_of(nav[:, 0], nav[:, 1])
        assert np.all(np.hypot(xs, ys) < 0.3)
        oracle = flood_fill(cm.state == CellState.FREE, (rx, ry))
        assert len(nav) == oracle.sum()

    def test_sealed_pocket_excluded(self):
        cm = build_cost_map(ring_scan(1.0))
        state = cm.state.copy()
        state[5:10, 5:10] = CellState.FREE  # free pocket outside the wall
        from dataclasses import replace

        cm2 = replace(cm, state=state)
        nav = {tuple(c) for c in extract_navigable(cm2)}
        assert (7, 7) not in nav
        assert nav == {tuple(c) for c in np.argwhere(flood_fill(state == CellState.FREE, cm2.robot_cell))}

    def test_degenerate(self):
        with pytest.raises(DegeneratePose):
            extract_navigable(build_cost_map(ring_scan(0.04)))


class TestKMeans:
    def test_k1_centroid(self):
        pts = np.random.default_rng(1).normal(size=(200, 2))
        assert np.allclose(kmeans(pts, 1), pts.mean(axis=0))

    def test_four_blobs(self):
        rng = np.random.default_rng(2)
        means = np.array([[0, 0], [5, 0], [0, 5], [5, 5]], float)
        pts = np.concatenate([m + rng.uniform(-0.3, 0.3, size=(50, 2)) for m in means])
        c = kmeans(pts, 4, seed=0)
        # brute-force: each blob mean has exactly one centre within the blob radius
        for m in means:
            assert np.sum(np.hypot(*(c - m).T) < 0.43) == 1

    def test_fewer_points_than_k(self):
        c = kmeans(np.array([[0.0, 0.0], [1.0, 1.0]]), 10)
        assert len(c) == 2

    def test_duplicates(self):
        c = kmeans(np.array([[1.0, 1.0]] * 5), 3)
        assert len(c) == 1

    def test_empty(self):
        with pytest.raises(InvalidArgument):
            kmeans(np.zeros((0, 2)), 3)
        with pytest.raises(InvalidArgument):
            kmeans(np.zeros((3, 2)), 0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 12))
    def test_inertia_non_increasing_and_deterministic(self, seed, k):
        pts = np.random.default_rng(seed).uniform(-3, 3, size=(300, 2))
        r = lloyd(pts, k, seed)
        h = np.array(r.inertia_history)
        assert np.all(np.diff(h) <= 1e-9 * max(h[0], 1.0))
        assert len(h) <= 50
        assert np.array_equal(r.centers, lloyd(pts, k, seed).centers)


def _cmap_open():
    return build_cost_map(open_scan(720))


class TestFilter:
    def test_separation_rule(self):
        cm = _cmap_open()
        out = filter_centers([[1.0, 0.0], [1.1, 0.0]], cm, min_clearance=0.0)
        assert len(out) == 1

    def test_clearance_rule(self):
        cm = build_cost_map(ring_scan(1.0))
        out = filter_centers([[0.9, 0.0], [0.0, 0.0]], cm, min_clearance=0.3)
        assert len(out) == 1 and out[0].distance < 0.1

    def test_conflict_prefers_clearance_then_index(self):
        cm = build_cost_map(ring_scan(2.0))
        # second centre is nearer the middle (more clearance) and wins
        out = filter_centers([[1.0, 0.0], [0.7, 0.0]], cm, min_clearance=0.0)
        assert len(out) == 1 and out[0].world_xy[0] == pytest.approx(0.725)
        # exact tie on clearance: lower index survives
        tie = filter_centers([[0.0, 0.3], [0.0, -0.3]], _cmap_open(), min_clearance=0.0, min_separation=1.0)
        assert len(tie) == 1 and tie[0].world_xy[1] > 0

    def test_ten_spread_survive(self):
        cm = _cmap_open()
        ang = np.linspace(0, 2 * np.pi, 10, endpoint=False)
        centers = np.column_stack([2 * np.cos(ang), 2 * np.sin(ang)])
        out = filter_centers(centers, cm)
        assert len(out) == 10
        pts = np.array([w.world_xy for w in out])
        d = np.hypot(*(pts[:, None] - pts[None]).transpose(2, 0, 1))
        assert np.min(d[np.triu_indices(10, 1)]) >= 0.5

    def test_ids_and_frames(self):
        pose = Pose2D(3.0, 4.0, math.pi / 2)
        cm = build_cost_map(open_scan(720), pose=pose)
        out = filter_centers([[1.0, 0.0]], cm)
        assert out[0].id == 1
        # snapped to the cell centre (1.025, 0.025) in the robot frame
        assert out[0].world_xy == pytest.approx((3.0 - 0.025, 4.0 + 1.025))


class TestPipeline:
    def test_open_world_k10(self):
        wps = predict_waypoints_lidar(open_scan(720))
        assert len(wps) == 10

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        sc = LidarScan.uniform(rng.uniform(1.0, 6.0, 360), 6.0)
        a = predict_waypoints_lidar(sc)
        b = predict_waypoints_lidar(sc)
        assert a == b

    def test_corridor_band(self):
        from vlnstack.sim import World, scan

        w = World("c", 12.0, 3.0, rects=((0, 0, 12, 1.0), (0, 2.0, 12, 3.0)))
        pose = Pose2D(6.0, 1.5, 0.0)
        wps = predict_waypoints_lidar(scan(w, pose), pose)
        assert wps
        for wp in wps:
            # clearance 0.25 inside a 1 m corridor leaves |y - 1.5| <= 0.25 plus one cell
            assert abs(wp.world_xy[1] - 1.5) <= 0.25 + 0.05

    def test_invariants_vs_brute_force(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            sc = LidarScan.uniform(rng.uniform(0.6, 6.0, 360), 6.0)
            res = run_lidar_pipeline(sc, Pose2D(0, 0))
            occ = np.argwhere(res.cost_map.state == CellState.OCCUPIED)
            ox, oy = res.cost_map.center_of(occ[:, 0], occ[:, 1])
            for wp in res.waypoints:
                ix, iy = res.cost_map.cell_of(*wp.world_xy)
                assert res.cost_map.state[ix, iy] == CellState.FREE
                assert np.min(np.hypot(ox - wp.world_xy[0], oy - wp.world_xy[1])) >= 0.25 - 1e-9


class TestNms:
    def test_single_cell(self):
        v = np.zeros((N_ANGLES, N_DISTANCES))
        v[30, 3] = 1.0
        out = nms_heatmap(WaypointHeatmap(v), 5)
        assert len(out) == 1
        assert out[0].bearing == pytest.approx(math.radians(90)) and out[0].distance == pytest.approx(1.0)

    def test_two_separated_peaks_order_by_index(self):
        v = np.zeros((N_ANGLES, N_DISTANCES))
        v[10, 2] = v[60, 8] = 2.0
        out = nms_heatmap(WaypointHeatmap(v), 5)
        assert [(round(math.degrees(w.bearing)), w.distance) for w in out] == [(30, 0.75), (180, 2.25)]

    def test_uniform_tie_break(self):
        out = nms_heatmap(WaypointHeatmap(np.ones((N_ANGLES, N_DISTANCES))), 3)
        # index 0 first, then the first cell outside its window: (0, 3) on linear order
        assert [(w.bearing, w.distance) for w in out[:2]] == [(bin_bearing(0), bin_distance(0)), (bin_bearing(0), bin_distance(3))]

    def test_wraparound_suppression(self):
        v = np.zeros((N_ANGLES, N_DISTANCES))
        v[0, 0] = 2.0
        v[118, 0] = 1.0
        assert len(nms_heatmap(WaypointHeatmap(v), 5)) == 1

    def test_validation(self):
        with pytest.raises(InvalidArgument):
            WaypointHeatmap(np.zeros((10, 12)))
        with pytest.raises(InvalidArgument):
            nms_heatmap(WaypointHeatmap(np.zeros((N_ANGLES, N_DISTANCES))), 0)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 20))
    def test_properties_exhaustive(self, seed, p):
        rng = np.random.default_rng(seed)
        v = np.round(rng.random((N_ANGLES, N_DISTANCES)) * 4) / 4  # many ties
        out = nms_heatmap(WaypointHeatmap(v), p)
        cells = [(round(math.degrees(w.bearing) / 3) % N_ANGLES, round(w.distance / 0.25) - 1) for w in out]
        vals = [v[a, d] for a, d in cells]
        assert all(x >= y for x, y in zip(vals, vals[1:]))
        for i, (a, d) in enumerate(cells):
            for a0, d0 in cells[:i]:
                assert not suppressed_by(a0, d0, a, d, (5, 2))
        # greedy oracle: brute-force rescan of the whole grid at every step
        picks = []
        alive = v > 0
        for _ in range(p):
            best = None
            for lin in range(N_ANGLES * N_DISTANCES):
                a, d = divmod(lin, N_DISTANCES)
                if alive[a, d] and (best is None or v[a, d] > v[best]):
                    best = (a, d)
            if best is None:
                break
            picks.append(best)
            for a in range(N_ANGLES):
                for d in range(N_DISTANCES):
                    if suppressed_by(best[0], best[1], a, d, (5, 2)):
                        alive[a, d] = False
        assert cells == picks
