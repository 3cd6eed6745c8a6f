"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one pass line with its measured runtime; run with
``pytest tests/test_acceptance.py -s`` to see them. Criteria that the
design cannot reproduce at desk scale are checked property- and
oracle-style, with site constants verified exactly where they are
constants.
"""

import io
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from crosswatch.cli import main
from crosswatch.config import load_scene_config
from crosswatch.geometry import Homography, estimate_homography, project
from crosswatch.pipeline import run_calibrate
from crosswatch.stats import (
    analysis_columns,
    boxplot_summary,
    histogram,
    minmax_normalize,
    pearson_matrix,
)
from crosswatch.synthetic import AgentSpec, SceneSpec, compare_to_truth
from crosswatch.tracking import associate

from conftest import make_sim_cfg, recover, tree_hashes
from test_stats import sort_and_interpolate
from test_tracking import exhaustive_best_assignment


@contextmanager
def criterion(name: str, limit_s: float):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL ({time.perf_counter() - t0:.2f}s)")
        raise
    elapsed = time.perf_counter() - t0
    assert elapsed < limit_s, f"{name} took {elapsed:.2f}s (limit {limit_s}s)"
    print(f"[acceptance] {name}: PASS ({elapsed:.2f}s < {limit_s:.0f}s)")


def test_calibration_constants(spot_a_path, spot_b_path):
    with criterion("calibration constants", 1.0):
        spot_a = load_scene_config(spot_a_path)
        assert spot_a.frame_interval == 1 / 3
        spot_b = load_scene_config(spot_b_path)
        assert spot_b.frame_interval == 5 / 11
        assert spot_a.pixels_per_meter == 64.0

        buf = io.StringIO()
        assert run_calibrate(spot_a_path, out=buf) == 0
        text = buf.getvalue()
        # report states the derived 64 px/m and notes the conflicting
        # nominal 46 px/m from the site metadata
        assert "64.0 px/m" in text
        assert "46.0" in text and "NOTE" in text


def test_homography_reproduction_and_round_trip(spot_a_path):
    with criterion("homography", 1.0):
        cfg = load_scene_config(spot_a_path)
        h = estimate_homography(cfg.anchor_pairs)
        for img, ovh in cfg.anchor_pairs:
            u, v = project(h, img)
            assert math.hypot(u - ovh[0], v - ovh[1]) <= 1e-6

        rng = np.random.default_rng(101)
        checked = 0
        while checked < 1000:
            m = np.eye(3) + rng.normal(0, 0.2, size=(3, 3))
            m[2, 0:2] = rng.normal(0, 1e-3, size=2)
            if abs(np.linalg.det(m)) < 1e-6:
                continue
            hom = Homography(m)
            inv = hom.inverse()
            p = (float(rng.uniform(-500, 500)), float(rng.uniform(-500, 500)))
            mm = hom.matrix
            w = mm[2, 0] * p[0] + mm[2, 1] * p[1] + mm[2, 2]
            if abs(w) <= 1e-6:
                continue
            q = project(hom, p)
            back = project(inv, q)
            err = math.hypot(back[0] - p[0], back[1] - p[1])
            scale = max(1.0, math.hypot(*p))
            assert err / scale <= 1e-9
            checked += 1


def test_tracking_scenario_and_greedy_optimality():
    with criterion("tracking scenario + greedy vs exhaustive", 5.0):
        # Constructed three-to-two scenario at threshold 2.0: the two
        # continuing walkers match, the leaver terminates.
        prev = [(0, (0.0, 0.0)), (1, (3.0, 0.0)), (2, (6.0, 0.0))]
        nxt = [(3.5, 1.0), (6.5, 1.0)]
        m = associate(prev, nxt, threshold=2.0)
        assert sorted(m.pairs) == [(1, 0), (2, 1)]
        assert m.unmatched_tracks == [0]

        # 100 seeded scenes, <= 3 objects per class, separation regime in
        # which the optimum is unambiguous: greedy must equal the
        # exhaustive max-cardinality / min-total-distance assignment.
        thr = 2.0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(1, 4))
            centers = []
            while len(centers) < n:
                c = rng.uniform(0, 40, size=2)
                if all(np.hypot(*(c - o)) >= 2.5 * thr for o in centers):
                    centers.append(c)
            heads = [(i, tuple(map(float, c))) for i, c in enumerate(centers)]
            points = []
            for c in centers:
                if rng.uniform() < 0.8:
                    points.append(tuple(map(float, c + rng.uniform(-0.5, 0.5, 2))))
            got = associate(heads, points, thr)
            assert sorted(got.pairs) == exhaustive_best_assignment(heads, points, thr)


def test_end_to_end_oracle():
    with criterion("end-to-end oracle", 10.0):
        cfg = make_sim_cfg(frame_width=20000)

        def thirty_kmh_spec(noise, seed):
            v = 30.0 / 3.6
            length = 250.0
            agent = AgentSpec(
                cls="vehicle",
                waypoints=((0.0, 1.0, 5.0), (length / v, 1.0 + length, 5.0)),
            )
            return SceneSpec(config=cfg, duration_s=length / v, agents=(agent,),
                             noise_sigma_px=noise, seed=seed)

        # Noiseless: speed recovered within 0.3 km/h, acceleration zero.
        clean = recover(thirty_kmh_spec(0.0, 7))
        score = compare_to_truth(clean["tracks"], clean["sim"].truth_tracks, cfg)
        assert score.track_count_delta == 0
        assert score.speed_mae_kmh < 0.3
        speeds = [r.speed_kmh for r in clean["table"] if r.speed_kmh is not None]
        assert speeds and all(abs(s - 30.0) < 0.3 for s in speeds)
        accels = [r.accel_kmh_per_s for r in clean["table"]
                  if r.accel_kmh_per_s is not None]
        assert accels and all(abs(a) < 1e-6 for a in accels)

        # 1 px image noise at P = 64 px/m: speed MAE below 5%.
        assert cfg.pixels_per_meter == 64.0
        noisy = recover(thirty_kmh_spec(1.0, 8))
        noisy_score = compare_to_truth(noisy["tracks"], noisy["sim"].truth_tracks, cfg)
        assert noisy_score.speed_mae_kmh < 0.05 * 30.0


def test_statistics_properties():
    with criterion("statistics", 5.0):
        rng = np.random.default_rng(211)

        # Pearson invariance under per-column min-max normalization.
        for _ in range(100):
            n = int(rng.integers(5, 50))
            cols = {f"c{i}": rng.normal(0, 10, size=n).tolist() for i in range(3)}
            base = pearson_matrix(cols)
            normed = {
                k: minmax_normalize(v)[0].tolist() for k, v in cols.items()
            }
            assert np.allclose(base.matrix, pearson_matrix(normed).matrix, atol=1e-12)

        # Quantiles equal the brute-force sort-and-interpolate oracle exactly.
        for _ in range(100):
            series = rng.normal(0, 5, size=int(rng.integers(1, 80))).tolist()
            fn = boxplot_summary(series)
            assert fn.q1 == sort_and_interpolate(series, 0.25)
            assert fn.median == sort_and_interpolate(series, 0.5)
            assert fn.q3 == sort_and_interpolate(series, 0.75)

        # Histogram counts always sum to n.
        for _ in range(100):
            series = rng.uniform(-5, 5, size=int(rng.integers(1, 200)))
            bins = int(rng.integers(1, 40))
            assert histogram(series, bins).total == len(series)


def _scene_with_profile(cfg, vehicle_waypoints, seed):
    agents = (
        AgentSpec(cls="vehicle", waypoints=vehicle_waypoints),
        AgentSpec(cls="pedestrian", waypoints=((0.0, 55.0, 6.0), (8.0, 54.2, 6.0))),
    )
    return SceneSpec(config=cfg, duration_s=8.0, agents=agents, seed=seed)


def test_speed_distance_correlation_signs():
    with criterion("correlation signs", 10.0):
        cfg = make_sim_cfg()

        # Risky: the vehicle speeds up while closing in on the pedestrian.
        risky = _scene_with_profile(cfg, (
            (0.0, 1.0, 5.0), (4.0, 17.0, 5.0), (6.5, 35.0, 5.0), (8.0, 52.0, 5.0),
        ), seed=21)
        table = recover(risky)["table"]
        cols = analysis_columns(table)
        corr = pearson_matrix(cols, names=("vehicle_speed_kmh",
                                           "vehicle_pedestrian_distance_m"))
        assert corr.value("vehicle_speed_kmh", "vehicle_pedestrian_distance_m") < 0

        # Safe: the vehicle slows down as the pedestrian gets closer.
        safe = _scene_with_profile(cfg, (
            (0.0, 1.0, 5.0), (1.5, 18.0, 5.0), (4.0, 36.0, 5.0), (8.0, 52.0, 5.0),
        ), seed=22)
        table = recover(safe)["table"]
        cols = analysis_columns(table)
        corr = pearson_matrix(cols, names=("vehicle_speed_kmh",
                                           "vehicle_pedestrian_distance_m"))
        assert corr.value("vehicle_speed_kmh", "vehicle_pedestrian_distance_m") > 0


def test_cli_determinism(tmp_path, spot_a_path, crossing_clip_path):
    with criterion("CLI determinism", 30.0):
        extract_trees = []
        for run in ("one", "two"):
            ext = tmp_path / f"extract_{run}"
            assert main(["extract", "--detections", str(crossing_clip_path),
                         "--config", str(spot_a_path), "--out", str(ext)]) == 0
            extract_trees.append(tree_hashes(ext))
        assert extract_trees[0] == extract_trees[1]

        features = tmp_path / "extract_one" / "features.csv"
        analyze_trees = []
        for run in ("one", "two"):
            ana = tmp_path / f"analyze_{run}"
            assert main(["analyze", "--features", str(features),
                         "--config", str(spot_a_path), "--out", str(ana)]) == 0
            analyze_trees.append(tree_hashes(ana))
        assert analyze_trees[0] == analyze_trees[1]
        assert len(analyze_trees[0]) > 5
