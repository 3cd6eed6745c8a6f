"""Ground-truth scene simulation and pipeline recovery scoring.

Agents follow piecewise-linear waypoint paths in overhead meters. Each
sampled position is mapped into the oblique camera frame through the
inverse of the scene homography, optionally perturbed with Gaussian pixel
noise (sensing error lives in image space), and emitted in the ingest wire
format: an explicit contact point plus a small square mask whose bottom
edge sits on the contact point, so the mask-derived path recovers the same
ground point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import CLASSES, SceneConfig, parse_scene_config
from .geometry import Point, PointAtInfinityError, estimate_homography, project
from .tracking import Track, TERMINATED

DEFAULT_MASK_HALF_PX = 4.0


@dataclass(frozen=True)
class AgentSpec:
    cls: str
    waypoints: tuple[tuple[float, float, float], ...]  # (t_s, x_m, y_m)

    def __post_init__(self) -> None:
        if self.cls not in CLASSES:
            raise ValueError(f"unknown agent class {self.cls!r}")
        if len(self.waypoints) < 2:
            raise ValueError("agent path needs at least 2 waypoints")
        times = [w[0] for w in self.waypoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("waypoint timestamps must be strictly increasing")

    def position(self, t: float) -> Point | None:
        """Piecewise-linear position at time t, None outside the path span."""
        times = [w[0] for w in self.waypoints]
        if t < times[0] or t > times[-1]:
            return None
        xs = [w[1] for w in self.waypoints]
        ys = [w[2] for w in self.waypoints]
        return (float(np.interp(t, times, xs)), float(np.interp(t, times, ys)))


@dataclass(frozen=True)
class SceneSpec:
    config: SceneConfig
    duration_s: float
    agents: tuple[AgentSpec, ...]
    noise_sigma_px: float = 0.0
    seed: int | None = None
    mask_half_px: float = DEFAULT_MASK_HALF_PX
    dropout: float = 0.0

    def __post_init__(self) -> None:
        if self.duration_s <= 0:
            raise ValueError("duration must be positive")
        if self.noise_sigma_px < 0:
            raise ValueError("noise sigma must be non-negative")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


def load_scene_spec(path: str | Path) -> SceneSpec:
    """Load a scene spec JSON file; 'config' may be inline or a path
    relative to the spec file."""
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    raw_cfg = doc["config"]
    if isinstance(raw_cfg, str):
        cfg_path = (path.parent / raw_cfg).resolve()
        cfg = parse_scene_config(
            json.loads(cfg_path.read_text(encoding="utf-8")), label=cfg_path.stem
        )
    else:
        cfg = parse_scene_config(raw_cfg, label=path.stem)
    agents = tuple(
        AgentSpec(cls=a["class"], waypoints=tuple(tuple(w) for w in a["waypoints"]))
        for a in doc["agents"]
    )
    return SceneSpec(
        config=cfg,
        duration_s=float(doc["duration_s"]),
        agents=agents,
        noise_sigma_px=float(doc.get("noise_sigma_px", 0.0)),
        seed=doc.get("seed"),
        mask_half_px=float(doc.get("mask_half_px", DEFAULT_MASK_HALF_PX)),
        dropout=float(doc.get("dropout", 0.0)),
    )


@dataclass
class SimResult:
    truth_tracks: list[Track]
    detection_lines: list[str]
    clipped: int = 0


def _detection_record(frame: int, cls: str, contact: Point, half: float) -> dict:
    x, y = contact
    return {
        "frame": frame,
        "class": cls,
        "score": 1.0,
        "bbox": [x - half, y - 2 * half, x + half, y],
        "mask": [
            [x - half, y - 2 * half],
            [x + half, y - 2 * half],
            [x + half, y],
            [x - half, y],
        ],
        "contact": [x, y],
    }


def simulate_scene(spec: SceneSpec) -> SimResult:
    """Sample every agent at the camera frame rate and emit wire-format
    detections; truth tracks are kept on the resampled frame grid in
    overhead pixels. Positions whose synthesized box would leave the frame
    are clipped (skipped and counted)."""
    if spec.seed is None:
        raise ValueError("scene spec has no seed; unseeded simulation is refused")
    cfg = spec.config
    h = estimate_homography(cfg.anchor_pairs)
    h_inv = h.inverse()
    p = cfg.pixels_per_meter
    rng = np.random.default_rng(spec.seed)

    n_frames = int(round(spec.duration_s * cfg.source_fps))
    half = spec.mask_half_px
    lines: list[str] = []
    clipped = 0
    truth_points: list[list[tuple[int, Point]]] = [[] for _ in spec.agents]

    for frame in range(n_frames):
        t = frame / cfg.source_fps
        on_grid = frame % cfg.stride == 0
        for agent_idx, agent in enumerate(spec.agents):
            pos_m = agent.position(t)
            if pos_m is None:
                continue
            overhead_px = (pos_m[0] * p, pos_m[1] * p)
            if on_grid:
                truth_points[agent_idx].append((frame, overhead_px))

            drop = rng.uniform() < spec.dropout
            noise = rng.normal(0.0, spec.noise_sigma_px, size=2)
            if drop:
                continue
            try:
                image_pt = project(h_inv, overhead_px)
            except PointAtInfinityError:
                clipped += 1
                continue
            contact = (image_pt[0] + noise[0], image_pt[1] + noise[1])
            x, y = contact
            if (
                x - half < 0
                or x + half > cfg.frame_width
                or y - 2 * half < 0
                or y > cfg.frame_height
            ):
                clipped += 1
                continue
            lines.append(json.dumps(_detection_record(frame, agent.cls, contact, half)))

    truth_tracks = [
        Track(id=i, cls=agent.cls, points=pts, status=TERMINATED)
        for i, (agent, pts) in enumerate(zip(spec.agents, truth_points))
        if pts
    ]
    return SimResult(truth_tracks=truth_tracks, detection_lines=lines, clipped=clipped)


@dataclass
class RecoveryScore:
    speed_mae_kmh: float | None
    position_rmse_m: float | None
    track_count_delta: int
    id_switches: int
    matched_points: int = 0


def _track_points_m(track: Track, p: float) -> dict[int, Point]:
    return {f: (pt[0] / p, pt[1] / p) for f, pt in track.points}


def _step_speeds_kmh(points_m: dict[int, Point], stride: int, f_interval: float):
    speeds = {}
    for frame, pt in points_m.items():
        nxt = points_m.get(frame + stride)
        if nxt is not None:
            d = math.hypot(nxt[0] - pt[0], nxt[1] - pt[1])
            speeds[frame] = d / f_interval * 3.6
    return speeds


def compare_to_truth(
    recovered: list[Track], truth: list[Track], cfg: SceneConfig
) -> RecoveryScore:
    """Greedy truth-to-recovered alignment by overlap distance, then score.

    Positions compare in meters, speeds in km/h over the sampled grid.
    With no recovered tracks the error fields are undefined (None) and the
    track-count delta equals the truth count.
    """
    p = cfg.pixels_per_meter
    delta = abs(len(recovered) - len(truth))
    if not recovered or not truth:
        return RecoveryScore(
            speed_mae_kmh=None,
            position_rmse_m=None,
            track_count_delta=delta,
            id_switches=0,
        )

    truth_m = [_track_points_m(t, p) for t in truth]
    rec_m = [_track_points_m(r, p) for r in recovered]

    candidates = []
    for ti, t in enumerate(truth):
        for ri, r in enumerate(recovered):
            if t.cls != r.cls:
                continue
            shared = sorted(set(truth_m[ti]) & set(rec_m[ri]))
            if not shared:
                continue
            cost = float(
                np.mean(
                    [
                        math.hypot(
                            truth_m[ti][f][0] - rec_m[ri][f][0],
                            truth_m[ti][f][1] - rec_m[ri][f][1],
                        )
                        for f in shared
                    ]
                )
            )
            candidates.append((cost, ti, ri))
    candidates.sort()

    aligned: list[tuple[int, int]] = []
    used_t: set[int] = set()
    used_r: set[int] = set()
    for _, ti, ri in candidates:
        if ti in used_t or ri in used_r:
            continue
        aligned.append((ti, ri))
        used_t.add(ti)
        used_r.add(ri)

    sq_errors: list[float] = []
    speed_errors: list[float] = []
    for ti, ri in aligned:
        shared = sorted(set(truth_m[ti]) & set(rec_m[ri]))
        for f in shared:
            tx, ty = truth_m[ti][f]
            rx, ry = rec_m[ri][f]
            sq_errors.append((tx - rx) ** 2 + (ty - ry) ** 2)
        t_speeds = _step_speeds_kmh(truth_m[ti], cfg.stride, cfg.frame_interval)
        r_speeds = _step_speeds_kmh(rec_m[ri], cfg.stride, cfg.frame_interval)
        for f in sorted(set(t_speeds) & set(r_speeds)):
            speed_errors.append(abs(t_speeds[f] - r_speeds[f]))

    # Identity switches: per truth agent, count changes of the nearest
    # recovered track id along its frames.
    switches = 0
    for ti, t in enumerate(truth):
        last_id = None
        for f in sorted(truth_m[ti]):
            best_id, best_d = None, None
            for ri, r in enumerate(recovered):
                if r.cls != t.cls:
                    continue
                pt = rec_m[ri].get(f)
                if pt is None:
                    continue
                d = math.hypot(pt[0] - truth_m[ti][f][0], pt[1] - truth_m[ti][f][1])
                if best_d is None or d < best_d:
                    best_id, best_d = recovered[ri].id, d
            if best_id is not None:
                if last_id is not None and best_id != last_id:
                    switches += 1
                last_id = best_id

    return RecoveryScore(
        speed_mae_kmh=float(np.mean(speed_errors)) if speed_errors else None,
        position_rmse_m=float(np.sqrt(np.mean(sq_errors))) if sq_errors else None,
        track_count_delta=delta,
        id_switches=switches,
        matched_points=len(sq_errors),
    )
