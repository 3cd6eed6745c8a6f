"""Behavioral features per track per sampled step, in physical units.

Speed is the overhead pixel displacement over one sampled step divided by
F * P (seconds per step times pixels per meter), reported in km/h.
Acceleration is the per-step change in speed over F, reported in km/h per
second; it applies to vehicles only. Distance is the overhead gap to the
nearest opposite-class object in the same frame, in meters.

Speed and acceleration are assigned to the earlier frame of their step.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .config import PEDESTRIAN, VEHICLE, SceneConfig
from .geometry import Point, ProjectedSeq
from .tracking import Track

MPS_TO_KMH = 3.6

FEATURE_CSV_COLUMNS = (
    "clip_id", "frame", "track_id", "class", "speed_kmh", "accel_kmh_per_s", "dist_m"
)


def step_speed_mps(p0: Point, p1: Point, frame_interval: float, px_per_m: float) -> float:
    """Step speed in m/s from two consecutive overhead points (pixels)."""
    if frame_interval <= 0 or px_per_m <= 0:
        raise ValueError("frame_interval and px_per_m must be positive")
    pixel_distance = math.hypot(p1[0] - p0[0], p1[1] - p0[1])
    return pixel_distance / (frame_interval * px_per_m)


def speed(p0: Point, p1: Point, frame_interval: float, px_per_m: float) -> float:
    """Step speed in km/h from two consecutive overhead points (pixels)."""
    return step_speed_mps(p0, p1, frame_interval, px_per_m) * MPS_TO_KMH


def acceleration(v0_mps: float, v_mps: float, frame_interval: float) -> float:
    """Change between consecutive step speeds (m/s) in km/h per second."""
    if frame_interval <= 0:
        raise ValueError("frame_interval must be positive")
    return (v_mps - v0_mps) / frame_interval * MPS_TO_KMH


def nearest_opposite_distance(
    subject: Point, others: Iterable[Point], px_per_m: float
) -> float | None:
    """Distance in meters to the closest opposite-class point, None if none."""
    if px_per_m <= 0:
        raise ValueError("px_per_m must be positive")
    best = None
    for o in others:
        d = math.hypot(subject[0] - o[0], subject[1] - o[1])
        if best is None or d < best:
            best = d
    return None if best is None else best / px_per_m


@dataclass(frozen=True)
class FeatureRecord:
    clip_id: str
    frame: int
    track_id: int
    cls: str
    speed_kmh: float | None = None
    accel_kmh_per_s: float | None = None
    dist_m: float | None = None

    def get(self, key: str) -> float | None:
        return getattr(self, key)


@dataclass
class FeatureTable:
    rows: list[FeatureRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[FeatureRecord]:
        return iter(self.rows)

    def column(self, key: str, cls: str | None = None) -> list[float]:
        """Present values of one feature, optionally restricted to a class."""
        return [
            value
            for rec in self.rows
            if (cls is None or rec.cls == cls)
            and (value := rec.get(key)) is not None
        ]


def extract_features(
    tracks: list[Track],
    frames: ProjectedSeq,
    cfg: SceneConfig,
    clip_id: str = "clip",
) -> FeatureTable:
    """One record per track per sampled frame carrying whichever features
    exist there: speed needs a successor point, acceleration two, distance
    an opposite-class object in the same frame. Frames where no feature is
    defined produce no record."""
    f = cfg.frame_interval
    p = cfg.pixels_per_meter

    opposite: dict[int, dict[str, list[Point]]] = {}
    for idx, dets in frames.frames:
        by_class: dict[str, list[Point]] = {VEHICLE: [], PEDESTRIAN: []}
        for det in dets:
            by_class[det.cls].append(det.point)
        opposite[idx] = by_class

    rows: list[FeatureRecord] = []
    for tr in sorted(tracks, key=lambda t: t.id):
        other_cls = PEDESTRIAN if tr.cls == VEHICLE else VEHICLE
        speeds_mps = [
            step_speed_mps(a[1], b[1], f, p)
            for a, b in zip(tr.points, tr.points[1:])
        ]
        for i, (frame, point) in enumerate(tr.points):
            spd = speeds_mps[i] * MPS_TO_KMH if i < len(speeds_mps) else None
            acc = None
            if tr.cls == VEHICLE and i + 1 < len(speeds_mps):
                acc = acceleration(speeds_mps[i], speeds_mps[i + 1], f)
            dist = nearest_opposite_distance(
                point, opposite.get(frame, {}).get(other_cls, []), p
            )
            if spd is None and acc is None and dist is None:
                continue
            rows.append(
                FeatureRecord(
                    clip_id=clip_id,
                    frame=frame,
                    track_id=tr.id,
                    cls=tr.cls,
                    speed_kmh=spd,
                    accel_kmh_per_s=acc,
                    dist_m=dist,
                )
            )
    return FeatureTable(rows=rows)


def _cell(value: float | None) -> str:
    return "" if value is None else repr(value)


def write_feature_csv(path: str | Path, table: FeatureTable) -> int:
    """Write the feature table; absent values become empty cells."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FEATURE_CSV_COLUMNS)
        for rec in table.rows:
            writer.writerow([
                rec.clip_id, rec.frame, rec.track_id, rec.cls,
                _cell(rec.speed_kmh), _cell(rec.accel_kmh_per_s), _cell(rec.dist_m),
            ])
    return len(table.rows)


def read_feature_csv(path: str | Path) -> FeatureTable:
    rows: list[FeatureRecord] = []
    with Path(path).open("r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(FEATURE_CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"feature CSV {path} missing columns: {sorted(missing)}")
        for rec in reader:
            rows.append(
                FeatureRecord(
                    clip_id=rec["clip_id"],
                    frame=int(rec["frame"]),
                    track_id=int(rec["track_id"]),
                    cls=rec["class"],
                    speed_kmh=float(rec["speed_kmh"]) if rec["speed_kmh"] else None,
                    accel_kmh_per_s=(
                        float(rec["accel_kmh_per_s"]) if rec["accel_kmh_per_s"] else None
                    ),
                    dist_m=float(rec["dist_m"]) if rec["dist_m"] else None,
                )
            )
    return FeatureTable(rows=rows)
