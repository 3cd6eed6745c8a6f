"""Frame-to-frame association of overhead contact points into tracks.

Association between two consecutive sampled frames is greedy on the global
minimum: repeatedly take the closest unmatched (track, detection) pair and
accept it while the distance stays within the class threshold. Tracks that
miss a frame terminate immediately; unmatched detections seed new tracks.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .config import PEDESTRIAN, VEHICLE, SceneConfig
from .geometry import Point, ProjectedSeq

ACTIVE = "active"
TERMINATED = "terminated"

# Deterministic per-frame processing order for track id allocation.
_CLASS_ORDER = (PEDESTRIAN, VEHICLE)


@dataclass
class Matching:
    """Injective pairing between track heads and detections.

    ``pairs`` is kept in acceptance order, so ``distances`` is non-decreasing.
    """

    pairs: list[tuple[int, int]] = field(default_factory=list)
    distances: list[float] = field(default_factory=list)
    unmatched_tracks: list[int] = field(default_factory=list)
    unmatched_detections: list[int] = field(default_factory=list)


def associate(
    prev: Iterable[tuple[int, Point]],
    detections: Iterable[Point],
    threshold: float,
) -> Matching:
    """Greedy globally-minimal matching under a distance threshold.

    ``prev`` holds (track_id, head point); ``detections`` the candidate
    points of the same class. Ties in distance break toward the lower
    track id, then the lower detection index.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    heads = list(prev)
    points = list(detections)

    candidates = []
    for tid, head in heads:
        for j, p in enumerate(points):
            d = math.hypot(head[0] - p[0], head[1] - p[1])
            if d <= threshold:
                candidates.append((d, tid, j))
    candidates.sort()

    matching = Matching()
    used_tracks: set[int] = set()
    used_dets: set[int] = set()
    for d, tid, j in candidates:
        if tid in used_tracks or j in used_dets:
            continue
        matching.pairs.append((tid, j))
        matching.distances.append(d)
        used_tracks.add(tid)
        used_dets.add(j)

    matching.unmatched_tracks = [tid for tid, _ in heads if tid not in used_tracks]
    matching.unmatched_detections = [j for j in range(len(points)) if j not in used_dets]
    return matching


@dataclass
class Track:
    id: int
    cls: str
    points: list[tuple[int, Point]]
    status: str = ACTIVE

    @property
    def head(self) -> Point:
        return self.points[-1][1]

    @property
    def frames(self) -> list[int]:
        return [f for f, _ in self.points]


def build_tracks(seq: ProjectedSeq, cfg: SceneConfig) -> list[Track]:
    """Run per-class association over every pair of consecutive frames.

    Thresholds are configured in meters and applied in overhead pixels via
    the scene scale. A gap in the sampled frame grid terminates all active
    tracks (no coasting).
    """
    p = cfg.pixels_per_meter
    thresholds_px = {
        PEDESTRIAN: cfg.pedestrian_threshold_m * p,
        VEHICLE: cfg.vehicle_threshold_m * p,
    }

    tracks: list[Track] = []
    active: dict[str, list[Track]] = {c: [] for c in _CLASS_ORDER}
    next_id = 0
    prev_index: int | None = None

    for frame_index, dets in seq.frames:
        gap = prev_index is not None and frame_index - prev_index != seq.stride
        for cls in _CLASS_ORDER:
            points = [d.point for d in dets if d.cls == cls]

            if gap:
                for tr in active[cls]:
                    tr.status = TERMINATED
                active[cls] = []

            heads = [(tr.id, tr.head) for tr in active[cls]]
            by_id = {tr.id: tr for tr in active[cls]}
            m = associate(heads, points, thresholds_px[cls])

            survivors = []
            for tid, j in m.pairs:
                tr = by_id[tid]
                tr.points.append((frame_index, points[j]))
                survivors.append(tr)
            for tid in m.unmatched_tracks:
                by_id[tid].status = TERMINATED
            for j in m.unmatched_detections:
                tr = Track(id=next_id, cls=cls, points=[(frame_index, points[j])])
                next_id += 1
                tracks.append(tr)
                survivors.append(tr)
            active[cls] = sorted(survivors, key=lambda t: t.id)
        prev_index = frame_index

    return sorted(tracks, key=lambda t: t.id)


TRACK_CSV_COLUMNS = ("clip_id", "track_id", "class", "frame", "x_m", "y_m")


def write_track_csv(
    path: str | Path,
    tracks: Iterable[Track],
    cfg: SceneConfig,
    clip_id: str,
    truth: bool | None = None,
) -> int:
    """Export tracks as CSV in overhead meters. Returns the row count.

    ``truth`` adds the truth-marker column used by simulator exports.
    """
    p = cfg.pixels_per_meter
    columns = TRACK_CSV_COLUMNS + (("truth",) if truth is not None else ())
    rows = 0
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for tr in tracks:
            for frame, (x, y) in tr.points:
                row = [clip_id, tr.id, tr.cls, frame, repr(x / p), repr(y / p)]
                if truth is not None:
                    row.append(int(truth))
                writer.writerow(row)
                rows += 1
    return rows
