"""Detection stream ingest: JSON Lines parsing, validation, resampling.

Wire format, one detection per line::

    {"frame": int, "class": "vehicle"|"pedestrian", "score": float,
     "bbox": [x_min, y_min, x_max, y_max],
     "mask": [[x, y], ...],          # optional, >= 3 vertices
     "contact": [x, y]}              # optional, precomputed upstream

Malformed lines are collected with their line number and reason; they never
abort a run by themselves. A frame index running backwards is a fatal
stream error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .config import CLASSES, SceneConfig

MASK_BBOX_SLACK_PX = 2.0


class StreamError(ValueError):
    """Fatal detection-stream error (e.g. frame index regression)."""


@dataclass(frozen=True)
class Detection:
    frame: int
    cls: str
    score: float
    bbox: tuple[float, float, float, float]
    mask: tuple[tuple[float, float], ...] | None = None
    contact: tuple[float, float] | None = None

    @property
    def bbox_fallback(self) -> bool:
        """True when neither a mask nor a contact point was supplied."""
        return self.mask is None and self.contact is None


@dataclass
class FrameSeq:
    """Ordered per-frame detection groups with their sampling parameters."""

    frames: list[tuple[int, list[Detection]]]
    source_fps: float
    stride: int = 1

    def __len__(self) -> int:
        return len(self.frames)

    def detection_count(self) -> int:
        return sum(len(dets) for _, dets in self.frames)


@dataclass
class ParseResult:
    frames: FrameSeq
    accepted: int
    rejected: list[tuple[int, str]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.accepted + len(self.rejected)


def _validate_record(rec: dict, cfg: SceneConfig) -> Detection:
    """Build a Detection from a decoded record, raising ValueError on any
    invariant violation. The message becomes the rejection reason."""
    frame = rec.get("frame")
    if not isinstance(frame, int) or frame < 0:
        raise ValueError(f"bad frame index {frame!r}")

    cls = rec.get("class")
    if cls not in CLASSES:
        raise ValueError(f"unknown class {cls!r}")

    score = rec.get("score")
    if not isinstance(score, (int, float)) or not 0.0 <= score <= 1.0:
        raise ValueError(f"score out of [0, 1]: {score!r}")

    bbox = rec.get("bbox")
    if not isinstance(bbox, list) or len(bbox) != 4 or not all(
        isinstance(v, (int, float)) and math.isfinite(v) for v in bbox
    ):
        raise ValueError(f"bad bbox {bbox!r}")
    x0, y0, x1, y1 = (float(v) for v in bbox)
    if x0 >= x1 or y0 >= y1:
        raise ValueError("degenerate bbox")
    if x0 < 0 or y0 < 0 or x1 > cfg.frame_width or y1 > cfg.frame_height:
        raise ValueError("bbox outside frame")

    mask = None
    if rec.get("mask") is not None:
        raw = rec["mask"]
        if not isinstance(raw, list):
            raise ValueError("mask must be a list of [x, y] vertices")
        if len(raw) == 0:
            raw = None  # empty mask treated as absent
        elif len(raw) < 3:
            raise ValueError("mask needs at least 3 vertices")
        if raw is not None:
            verts = []
            for v in raw:
                if not isinstance(v, list) or len(v) != 2 or not all(
                    isinstance(c, (int, float)) and math.isfinite(c) for c in v
                ):
                    raise ValueError(f"bad mask vertex {v!r}")
                vx, vy = float(v[0]), float(v[1])
                if (
                    vx < x0 - MASK_BBOX_SLACK_PX
                    or vx > x1 + MASK_BBOX_SLACK_PX
                    or vy < y0 - MASK_BBOX_SLACK_PX
                    or vy > y1 + MASK_BBOX_SLACK_PX
                ):
                    raise ValueError("mask outside bbox")
                verts.append((vx, vy))
            mask = tuple(verts)

    contact = None
    if rec.get("contact") is not None:
        raw = rec["contact"]
        if not isinstance(raw, list) or len(raw) != 2 or not all(
            isinstance(c, (int, float)) and math.isfinite(c) for c in raw
        ):
            raise ValueError(f"bad contact point {raw!r}")
        cx, cy = float(raw[0]), float(raw[1])
        if not (0 <= cx <= cfg.frame_width and 0 <= cy <= cfg.frame_height):
            raise ValueError("contact point outside frame")
        contact = (cx, cy)

    return Detection(frame=frame, cls=cls, score=float(score),
                     bbox=(x0, y0, x1, y1), mask=mask, contact=contact)


def parse_detections(stream: IO[str] | Iterable[str], cfg: SceneConfig) -> ParseResult:
    """Parse a line-oriented detection stream into per-frame groups.

    Invalid lines are rejected (line number, reason) without aborting.
    Lines must arrive in non-decreasing frame order; a regression raises
    :class:`StreamError`.
    """
    frames: list[tuple[int, list[Detection]]] = []
    rejected: list[tuple[int, str]] = []
    accepted = 0
    last_frame = -1

    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            rejected.append((lineno, f"invalid json: {exc.msg}"))
            continue
        if not isinstance(rec, dict):
            rejected.append((lineno, "record is not an object"))
            continue

        frame = rec.get("frame")
        if isinstance(frame, int) and frame < last_frame:
            raise StreamError(
                f"line {lineno}: frame index {frame} regresses below {last_frame}"
            )

        try:
            det = _validate_record(rec, cfg)
        except ValueError as exc:
            rejected.append((lineno, str(exc)))
            continue

        if det.frame > last_frame:
            frames.append((det.frame, [det]))
            last_frame = det.frame
        else:
            frames[-1][1].append(det)
        accepted += 1

    return ParseResult(
        frames=FrameSeq(frames=frames, source_fps=cfg.source_fps, stride=1),
        accepted=accepted,
        rejected=rejected,
    )


def serialize_detection(det: Detection) -> str:
    rec: dict = {
        "frame": det.frame,
        "class": det.cls,
        "score": det.score,
        "bbox": list(det.bbox),
    }
    if det.mask is not None:
        rec["mask"] = [list(v) for v in det.mask]
    if det.contact is not None:
        rec["contact"] = list(det.contact)
    return json.dumps(rec)


def serialize_detections(seq: FrameSeq) -> Iterator[str]:
    """Emit the wire-format line for every detection, in frame order."""
    for _, dets in seq.frames:
        for det in dets:
            yield serialize_detection(det)


def resample(seq: FrameSeq, stride: int) -> FrameSeq:
    """Keep frames whose index is congruent to the first index mod stride.

    Idempotent on already-sampled input; empty input stays empty.
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if not seq.frames:
        return FrameSeq(frames=[], source_fps=seq.source_fps, stride=stride)
    first = seq.frames[0][0]
    kept = [(idx, dets) for idx, dets in seq.frames if (idx - first) % stride == 0]
    return FrameSeq(frames=kept, source_fps=seq.source_fps, stride=stride)
