"""Video to detection-JSONL conversion.

The adapter's whole job is sensing: decode frames, segment, map classes,
turn bitmap masks into polygons, and append wire-format lines. It never
computes contact points, transforms, or features.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import cv2

from .backends import load_backend
from .config import AdapterConfig
from .polygons import mask_to_polygon, polygon_bbox
from .schema import validate_record


class VideoOpenError(RuntimeError):
    """The input video could not be opened."""


@dataclass
class AdapterResult:
    frames_read: int = 0
    frames_processed: int = 0
    frames_skipped: int = 0
    detections: int = 0
    dropped_below_threshold: int = 0
    dropped_unmapped_class: int = 0
    dropped_empty_mask: int = 0
    lines: list[str] = field(default_factory=list)


def detect_video(cfg: AdapterConfig) -> AdapterResult:
    """Run the configured backend over the video and emit JSONL lines.

    Frame indices are the decoded frame order; with ``stride`` > 1 only
    every stride-th frame is segmented but indices stay in source numbering.
    Every emitted line is validated against the wire schema before it is
    accepted into the result.
    """
    backend = load_backend(cfg)
    cap = cv2.VideoCapture(str(cfg.video))
    if not cap.isOpened():
        raise VideoOpenError(f"cannot open video {cfg.video}")

    declared = int(cap.get(cv2.CAP_PROP_FRAME_COUNT) or 0)
    result = AdapterResult()
    frame_index = -1
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        frame_index += 1
        result.frames_read += 1
        if frame_index % cfg.stride != 0:
            continue
        result.frames_processed += 1
        height, width = frame.shape[:2]

        rows = []
        for inst in backend.segment(frame):
            wire_class = cfg.class_map.get(inst.label)
            if wire_class is None:
                result.dropped_unmapped_class += 1
                continue
            if inst.score < cfg.score_threshold:
                result.dropped_below_threshold += 1
                continue
            poly = mask_to_polygon(inst.mask)
            if poly is None:
                result.dropped_empty_mask += 1
                continue
            bbox = polygon_bbox(poly, width, height)
            record = {
                "frame": frame_index,
                "class": wire_class,
                "score": round(float(inst.score), 6),
                "bbox": [round(v, 3) for v in bbox],
                "mask": [[round(float(x), 3), round(float(y), 3)] for x, y in poly],
            }
            validate_record(record)
            rows.append(record)

        # within a frame, order by detection confidence, best first
        rows.sort(key=lambda r: (-r["score"], r["bbox"]))
        result.lines.extend(json.dumps(r) for r in rows)
        result.detections += len(rows)

    cap.release()
    if declared and result.frames_read < declared:
        result.frames_skipped = declared - result.frames_read
    return result


def run(cfg: AdapterConfig) -> AdapterResult:
    """detect_video plus writing the output file."""
    result = detect_video(cfg)
    cfg.output.parent.mkdir(parents=True, exist_ok=True)
    cfg.output.write_text(
        "".join(line + "\n" for line in result.lines), encoding="utf-8"
    )
    return result
