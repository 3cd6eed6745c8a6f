"""Command-line entry point for the video-to-JSONL adapter."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .adapter import VideoOpenError, run
from .backends import ModelLoadError
from .config import AdapterConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segstream",
        description="Segment a video and emit detection JSONL (vehicles and pedestrians only).",
    )
    parser.add_argument("--video", required=True, help="input video file")
    parser.add_argument("--out", required=True, help="output JSONL path")
    parser.add_argument("--score", type=float, default=0.5, help="score threshold")
    parser.add_argument("--stride", type=int, default=1, help="segment every Nth frame")
    parser.add_argument(
        "--model", default="torchvision/maskrcnn_resnet50_fpn",
        help="'torchvision/<model_name>' or 'shapes' (classical, for synthetic clips)",
    )
    parser.add_argument("--weights", default=None, help="local checkpoint file (torchvision models)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = AdapterConfig(
            video=args.video,
            output=args.out,
            model=args.model,
            score_threshold=args.score,
            stride=args.stride,
            weights=args.weights,
        )
        result = run(cfg)
    except (ModelLoadError, VideoOpenError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"{result.detections} detections from {result.frames_processed} frames"
        f" -> {args.out}",
        file=sys.stderr,
    )
    if result.frames_skipped:
        print(f"warning: {result.frames_skipped} undecodable frames skipped", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
