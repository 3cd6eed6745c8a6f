"""Command-line front end: calibrate, extract, analyze, simulate."""

from __future__ import annotations

import argparse
from typing import Sequence

from . import __version__
from .pipeline import (
    DEFAULT_MAX_REJECT_FRACTION,
    run_analyze,
    run_calibrate,
    run_extract,
    run_simulate,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crosswatch",
        description=(
            "Convert oblique-camera crosswalk detections into overhead tracks,"
            " behavioral features, and risk-monitoring statistics."
        ),
    )
    parser.add_argument("--version", action="version", version=f"crosswatch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    cal = sub.add_parser("calibrate", help="check anchors and print F, P, homography")
    cal.add_argument("--config", required=True, help="scene config JSON")

    ext = sub.add_parser("extract", help="detections JSONL -> tracks + features CSV")
    ext.add_argument("--detections", required=True, help="detection JSONL file")
    ext.add_argument("--config", required=True, help="scene config JSON")
    ext.add_argument("--out", required=True, help="output directory")
    ext.add_argument("--stride", type=int, default=None, help="override config stride")
    ext.add_argument("--clip-id", default=None, help="clip label (default: file stem)")
    ext.add_argument(
        "--prefer-masks", action="store_true",
        help="derive contact points from masks even when the stream carries them",
    )
    ext.add_argument(
        "--max-reject-frac", type=float, default=DEFAULT_MAX_REJECT_FRACTION,
        help="fail the run when more than this fraction of lines is rejected",
    )

    ana = sub.add_parser("analyze", help="feature CSVs -> summary reports + figures")
    ana.add_argument("--features", required=True, nargs="+", help="feature CSV file(s)")
    ana.add_argument("--config", required=True, help="scene config JSON")
    ana.add_argument("--out", required=True, help="output directory")
    ana.add_argument("--bins", type=int, default=20, help="histogram bin count")
    ana.add_argument(
        "--bounds", default=None,
        help='outlier bounds override, JSON like {"speed_kmh": [0, 100]}',
    )

    sim = sub.add_parser("simulate", help="scene spec JSON -> detections + truth")
    sim.add_argument("--scene", required=True, help="scene spec JSON")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=None, help="override the spec seed")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "calibrate":
        return run_calibrate(args.config)
    if args.command == "extract":
        return run_extract(
            args.detections,
            args.config,
            args.out,
            stride=args.stride,
            prefer_masks=args.prefer_masks,
            max_reject_fraction=args.max_reject_frac,
            clip_id=args.clip_id,
        )
    if args.command == "analyze":
        return run_analyze(
            args.features, args.config, args.out,
            bins=args.bins, bounds_json=args.bounds,
        )
    if args.command == "simulate":
        return run_simulate(args.scene, args.out, seed=args.seed)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
