"""Stage orchestration shared by the CLI and the test suite.

Each run_* function performs one pipeline stage end to end and returns its
exit code (0 ok, 1 I/O, 2 calibration, 3 ingest quality, 4 empty analysis).
Every emitted artifact is listed in a manifest with a content hash; stage
timings go to the log stream, never into outputs, so identical inputs give
byte-identical output trees.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .config import ConfigError, SceneConfig, load_scene_config
from .detections import StreamError, parse_detections, resample
from .features import extract_features, read_feature_csv, write_feature_csv
from .geometry import DegenerateAnchorsError, NumericalError, estimate_homography, project_frame_seq
from .report import (
    calibration_text,
    comparison_json,
    comparison_text,
    dump_json,
    write_report_files,
)
from .stats import summarize
from .synthetic import load_scene_spec, simulate_scene
from .tracking import build_tracks, write_track_csv

EXIT_OK = 0
EXIT_IO = 1
EXIT_CALIBRATION = 2
EXIT_INGEST = 3
EXIT_EMPTY_ANALYSIS = 4

DEFAULT_MAX_REJECT_FRACTION = 0.5


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _artifact_list(paths: list[Path], root: Path) -> list[dict]:
    entries = []
    for p in sorted(paths):
        entries.append({"path": str(p.relative_to(root)), "sha256": _sha256(p)})
    return entries


def _log(message: str, log=None) -> None:
    print(message, file=log if log is not None else sys.stderr)


@dataclass
class StageTimer:
    """Wall-clock stage timings, reported to the log only."""

    log: object = None
    _t0: float = field(default_factory=time.perf_counter)

    def mark(self, stage: str) -> None:
        t1 = time.perf_counter()
        _log(f"[timing] {stage}: {t1 - self._t0:.3f}s", self.log)
        self._t0 = t1


def run_calibrate(config_path: str | Path, out=None, log=None) -> int:
    """Print the calibration report; exit 2 on degenerate anchors."""
    try:
        cfg = load_scene_config(config_path)
    except FileNotFoundError:
        _log(f"error: cannot read config {config_path}", log)
        return EXIT_IO
    except ConfigError as exc:
        _log(f"calibration error: {exc}", log)
        return EXIT_CALIBRATION
    try:
        hom = estimate_homography(cfg.anchor_pairs)
    except (DegenerateAnchorsError, NumericalError) as exc:
        _log(f"calibration error: {exc}", log)
        return EXIT_CALIBRATION
    print(calibration_text(cfg, hom), end="", file=out if out is not None else sys.stdout)
    return EXIT_OK


def run_extract(
    detections_path: str | Path,
    config_path: str | Path,
    out_dir: str | Path,
    stride: int | None = None,
    prefer_masks: bool = False,
    max_reject_fraction: float = DEFAULT_MAX_REJECT_FRACTION,
    clip_id: str | None = None,
    log=None,
) -> int:
    """Run ingest -> geometry -> tracking -> features and write the bundle."""
    detections_path = Path(detections_path)
    out_dir = Path(out_dir)
    timer = StageTimer(log=log)

    try:
        cfg = load_scene_config(config_path)
    except FileNotFoundError:
        _log(f"error: cannot read config {config_path}", log)
        return EXIT_IO
    except ConfigError as exc:
        _log(f"calibration error: {exc}", log)
        return EXIT_CALIBRATION

    try:
        hom = estimate_homography(cfg.anchor_pairs)
    except (DegenerateAnchorsError, NumericalError) as exc:
        _log(f"calibration error: {exc}", log)
        return EXIT_CALIBRATION

    clip = clip_id if clip_id is not None else detections_path.stem
    try:
        with detections_path.open("r", encoding="utf-8") as fh:
            parsed = parse_detections(fh, cfg)
    except OSError as exc:
        _log(f"error: cannot read detections: {exc}", log)
        return EXIT_IO
    except StreamError as exc:
        _log(f"ingest error: {exc}", log)
        return EXIT_INGEST
    timer.mark("ingest")

    for lineno, reason in parsed.rejected:
        _log(f"[reject] line {lineno}: {reason}", log)
    if parsed.total > 0:
        frac = len(parsed.rejected) / parsed.total
        if frac > max_reject_fraction:
            _log(
                f"ingest error: {len(parsed.rejected)}/{parsed.total} lines rejected"
                f" ({frac:.1%} > {max_reject_fraction:.1%})",
                log,
            )
            return EXIT_INGEST

    effective_stride = stride if stride is not None else cfg.stride
    sampled = resample(parsed.frames, effective_stride)
    projected = project_frame_seq(sampled, cfg, homography=hom, prefer_masks=prefer_masks)
    timer.mark("geometry")

    tracks = build_tracks(projected, cfg)
    timer.mark("tracking")

    table = extract_features(tracks, projected, cfg, clip_id=clip)
    timer.mark("features")

    out_dir.mkdir(parents=True, exist_ok=True)
    track_path = out_dir / "tracks.csv"
    track_rows = write_track_csv(track_path, tracks, cfg, clip_id=clip)
    feature_path = out_dir / "features.csv"
    feature_rows = write_feature_csv(feature_path, table)

    manifest = {
        "tool": "crosswatch",
        "version": __version__,
        "command": "extract",
        "inputs": {
            "detections": str(detections_path),
            "config": str(Path(config_path)),
        },
        "parameters": {
            "stride": effective_stride,
            "prefer_masks": prefer_masks,
            "max_reject_fraction": max_reject_fraction,
            "clip_id": clip,
        },
        "counts": {
            "lines_accepted": parsed.accepted,
            "lines_rejected": len(parsed.rejected),
            "frames_raw": len(parsed.frames),
            "frames_sampled": len(sampled),
            "detections_sampled": sampled.detection_count(),
            "contact_fallbacks": projected.fallback_count,
            "dropped_at_infinity": projected.dropped_at_infinity,
            "missing_lane_axis": projected.missing_axis_count,
            "tracks": len(tracks),
            "track_rows": track_rows,
            "feature_records": feature_rows,
        },
        "artifacts": _artifact_list([track_path, feature_path], out_dir),
    }
    dump_json(manifest, out_dir / "manifest.json")
    timer.mark("write")
    return EXIT_OK


def _merge_bounds(cfg: SceneConfig, bounds_json: str | None):
    bounds = dict(cfg.outlier_bounds)
    if bounds_json:
        override = json.loads(bounds_json)
        for key, pair in override.items():
            if key not in bounds:
                raise ConfigError("outlier_bounds", f"unknown feature '{key}'")
            lo = None if pair[0] is None else float(pair[0])
            hi = None if pair[1] is None else float(pair[1])
            bounds[key] = (lo, hi)
    return bounds


def run_analyze(
    feature_csvs: list[str | Path],
    config_path: str | Path,
    out_dir: str | Path,
    bins: int = 20,
    bounds_json: str | None = None,
    log=None,
) -> int:
    """Summarize one or more feature tables; side-by-side when several."""
    out_dir = Path(out_dir)
    try:
        cfg = load_scene_config(config_path)
        bounds = _merge_bounds(cfg, bounds_json)
    except FileNotFoundError:
        _log(f"error: cannot read config {config_path}", log)
        return EXIT_IO
    except (ConfigError, json.JSONDecodeError) as exc:
        _log(f"config error: {exc}", log)
        return EXIT_CALIBRATION

    reports = []
    artifacts: list[Path] = []
    for csv_path in feature_csvs:
        csv_path = Path(csv_path)
        try:
            table = read_feature_csv(csv_path)
        except OSError as exc:
            _log(f"error: cannot read features: {exc}", log)
            return EXIT_IO
        except ValueError as exc:
            _log(f"error: malformed feature CSV: {exc}", log)
            return EXIT_IO
        report = summarize(table, bounds, bin_count=bins, label=csv_path.stem)
        if report.rows_kept == 0 or not report.features:
            _log(
                f"analysis error: no usable rows in {csv_path} after outlier filtering",
                log,
            )
            return EXIT_EMPTY_ANALYSIS
        reports.append(report)

    # Distinct sub-directory per input; suffix duplicate labels.
    seen: dict[str, int] = {}
    for report in reports:
        label = report.label
        if label in seen:
            seen[label] += 1
            label = f"{label}_{seen[report.label]}"
        else:
            seen[label] = 0
        artifacts.extend(write_report_files(report, out_dir / label))

    if len(reports) >= 2:
        cmp_json = out_dir / "comparison.json"
        dump_json(comparison_json(reports), cmp_json)
        artifacts.append(cmp_json)
        cmp_text = out_dir / "comparison.txt"
        cmp_text.write_text(comparison_text(reports), encoding="utf-8")
        artifacts.append(cmp_text)

    manifest = {
        "tool": "crosswatch",
        "version": __version__,
        "command": "analyze",
        "inputs": {
            "features": [str(Path(p)) for p in feature_csvs],
            "config": str(Path(config_path)),
        },
        "parameters": {"bins": bins, "bounds": {k: list(v) for k, v in bounds.items()}},
        "counts": {
            r.label: {"rows_in": r.rows_in, "rows_kept": r.rows_kept}
            for r in reports
        },
        "artifacts": _artifact_list(artifacts, out_dir),
    }
    dump_json(manifest, out_dir / "manifest.json")
    return EXIT_OK


def run_simulate(
    scene_path: str | Path,
    out_dir: str | Path,
    seed: int | None = None,
    log=None,
) -> int:
    """Generate a detection stream plus truth tracks from a scene spec."""
    out_dir = Path(out_dir)
    try:
        spec = load_scene_spec(scene_path)
    except FileNotFoundError:
        _log(f"error: cannot read scene spec {scene_path}", log)
        return EXIT_IO
    except (KeyError, ValueError, ConfigError) as exc:
        _log(f"scene spec error: {exc}", log)
        return EXIT_CALIBRATION
    if seed is not None:
        spec = type(spec)(
            config=spec.config,
            duration_s=spec.duration_s,
            agents=spec.agents,
            noise_sigma_px=spec.noise_sigma_px,
            seed=seed,
            mask_half_px=spec.mask_half_px,
            dropout=spec.dropout,
        )
    try:
        result = simulate_scene(spec)
    except ValueError as exc:
        _log(f"simulation error: {exc}", log)
        return EXIT_CALIBRATION

    out_dir.mkdir(parents=True, exist_ok=True)
    det_path = out_dir / "detections.jsonl"
    det_path.write_text(
        "".join(line + "\n" for line in result.detection_lines), encoding="utf-8"
    )
    truth_path = out_dir / "truth.csv"
    write_track_csv(
        truth_path, result.truth_tracks, spec.config,
        clip_id=Path(scene_path).stem, truth=True,
    )
    if result.clipped:
        _log(f"[warn] {result.clipped} positions clipped at the frame boundary", log)

    manifest = {
        "tool": "crosswatch",
        "version": __version__,
        "command": "simulate",
        "inputs": {"scene": str(Path(scene_path))},
        "parameters": {"seed": spec.seed, "noise_sigma_px": spec.noise_sigma_px},
        "counts": {
            "detections": len(result.detection_lines),
            "truth_tracks": len(result.truth_tracks),
            "clipped": result.clipped,
        },
        "artifacts": _artifact_list([det_path, truth_path], out_dir),
    }
    dump_json(manifest, out_dir / "manifest.json")
    return EXIT_OK
