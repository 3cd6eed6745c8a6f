"""Report rendering: text tables, JSON documents, CSV exports, figures.

Everything here is a pure function of the summary data, so repeated runs
over the same inputs produce byte-identical files (figures included).
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .config import SceneConfig
from .geometry import Homography, anchor_residual
from .stats import CorrelationMatrix, FiveNumber, Histogram, SummaryReport

_FIG_DPI = 110


def calibration_text(cfg: SceneConfig, hom: Homography) -> str:
    """Human-readable calibration report: matrix, residuals, F and P."""
    residual = anchor_residual(hom, cfg.anchor_pairs)
    lines = [f"calibration report: {cfg.label}"]
    lines.append("homography (image -> overhead):")
    for row in hom.matrix:
        lines.append("  [{: .9e} {: .9e} {: .9e}]".format(*row))
    lines.append(f"worst anchor residual: {residual:.3e} px")
    lines.append(
        f"frame_interval F: {cfg.frame_interval!r} s"
        f" (= stride {cfg.stride} / fps {cfg.source_fps!r})"
    )
    lines.append(
        f"pixels_per_meter P: {cfg.pixels_per_meter!r} px/m"
        f" (= {cfg.crosswalk_pixel_length!r} px / {cfg.crosswalk_real_length!r} m)"
    )
    if cfg.nominal_px_per_m is not None and not math.isclose(
        cfg.nominal_px_per_m, cfg.pixels_per_meter, rel_tol=1e-9
    ):
        lines.append(
            f"NOTE: site metadata lists a nominal scale of {cfg.nominal_px_per_m!r} px/m,"
            f" which disagrees with the measured quotient {cfg.pixels_per_meter!r} px/m;"
            " the derived quotient is used throughout."
        )
    lines.append(f"speed limit: {cfg.speed_limit_kmh!r} km/h")
    lines.append(
        f"thresholds: vehicle {cfg.vehicle_threshold_m!r} m,"
        f" pedestrian {cfg.pedestrian_threshold_m!r} m per sampled step"
    )
    return "\n".join(lines) + "\n"


def _fmt(value: float | None, width: int = 9) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a".rjust(width)
    return f"{value:.3f}".rjust(width)


def report_text(report: SummaryReport) -> str:
    lines = [f"summary: {report.label}"]
    lines.append(
        f"rows: {report.rows_in} in, {report.rows_kept} kept,"
        f" {report.rows_dropped} dropped as outliers"
    )
    if any(report.dropped_per_feature.values()):
        parts = [
            f"{k}={v}" for k, v in sorted(report.dropped_per_feature.items()) if v
        ]
        lines.append("dropped by feature: " + ", ".join(parts))
    lines.append("")
    header = f"{'feature':<34}{'count':>7}{'min':>10}{'max':>10}{'mean':>10}"
    lines.append(header)
    for name, s in report.features.items():
        lines.append(
            f"{name:<34}{s.count:>7}{_fmt(s.min, 10)}{_fmt(s.max, 10)}{_fmt(s.mean, 10)}"
        )
    lines.append("")
    lines.append(f"{'feature':<34}{'q1':>10}{'median':>10}{'q3':>10}{'fliers':>8}")
    for name, s in report.features.items():
        fn = s.five_number
        lines.append(
            f"{name:<34}{_fmt(fn.q1, 10)}{_fmt(fn.median, 10)}{_fmt(fn.q3, 10)}"
            f"{len(fn.fliers):>8}"
        )
    if report.correlation is not None:
        lines.append("")
        lines.append(correlation_text(report.correlation))
    return "\n".join(lines) + "\n"


def correlation_text(corr: CorrelationMatrix) -> str:
    short = {name: f"c{i}" for i, name in enumerate(corr.names)}
    lines = ["pearson correlation (pairwise-complete):"]
    for name in corr.names:
        lines.append(f"  {short[name]} = {name}")
    head = "      " + "".join(f"{short[n]:>9}" for n in corr.names)
    lines.append(head)
    for i, name in enumerate(corr.names):
        row = "".join(_fmt(float(corr.matrix[i, j])) for j in range(len(corr.names)))
        lines.append(f"  {short[name]:<4}{row}")
    if corr.undefined:
        flagged = sorted({tuple(sorted(pair)) for pair in corr.undefined})
        lines.append(
            "  undefined (constant column): "
            + "; ".join(f"{a} vs {b}" for a, b in flagged)
        )
    return "\n".join(lines)


def _matrix_json(corr: CorrelationMatrix | None):
    if corr is None:
        return None
    cells = [
        [None if math.isnan(v) else v for v in row] for row in corr.matrix.tolist()
    ]
    return {
        "names": list(corr.names),
        "matrix": cells,
        "undefined": sorted({tuple(sorted(pair)) for pair in corr.undefined}),
    }


def report_json(report: SummaryReport) -> dict:
    return {
        "label": report.label,
        "rows_in": report.rows_in,
        "rows_kept": report.rows_kept,
        "rows_dropped": report.rows_dropped,
        "dropped_per_feature": report.dropped_per_feature,
        "features": {
            name: {
                "count": s.count,
                "min": s.min,
                "max": s.max,
                "mean": s.mean,
                "constant": s.constant,
                "histogram": {
                    "edges": s.histogram.edges.tolist(),
                    "counts": s.histogram.counts.tolist(),
                },
                "five_number": {
                    "min": s.five_number.min,
                    "q1": s.five_number.q1,
                    "median": s.five_number.median,
                    "q3": s.five_number.q3,
                    "max": s.five_number.max,
                    "whisker_lo": s.five_number.whisker_lo,
                    "whisker_hi": s.five_number.whisker_hi,
                    "fliers": s.five_number.fliers,
                },
            }
            for name, s in report.features.items()
        },
        "correlation": _matrix_json(report.correlation),
    }


def comparison_json(reports: list[SummaryReport]) -> dict:
    return {"spots": [report_json(r) for r in reports]}


def comparison_text(reports: list[SummaryReport]) -> str:
    labels = [r.label for r in reports]
    lines = ["side-by-side summary: " + " vs ".join(labels)]
    names = sorted({name for r in reports for name in r.features})
    for stat in ("min", "max", "mean"):
        lines.append("")
        lines.append(f"{stat} per feature")
        header = f"{'feature':<34}" + "".join(f"{lab:>14}" for lab in labels)
        lines.append(header)
        for name in names:
            row = f"{name:<34}"
            for r in reports:
                s = r.features.get(name)
                row += _fmt(getattr(s, stat) if s else None, 14)
            lines.append(row)
    for r in reports:
        if r.correlation is not None:
            lines.append("")
            lines.append(f"[{r.label}]")
            lines.append(correlation_text(r.correlation))
    return "\n".join(lines) + "\n"


def dump_json(doc: dict, path: Path) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_histogram_csv(hist: Histogram, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lo", "bin_hi", "count"])
        for i, count in enumerate(hist.counts):
            writer.writerow([repr(float(hist.edges[i])), repr(float(hist.edges[i + 1])), int(count)])


def write_boxplot_csv(name: str, fn: FiveNumber, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["feature", "min", "q1", "median", "q3", "max", "whisker_lo", "whisker_hi", "n_fliers"]
        )
        writer.writerow([
            name, repr(fn.min), repr(fn.q1), repr(fn.median), repr(fn.q3),
            repr(fn.max), repr(fn.whisker_lo), repr(fn.whisker_hi), len(fn.fliers),
        ])


def write_correlation_csv(corr: CorrelationMatrix, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", *corr.names])
        for i, name in enumerate(corr.names):
            row = [name]
            for j in range(len(corr.names)):
                v = float(corr.matrix[i, j])
                row.append("" if math.isnan(v) else repr(v))
            writer.writerow(row)


def render_histogram_png(name: str, hist: Histogram, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    widths = np.diff(hist.edges)
    ax.bar(hist.edges[:-1], hist.counts, width=widths, align="edge",
           color="#4878d0", edgecolor="white")
    ax.set_xlabel(name)
    ax.set_ylabel("count")
    ax.set_title(f"histogram: {name}")
    fig.tight_layout()
    fig.savefig(path, dpi=_FIG_DPI)
    plt.close(fig)


def render_boxplot_png(name: str, fn: FiveNumber, path: Path) -> None:
    stats = [{
        "label": name,
        "med": fn.median,
        "q1": fn.q1,
        "q3": fn.q3,
        "whislo": fn.whisker_lo,
        "whishi": fn.whisker_hi,
        "fliers": fn.fliers,
    }]
    fig, ax = plt.subplots(figsize=(4, 4.5))
    ax.bxp(stats, showfliers=True)
    ax.set_ylabel(name)
    ax.set_title(f"boxplot: {name}")
    fig.tight_layout()
    fig.savefig(path, dpi=_FIG_DPI)
    plt.close(fig)


def render_correlation_png(corr: CorrelationMatrix, path: Path) -> None:
    k = len(corr.names)
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    im = ax.imshow(corr.matrix, vmin=-1.0, vmax=1.0, cmap="RdBu_r")
    ax.set_xticks(range(k))
    ax.set_yticks(range(k))
    ax.set_xticklabels(corr.names, rotation=30, ha="right", fontsize=8)
    ax.set_yticklabels(corr.names, fontsize=8)
    for i in range(k):
        for j in range(k):
            v = float(corr.matrix[i, j])
            text = "n/a" if math.isnan(v) else f"{v:.2f}"
            ax.text(j, i, text, ha="center", va="center", fontsize=8)
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title("feature correlation")
    fig.tight_layout()
    fig.savefig(path, dpi=_FIG_DPI)
    plt.close(fig)


def write_report_files(report: SummaryReport, out_dir: Path) -> list[Path]:
    """Write the full report bundle for one input; returns created paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []

    json_path = out_dir / "summary.json"
    dump_json(report_json(report), json_path)
    created.append(json_path)

    text_path = out_dir / "summary.txt"
    text_path.write_text(report_text(report), encoding="utf-8")
    created.append(text_path)

    for name, s in report.features.items():
        hist_csv = out_dir / f"hist_{name}.csv"
        write_histogram_csv(s.histogram, hist_csv)
        created.append(hist_csv)
        hist_png = out_dir / f"hist_{name}.png"
        render_histogram_png(name, s.histogram, hist_png)
        created.append(hist_png)
        box_csv = out_dir / f"box_{name}.csv"
        write_boxplot_csv(name, s.five_number, box_csv)
        created.append(box_csv)
        box_png = out_dir / f"box_{name}.png"
        render_boxplot_png(name, s.five_number, box_png)
        created.append(box_png)

    if report.correlation is not None:
        corr_csv = out_dir / "corr.csv"
        write_correlation_csv(report.correlation, corr_csv)
        created.append(corr_csv)
        corr_png = out_dir / "corr.png"
        render_correlation_png(report.correlation, corr_png)
        created.append(corr_png)

    return created
