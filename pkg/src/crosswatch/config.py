"""Scene configuration: camera/site calibration constants and thresholds.

A scene config is a single JSON document. All physical constants that can
be derived from it (frame interval, overhead pixels-per-meter) are computed
on access, never stored, so they cannot drift from their inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

VEHICLE = "vehicle"
PEDESTRIAN = "pedestrian"
CLASSES = (VEHICLE, PEDESTRIAN)

# Feature column keys used for outlier bounds and reports.
SPEED_KEY = "speed_kmh"
ACCEL_KEY = "accel_kmh_per_s"
DIST_KEY = "dist_m"
FEATURE_KEYS = (SPEED_KEY, ACCEL_KEY, DIST_KEY)

DEFAULT_OUTLIER_BOUNDS = {
    SPEED_KEY: (0.0, 120.0),
    ACCEL_KEY: (-15.0, 15.0),
    DIST_KEY: (0.0, 50.0),
}

# Collinearity tolerance for anchor triples, relative to the anchor spread.
_COLLINEAR_REL_TOL = 1e-9


class ConfigError(ValueError):
    """Raised when a scene config is missing a field or violates an invariant."""

    def __init__(self, field_name: str, message: str) -> None:
        self.field_name = field_name
        super().__init__(f"config field '{field_name}': {message}")


@dataclass(frozen=True)
class LaneAxis:
    """Central axis of a vehicle lane, as two image points.

    Travel direction points from ``p0`` toward ``p1``.
    """

    p0: tuple[float, float]
    p1: tuple[float, float]


@dataclass(frozen=True)
class SceneConfig:
    source_fps: float
    stride: int
    anchor_pairs: tuple[tuple[tuple[float, float], tuple[float, float]], ...]
    crosswalk_pixel_length: float
    crosswalk_real_length: float
    speed_limit_kmh: float
    vehicle_threshold_m: float
    pedestrian_threshold_m: float
    outlier_bounds: dict[str, tuple[float | None, float | None]]
    frame_width: int = 1280
    frame_height: int = 720
    lane_axes: tuple[LaneAxis, ...] = ()
    vehicle_leading_fraction: float = 0.25
    nominal_px_per_m: float | None = None
    label: str = "scene"

    @property
    def frame_interval(self) -> float:
        """Seconds between consecutive retained frames (stride / fps)."""
        return self.stride / self.source_fps

    @property
    def pixels_per_meter(self) -> float:
        """Overhead-plane scale: crosswalk pixel length / real length."""
        return self.crosswalk_pixel_length / self.crosswalk_real_length


def _triple_collinear(a, b, c, scale: float) -> bool:
    cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return abs(cross) <= _COLLINEAR_REL_TOL * scale * scale


def collinear_triples(points) -> list[tuple[int, int, int]]:
    """Indices of every collinear (or duplicate) triple among the points."""
    scale = max(
        max(abs(p[0]) for p in points),
        max(abs(p[1]) for p in points),
        1.0,
    )
    bad = []
    n = len(points)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if _triple_collinear(points[i], points[j], points[k], scale):
                    bad.append((i, j, k))
    return bad


def _require(doc: dict, key: str) -> Any:
    if key not in doc:
        raise ConfigError(key, "missing required field")
    return doc[key]


def _point(value, field_name: str) -> tuple[float, float]:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise ConfigError(field_name, f"expected [x, y], got {value!r}")
    x, y = float(value[0]), float(value[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ConfigError(field_name, "coordinates must be finite")
    return (x, y)


def _parse_bounds(doc: dict) -> dict[str, tuple[float | None, float | None]]:
    raw = _require(doc, "outlier_bounds")
    if not isinstance(raw, dict):
        raise ConfigError("outlier_bounds", "expected an object of [min, max] pairs")
    bounds: dict[str, tuple[float | None, float | None]] = dict(DEFAULT_OUTLIER_BOUNDS)
    for key, pair in raw.items():
        if key not in FEATURE_KEYS:
            raise ConfigError(
                "outlier_bounds", f"unknown feature '{key}' (expected one of {FEATURE_KEYS})"
            )
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError("outlier_bounds", f"'{key}' must be a [min, max] pair")
        lo = None if pair[0] is None else float(pair[0])
        hi = None if pair[1] is None else float(pair[1])
        for side in (lo, hi):
            if side is not None and not math.isfinite(side):
                raise ConfigError("outlier_bounds", f"'{key}' bound must be finite")
        if lo is not None and hi is not None and lo > hi:
            raise ConfigError("outlier_bounds", f"'{key}' has min > max")
        bounds[key] = (lo, hi)
    return bounds


def parse_scene_config(doc: dict, label: str = "scene") -> SceneConfig:
    """Validate a decoded scene-config document and derive its constants."""
    fps = _require(doc, "fps")
    if not isinstance(fps, (int, float)) or fps <= 0:
        raise ConfigError("fps", f"must be a positive number, got {fps!r}")
    stride = _require(doc, "stride")
    if not isinstance(stride, int) or stride < 1:
        raise ConfigError("stride", f"must be a positive integer, got {stride!r}")

    anchors_raw = _require(doc, "anchors")
    if not isinstance(anchors_raw, list):
        raise ConfigError("anchors", f"expected a list of 4 anchor pairs, got {anchors_raw!r}")
    if len(anchors_raw) != 4:
        raise ConfigError("anchors", f"expected exactly 4 anchor pairs, got {len(anchors_raw)}")
    pairs = []
    for i, entry in enumerate(anchors_raw):
        if not isinstance(entry, dict):
            raise ConfigError("anchors", f"anchor {i} must be an object with 'image' and 'overhead'")
        img = _point(entry.get("image"), f"anchors[{i}].image")
        ovh = _point(entry.get("overhead"), f"anchors[{i}].overhead")
        pairs.append((img, ovh))

    for side, idx in (("image", 0), ("overhead", 1)):
        bad = collinear_triples([p[idx] for p in pairs])
        if bad:
            i, j, k = bad[0]
            raise ConfigError(
                "anchors",
                f"{side} anchor points {i}, {j}, {k} are collinear or duplicated "
                "(the 4 anchors must be in general position)",
            )

    crosswalk_px = float(_require(doc, "crosswalk_px"))
    crosswalk_m = float(_require(doc, "crosswalk_m"))
    if crosswalk_px <= 0:
        raise ConfigError("crosswalk_px", "must be positive")
    if crosswalk_m <= 0:
        raise ConfigError("crosswalk_m", "must be positive")

    speed_limit = float(_require(doc, "speed_limit_kmh"))

    thresholds = _require(doc, "thresholds")
    if not isinstance(thresholds, dict):
        raise ConfigError("thresholds", "expected object with 'vehicle_m' and 'pedestrian_m'")
    try:
        vehicle_thr = float(thresholds["vehicle_m"])
        pedestrian_thr = float(thresholds["pedestrian_m"])
    except KeyError as exc:
        raise ConfigError("thresholds", f"missing {exc.args[0]!r}") from None
    if vehicle_thr <= 0 or pedestrian_thr <= 0:
        raise ConfigError("thresholds", "thresholds must be positive meters")

    bounds = _parse_bounds(doc)

    width = doc.get("frame_width", 1280)
    height = doc.get("frame_height", 720)
    for name, value in (("frame_width", width), ("frame_height", height)):
        if not isinstance(value, int) or value <= 0:
            raise ConfigError(name, f"must be a positive integer, got {value!r}")

    axes = []
    for i, axis in enumerate(doc.get("lane_axes", [])):
        if not isinstance(axis, dict) or "points" not in axis:
            raise ConfigError("lane_axes", f"axis {i} must be an object with 'points'")
        pts = axis["points"]
        if not isinstance(pts, list) or len(pts) != 2:
            raise ConfigError("lane_axes", f"axis {i} needs exactly 2 image points")
        p0 = _point(pts[0], f"lane_axes[{i}].points[0]")
        p1 = _point(pts[1], f"lane_axes[{i}].points[1]")
        if p0 == p1:
            raise ConfigError("lane_axes", f"axis {i} points are identical")
        axes.append(LaneAxis(p0, p1))

    leading = doc.get("vehicle_leading_fraction", 0.25)
    if not isinstance(leading, (int, float)) or not 0 < leading <= 1:
        raise ConfigError("vehicle_leading_fraction", "must be in (0, 1]")

    nominal = doc.get("nominal_px_per_m")
    if nominal is not None:
        nominal = float(nominal)
        if nominal <= 0:
            raise ConfigError("nominal_px_per_m", "must be positive when given")

    return SceneConfig(
        source_fps=float(fps),
        stride=stride,
        anchor_pairs=tuple(pairs),
        crosswalk_pixel_length=crosswalk_px,
        crosswalk_real_length=crosswalk_m,
        speed_limit_kmh=speed_limit,
        vehicle_threshold_m=vehicle_thr,
        pedestrian_threshold_m=pedestrian_thr,
        outlier_bounds=bounds,
        frame_width=width,
        frame_height=height,
        lane_axes=tuple(axes),
        vehicle_leading_fraction=float(leading),
        nominal_px_per_m=nominal,
        label=str(doc.get("label", label)),
    )


def load_scene_config(path: str | Path) -> SceneConfig:
    """Load and validate a scene config JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "top-level value must be an object")
    return parse_scene_config(doc, label=path.stem)
