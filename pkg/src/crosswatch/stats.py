"""Preprocessing and summary statistics over feature tables.

Quantiles use linear interpolation between order statistics (the type-7
convention); correlation is Pearson over pairwise-complete rows. Min-max
normalization is a positive affine map, so it never changes a Pearson
coefficient; reports normalize for display without affecting correlations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import (
    ACCEL_KEY,
    DIST_KEY,
    FEATURE_KEYS,
    PEDESTRIAN,
    SPEED_KEY,
    VEHICLE,
)
from .features import FeatureRecord, FeatureTable

# Analysis columns for the correlation matrix, pivoted per frame.
ANALYSIS_COLUMNS = (
    "vehicle_speed_kmh",
    "vehicle_accel_kmh_per_s",
    "pedestrian_speed_kmh",
    "vehicle_pedestrian_distance_m",
)


@dataclass
class FilterResult:
    table: FeatureTable
    kept: int
    dropped: int
    dropped_per_feature: dict[str, int]


def filter_outliers(
    table: FeatureTable,
    bounds: dict[str, tuple[float | None, float | None]],
) -> FilterResult:
    """Drop rows where any present feature falls outside its bound.

    A dropped row increments the counter of every feature that violated
    its bound. Applying the same bounds twice is a no-op.
    """
    kept_rows: list[FeatureRecord] = []
    dropped_per_feature = {key: 0 for key in FEATURE_KEYS}
    dropped = 0
    for rec in table.rows:
        bad = False
        for key in FEATURE_KEYS:
            value = rec.get(key)
            if value is None:
                continue
            lo, hi = bounds.get(key, (None, None))
            if (lo is not None and value < lo) or (hi is not None and value > hi):
                dropped_per_feature[key] += 1
                bad = True
        if bad:
            dropped += 1
        else:
            kept_rows.append(rec)
    return FilterResult(
        table=FeatureTable(rows=kept_rows),
        kept=len(kept_rows),
        dropped=dropped,
        dropped_per_feature=dropped_per_feature,
    )


def minmax_normalize(series) -> tuple[np.ndarray, bool]:
    """Rescale a series to [0, 1] via (d - min) / (max - min).

    Returns the rescaled array and a flag marking a constant input, which
    maps to all zeros instead of erroring.
    """
    values = np.asarray(series, dtype=float)
    if values.size == 0:
        raise ValueError("cannot normalize an empty series")
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.zeros_like(values), True
    return (values - lo) / (hi - lo), False


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def histogram(series, bin_count: int) -> Histogram:
    """Equal-width histogram over [min, max]; the rightmost bin is closed."""
    if bin_count < 1:
        raise ValueError(f"bin_count must be >= 1, got {bin_count}")
    values = np.asarray(series, dtype=float)
    if values.size == 0:
        raise ValueError("cannot histogram an empty series")
    counts, edges = np.histogram(values, bins=bin_count)
    return Histogram(edges=edges, counts=counts)


def quantile(sorted_values: np.ndarray, q: float) -> float:
    """Linear-interpolation quantile of an ascending array (type-7)."""
    n = len(sorted_values)
    if n == 0:
        raise ValueError("cannot take a quantile of an empty series")
    h = (n - 1) * q
    lo = int(math.floor(h))
    g = h - lo
    if g == 0.0:
        return float(sorted_values[lo])
    return float(sorted_values[lo] + g * (sorted_values[lo + 1] - sorted_values[lo]))


@dataclass
class FiveNumber:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    whisker_lo: float
    whisker_hi: float
    fliers: list[float] = field(default_factory=list)

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def boxplot_summary(series) -> FiveNumber:
    """Five-number summary with 1.5*IQR whisker bounds and fliers."""
    values = np.sort(np.asarray(series, dtype=float))
    if values.size == 0:
        raise ValueError("cannot summarize an empty series")
    q1 = quantile(values, 0.25)
    q2 = quantile(values, 0.5)
    q3 = quantile(values, 0.75)
    iqr = q3 - q1
    lo = q1 - 1.5 * iqr
    hi = q3 + 1.5 * iqr
    fliers = [float(v) for v in values if v < lo or v > hi]
    return FiveNumber(
        min=float(values[0]),
        q1=q1,
        median=q2,
        q3=q3,
        max=float(values[-1]),
        whisker_lo=lo,
        whisker_hi=hi,
        fliers=fliers,
    )


@dataclass
class CorrelationMatrix:
    names: tuple[str, ...]
    matrix: np.ndarray
    undefined: set[tuple[str, str]] = field(default_factory=set)

    def value(self, a: str, b: str) -> float:
        return float(self.matrix[self.names.index(a), self.names.index(b)])


def _pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    """Pearson r, or None when either side is constant (undefined)."""
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0.0 or sy == 0.0:
        return None
    r = float(xc @ yc) / (sx * sy)
    return max(-1.0, min(1.0, r))


def pearson_matrix(columns: dict[str, list[float | None]], names=None) -> CorrelationMatrix:
    """Pearson correlation over pairwise-complete rows of aligned columns.

    Columns are equal-length lists where None marks a missing observation.
    Entries against a constant column are flagged undefined (NaN), not 0.
    """
    if names is None:
        names = tuple(columns.keys())
    else:
        names = tuple(names)
    series = {name: columns[name] for name in names}
    lengths = {len(v) for v in series.values()}
    if len(lengths) > 1:
        raise ValueError(f"columns must be aligned, got lengths {sorted(lengths)}")

    k = len(names)
    matrix = np.eye(k)
    undefined: set[tuple[str, str]] = set()
    for i in range(k):
        for j in range(i + 1, k):
            a, b = series[names[i]], series[names[j]]
            pairs = [
                (x, y) for x, y in zip(a, b) if x is not None and y is not None
            ]
            r = None
            if len(pairs) >= 2:
                xs = np.array([p[0] for p in pairs], dtype=float)
                ys = np.array([p[1] for p in pairs], dtype=float)
                r = _pearson(xs, ys)
            if r is None:
                matrix[i, j] = matrix[j, i] = float("nan")
                undefined.add((names[i], names[j]))
                undefined.add((names[j], names[i]))
            else:
                matrix[i, j] = matrix[j, i] = r
    return CorrelationMatrix(names=names, matrix=matrix, undefined=undefined)


def analysis_columns(table: FeatureTable) -> dict[str, list[float | None]]:
    """Pivot the per-track table into per-frame analysis columns.

    Speeds and accelerations aggregate by mean over the objects present in
    the frame; the vehicle-pedestrian distance takes the frame minimum (the
    closest interaction). Frames are ordered by (clip, frame).
    """
    grouped: dict[tuple[str, int], list[FeatureRecord]] = {}
    for rec in table.rows:
        grouped.setdefault((rec.clip_id, rec.frame), []).append(rec)

    cols: dict[str, list[float | None]] = {name: [] for name in ANALYSIS_COLUMNS}
    for key in sorted(grouped):
        recs = grouped[key]
        v_speed = [r.speed_kmh for r in recs if r.cls == VEHICLE and r.speed_kmh is not None]
        v_accel = [
            r.accel_kmh_per_s
            for r in recs
            if r.cls == VEHICLE and r.accel_kmh_per_s is not None
        ]
        p_speed = [
            r.speed_kmh for r in recs if r.cls == PEDESTRIAN and r.speed_kmh is not None
        ]
        dist = [r.dist_m for r in recs if r.dist_m is not None]
        cols["vehicle_speed_kmh"].append(
            float(np.mean(v_speed)) if v_speed else None
        )
        cols["vehicle_accel_kmh_per_s"].append(
            float(np.mean(v_accel)) if v_accel else None
        )
        cols["pedestrian_speed_kmh"].append(
            float(np.mean(p_speed)) if p_speed else None
        )
        cols["vehicle_pedestrian_distance_m"].append(min(dist) if dist else None)
    return cols


@dataclass
class FeatureSummary:
    name: str
    count: int
    min: float
    max: float
    mean: float
    histogram: Histogram
    five_number: FiveNumber
    constant: bool


@dataclass
class SummaryReport:
    label: str
    rows_in: int
    rows_kept: int
    rows_dropped: int
    dropped_per_feature: dict[str, int]
    features: dict[str, FeatureSummary]
    correlation: CorrelationMatrix | None


# Report blocks: (name, feature key, class restriction or None).
REPORT_FEATURES = (
    ("vehicle_speed_kmh", SPEED_KEY, VEHICLE),
    ("vehicle_accel_kmh_per_s", ACCEL_KEY, VEHICLE),
    ("pedestrian_speed_kmh", SPEED_KEY, PEDESTRIAN),
    ("vehicle_pedestrian_distance_m", DIST_KEY, VEHICLE),
)


def summarize(
    table: FeatureTable,
    bounds: dict[str, tuple[float | None, float | None]],
    bin_count: int = 20,
    label: str = "clip",
) -> SummaryReport:
    """Filter outliers, then summarize every feature block and correlate."""
    filtered = filter_outliers(table, bounds)
    kept = filtered.table

    features: dict[str, FeatureSummary] = {}
    for name, key, cls in REPORT_FEATURES:
        values = kept.column(key, cls=cls)
        if not values:
            continue
        arr = np.asarray(values, dtype=float)
        _, constant = minmax_normalize(arr)
        features[name] = FeatureSummary(
            name=name,
            count=len(values),
            min=float(arr.min()),
            max=float(arr.max()),
            mean=float(arr.mean()),
            histogram=histogram(arr, bin_count),
            five_number=boxplot_summary(arr),
            constant=constant,
        )

    correlation = None
    if kept.rows:
        cols = analysis_columns(kept)
        populated = {
            name: col for name, col in cols.items()
            if any(v is not None for v in col)
        }
        if len(populated) >= 2:
            correlation = pearson_matrix(populated)

    return SummaryReport(
        label=label,
        rows_in=len(table),
        rows_kept=filtered.kept,
        rows_dropped=filtered.dropped,
        dropped_per_feature=filtered.dropped_per_feature,
        features=features,
        correlation=correlation,
    )
