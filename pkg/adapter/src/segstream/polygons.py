"""Bitmap mask to polygon conversion: marching squares, largest contour."""

from __future__ import annotations

import numpy as np
from skimage import measure

from .config import MAX_MASK_VERTICES


def _shoelace_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def mask_to_polygon(mask: np.ndarray, max_vertices: int = MAX_MASK_VERTICES) -> np.ndarray | None:
    """Largest marching-squares contour of a boolean mask as (x, y) vertices.

    The mask is padded so regions touching the border still close; output
    coordinates are clamped into the image extent and decimated to at most
    ``max_vertices`` points. Returns None for empty masks.
    """
    if not mask.any():
        return None
    h, w = mask.shape
    padded = np.pad(mask.astype(float), 1)
    contours = measure.find_contours(padded, 0.5)
    if not contours:
        return None
    best = max(contours, key=_shoelace_area)
    # (row, col) in padded coordinates -> (x, y) in image coordinates
    poly = np.stack([best[:, 1] - 1.0, best[:, 0] - 1.0], axis=1)
    poly[:, 0] = np.clip(poly[:, 0], 0.0, float(w))
    poly[:, 1] = np.clip(poly[:, 1], 0.0, float(h))
    # drop the duplicated closing point before decimating
    if len(poly) > 1 and np.array_equal(poly[0], poly[-1]):
        poly = poly[:-1]
    if len(poly) < 3:
        return None
    if len(poly) > max_vertices:
        idx = np.linspace(0, len(poly) - 1, max_vertices).astype(int)
        poly = poly[idx]
    return poly


def polygon_bbox(poly: np.ndarray, width: int, height: int) -> tuple[float, float, float, float]:
    """Axis-aligned bounds of a polygon, clamped into the frame."""
    x0 = float(np.clip(poly[:, 0].min(), 0.0, width))
    y0 = float(np.clip(poly[:, 1].min(), 0.0, height))
    x1 = float(np.clip(poly[:, 0].max(), 0.0, width))
    y1 = float(np.clip(poly[:, 1].max(), 0.0, height))
    return (x0, y0, x1, y1)
