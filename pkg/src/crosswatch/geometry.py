"""Planar geometry: ground contact points and the image-to-overhead map.

The oblique camera view and the overhead virtual frame are related by a
3x3 projective transformation fixed by exactly four anchor point pairs
(the crosswalk vertices). Estimation is the direct linear solve of the
8 unknown matrix entries; no least squares, no normalization tricks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import LaneAxis, SceneConfig, collinear_triples
from .detections import Detection, FrameSeq

ANCHOR_RESIDUAL_TOL_PX = 1e-6
_W_EPS = 1e-12

Point = tuple[float, float]


class DegenerateAnchorsError(ValueError):
    """Anchor points are collinear or duplicated; no homography exists."""


class NumericalError(RuntimeError):
    """The anchor system is numerically singular."""


class PointAtInfinityError(ValueError):
    """A projected point maps to (or near) the line at infinity."""


@dataclass(frozen=True)
class Homography:
    """3x3 projective map from the oblique image plane to the overhead frame.

    The stored matrix is normalized so element (3,3) is 1 whenever it is
    nonzero; projection itself is scale-invariant.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"homography must be 3x3, got {m.shape}")
        if abs(m[2, 2]) > 0:
            m = m / m[2, 2]
        if abs(np.linalg.det(m)) <= 1e-12:
            raise NumericalError("homography matrix is singular")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def project(self, p: Point) -> Point:
        return project(self, p)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.matrix))


def estimate_homography(anchor_pairs) -> Homography:
    """Solve the exact four-pair homography (8 unknowns, h33 = 1).

    Each pair is ``((x, y), (u, v))`` mapping an image point to its overhead
    point. Raises :class:`DegenerateAnchorsError` if any 3 source or
    destination points are collinear, :class:`NumericalError` if the linear
    system cannot be solved.
    """
    pairs = list(anchor_pairs)
    if len(pairs) != 4:
        raise ValueError(f"expected exactly 4 anchor pairs, got {len(pairs)}")

    for side, idx in (("image", 0), ("overhead", 1)):
        bad = collinear_triples([p[idx] for p in pairs])
        if bad:
            i, j, k = bad[0]
            raise DegenerateAnchorsError(
                f"{side} anchors {i}, {j}, {k} are collinear or duplicated"
            )

    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(pairs):
        a[2 * i] = [x, y, 1, 0, 0, 0, -u * x, -u * y]
        b[2 * i] = u
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -v * x, -v * y]
        b[2 * i + 1] = v

    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"anchor system is singular (cond={np.linalg.cond(a):.3e})"
        ) from exc

    matrix = np.array(
        [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]]
    )
    hom = Homography(matrix)

    residual = anchor_residual(hom, pairs)
    if residual > ANCHOR_RESIDUAL_TOL_PX:
        raise NumericalError(
            f"anchor reprojection residual {residual:.3e} px exceeds "
            f"{ANCHOR_RESIDUAL_TOL_PX} (cond={np.linalg.cond(a):.3e})"
        )
    return hom


def anchor_residual(h: Homography, anchor_pairs) -> float:
    """Worst-case distance between projected anchors and their targets."""
    worst = 0.0
    for img, ovh in anchor_pairs:
        u, v = project(h, img)
        worst = max(worst, math.hypot(u - ovh[0], v - ovh[1]))
    return worst


def project(h: Homography, p: Point) -> Point:
    """Apply the projective map to one point."""
    x, y = p
    m = h.matrix
    w = m[2, 0] * x + m[2, 1] * y + m[2, 2]
    if abs(w) < _W_EPS:
        raise PointAtInfinityError(f"point {p} maps to infinity (w={w:.3e})")
    return (
        float((m[0, 0] * x + m[0, 1] * y + m[0, 2]) / w),
        float((m[1, 0] * x + m[1, 1] * y + m[1, 2]) / w),
    )


def _bbox_center_x(bbox) -> float:
    return (bbox[0] + bbox[2]) / 2.0


def _lowest_vertex(verts) -> Point:
    # Max y wins; ties broken by smallest x for determinism.
    return max(verts, key=lambda v: (v[1], -v[0]))


def pedestrian_contact_point(det: Detection) -> Point:
    """Ground point between the feet of a pedestrian detection.

    With a mask: the midpoint of the lowest vertex in the left half and the
    lowest vertex in the right half of the bbox (the two tiptoe candidates).
    If one half has no vertices, the single lowest vertex. Without a mask:
    bbox bottom-center.
    """
    if det.cls != "pedestrian":
        raise ValueError(f"expected a pedestrian detection, got {det.cls!r}")
    if det.mask is None:
        return (_bbox_center_x(det.bbox), det.bbox[3])

    cx = _bbox_center_x(det.bbox)
    left = [v for v in det.mask if v[0] <= cx]
    right = [v for v in det.mask if v[0] > cx]
    if not left:
        return _lowest_vertex(right)
    if not right:
        return _lowest_vertex(left)
    lx, ly = _lowest_vertex(left)
    rx, ry = _lowest_vertex(right)
    return ((lx + rx) / 2.0, (ly + ry) / 2.0)


def _project_onto_axis(p: Point, axis: LaneAxis) -> Point:
    ax, ay = axis.p0
    dx, dy = axis.p1[0] - ax, axis.p1[1] - ay
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / (dx * dx + dy * dy)
    return (ax + t * dx, ay + t * dy)


def _axis_distance(p: Point, axis: LaneAxis) -> float:
    q = _project_onto_axis(p, axis)
    return math.hypot(p[0] - q[0], p[1] - q[1])


def _leading_edge_center(bbox, travel: Point) -> Point:
    x0, y0, x1, y1 = bbox
    if abs(travel[0]) >= abs(travel[1]):
        x = x1 if travel[0] >= 0 else x0
        return (x, (y0 + y1) / 2.0)
    y = y1 if travel[1] >= 0 else y0
    return ((x0 + x1) / 2.0, y)


def vehicle_contact_point(
    det: Detection,
    lane_axis: LaneAxis | None,
    leading_fraction: float = 0.25,
) -> Point:
    """Ground point under the front center of a vehicle detection.

    Among mask vertices in the leading ``leading_fraction`` of the bbox along
    the lane's travel direction, the vertex nearest the lane axis wins and is
    projected orthogonally onto the axis. Without a mask the leading-edge
    center of the bbox is used; without an axis, the bbox bottom-center.
    """
    if det.cls != "vehicle":
        raise ValueError(f"expected a vehicle detection, got {det.cls!r}")
    if lane_axis is None:
        return (_bbox_center_x(det.bbox), det.bbox[3])

    travel = (lane_axis.p1[0] - lane_axis.p0[0], lane_axis.p1[1] - lane_axis.p0[1])
    norm = math.hypot(*travel)
    travel = (travel[0] / norm, travel[1] / norm)

    if det.mask is None:
        return _leading_edge_center(det.bbox, travel)

    x0, y0, x1, y1 = det.bbox
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    along = [c[0] * travel[0] + c[1] * travel[1] for c in corners]
    leading_limit = max(along)
    window = leading_limit - leading_fraction * (max(along) - min(along))

    candidates = [
        v for v in det.mask
        if v[0] * travel[0] + v[1] * travel[1] >= window
    ]
    if not candidates:
        candidates = list(det.mask)
    best = min(candidates, key=lambda v: (_axis_distance(v, lane_axis), v[0], v[1]))
    return _project_onto_axis(best, lane_axis)


def choose_lane_axis(det: Detection, axes) -> LaneAxis | None:
    """Pick the lane axis nearest the bbox center; None when no axes exist."""
    if not axes:
        return None
    center = (_bbox_center_x(det.bbox), (det.bbox[1] + det.bbox[3]) / 2.0)
    return min(axes, key=lambda ax: _axis_distance(center, ax))


@dataclass(frozen=True)
class ProjectedDetection:
    """One detection reduced to its overhead contact point (overhead px)."""

    cls: str
    point: Point
    fallback: bool = False


@dataclass
class ProjectedSeq:
    """Per-frame overhead contact points, ready for association."""

    frames: list[tuple[int, list[ProjectedDetection]]]
    source_fps: float
    stride: int
    fallback_count: int = 0
    dropped_at_infinity: int = 0
    missing_axis_count: int = 0


def project_frame_seq(
    seq: FrameSeq,
    cfg: SceneConfig,
    homography: Homography | None = None,
    prefer_masks: bool = False,
) -> ProjectedSeq:
    """Estimate every detection's image contact point and map it overhead.

    A precomputed ``contact`` wins unless ``prefer_masks`` asks for the
    mask-derived point. Points that project to infinity are dropped and
    counted instead of aborting the run.
    """
    h = homography if homography is not None else estimate_homography(cfg.anchor_pairs)
    out: list[tuple[int, list[ProjectedDetection]]] = []
    fallbacks = 0
    dropped = 0
    missing_axis = 0

    for idx, dets in seq.frames:
        row: list[ProjectedDetection] = []
        for det in dets:
            fallback = False
            if det.contact is not None and not (prefer_masks and det.mask is not None):
                image_pt = det.contact
            elif det.cls == "pedestrian":
                image_pt = pedestrian_contact_point(det)
                fallback = det.mask is None
            else:
                axis = choose_lane_axis(det, cfg.lane_axes)
                if axis is None:
                    missing_axis += 1
                image_pt = vehicle_contact_point(
                    det, axis, leading_fraction=cfg.vehicle_leading_fraction
                )
                fallback = det.mask is None or axis is None
            try:
                overhead = project(h, image_pt)
            except PointAtInfinityError:
                dropped += 1
                continue
            if fallback:
                fallbacks += 1
            row.append(ProjectedDetection(cls=det.cls, point=overhead, fallback=fallback))
        out.append((idx, row))

    return ProjectedSeq(
        frames=out,
        source_fps=seq.source_fps,
        stride=seq.stride,
        fallback_count=fallbacks,
        dropped_at_infinity=dropped,
        missing_axis_count=missing_axis,
    )
