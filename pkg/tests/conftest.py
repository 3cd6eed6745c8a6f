import hashlib
import json
from pathlib import Path

import pytest

from crosswatch.config import parse_scene_config
from crosswatch.geometry import ProjectedDetection, ProjectedSeq

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def tree_hashes(root: Path) -> dict[str, str]:
    """sha256 of every file under a directory, keyed by relative path."""
    out = {}
    for path in sorted(root.rglob("*")):
        if path.is_file():
            out[str(path.relative_to(root))] = hashlib.sha256(
                path.read_bytes()
            ).hexdigest()
    return out


def flat_config_doc(**overrides) -> dict:
    """Inline scene config with an identity homography and P = 1 px/m,
    so overhead pixels read directly as meters in tests."""
    doc = {
        "label": "flat",
        "frame_width": 1280,
        "frame_height": 720,
        "fps": 15,
        "stride": 5,
        "anchors": [
            {"image": [0.0, 0.0], "overhead": [0.0, 0.0]},
            {"image": [1280.0, 0.0], "overhead": [1280.0, 0.0]},
            {"image": [1280.0, 720.0], "overhead": [1280.0, 720.0]},
            {"image": [0.0, 720.0], "overhead": [0.0, 720.0]},
        ],
        "crosswalk_px": 15.0,
        "crosswalk_m": 15.0,
        "speed_limit_kmh": 30.0,
        "thresholds": {"vehicle_m": 12.0, "pedestrian_m": 2.0},
        "outlier_bounds": {},
    }
    doc.update(overrides)
    return doc


def make_flat_cfg(**overrides):
    return parse_scene_config(flat_config_doc(**overrides))


def sim_config_doc(width_px=3840, height_px=720, px_per_m=64.0, **overrides) -> dict:
    """Identity-homography config for simulator scenes: image pixels equal
    overhead pixels, so the projectable region is the whole frame."""
    doc = flat_config_doc(
        frame_width=width_px,
        frame_height=height_px,
        anchors=[
            {"image": [0.0, 0.0], "overhead": [0.0, 0.0]},
            {"image": [float(width_px), 0.0], "overhead": [float(width_px), 0.0]},
            {"image": [float(width_px), float(height_px)],
             "overhead": [float(width_px), float(height_px)]},
            {"image": [0.0, float(height_px)], "overhead": [0.0, float(height_px)]},
        ],
        crosswalk_px=15.0 * px_per_m,
        crosswalk_m=15.0,
    )
    doc.update(overrides)
    return doc


def make_sim_cfg(**overrides):
    return parse_scene_config(sim_config_doc(**overrides))


def make_projected(frames, cfg):
    """Build a ProjectedSeq from [(frame_index, [(cls, x, y), ...]), ...]."""
    seq = [
        (idx, [ProjectedDetection(cls=c, point=(float(x), float(y))) for c, x, y in dets])
        for idx, dets in frames
    ]
    return ProjectedSeq(frames=seq, source_fps=cfg.source_fps, stride=cfg.stride)


def recover(spec, prefer_masks=False):
    """Run a simulated scene through the real pipeline entry points and
    return the recovered tracks, projected frames, and feature table."""
    from crosswatch.detections import parse_detections, resample
    from crosswatch.features import extract_features
    from crosswatch.geometry import project_frame_seq
    from crosswatch.synthetic import simulate_scene
    from crosswatch.tracking import build_tracks

    cfg = spec.config
    sim = simulate_scene(spec)
    parsed = parse_detections(sim.detection_lines, cfg)
    assert parsed.rejected == [], parsed.rejected[:3]
    sampled = resample(parsed.frames, cfg.stride)
    projected = project_frame_seq(sampled, cfg, prefer_masks=prefer_masks)
    tracks = build_tracks(projected, cfg)
    table = extract_features(tracks, projected, cfg, clip_id="sim")
    return {
        "sim": sim,
        "tracks": tracks,
        "projected": projected,
        "table": table,
        "cfg": cfg,
    }


@pytest.fixture
def spot_a_path() -> Path:
    return FIXTURES / "spot_a.json"


@pytest.fixture
def spot_b_path() -> Path:
    return FIXTURES / "spot_b.json"


@pytest.fixture
def sim_flat_path() -> Path:
    return FIXTURES / "sim_flat.json"


@pytest.fixture
def crossing_clip_path() -> Path:
    return FIXTURES / "crossing_clip.jsonl"


@pytest.fixture
def scene_crossing_path() -> Path:
    return FIXTURES / "scene_crossing.json"


@pytest.fixture
def write_config(tmp_path):
    def _write(doc: dict, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(doc), encoding="utf-8")
        return path

    return _write
