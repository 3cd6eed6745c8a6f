import json

import numpy as np
import pytest

from crosswatch.detections import (
    StreamError,
    parse_detections,
    resample,
    serialize_detections,
)

from conftest import make_flat_cfg


def line(frame=0, cls="pedestrian", score=0.9, bbox=(10, 50, 30, 120), **extra):
    rec = {"frame": frame, "class": cls, "score": score, "bbox": list(bbox)}
    rec.update(extra)
    return json.dumps(rec)


@pytest.fixture
def cfg():
    return make_flat_cfg()


def test_two_detections_same_frame_grouped(cfg):
    stream = [
        line(frame=0, cls="vehicle", contact=[20.0, 100.0]),
        line(frame=0, cls="pedestrian", contact=[25.0, 110.0]),
    ]
    result = parse_detections(stream, cfg)
    assert result.accepted == 2
    assert result.rejected == []
    assert len(result.frames) == 1
    frame_index, dets = result.frames.frames[0]
    assert frame_index == 0
    assert [d.cls for d in dets] == ["vehicle", "pedestrian"]


def test_degenerate_bbox_rejected_with_reason(cfg):
    result = parse_detections([line(bbox=(30, 50, 10, 120))], cfg)
    assert result.accepted == 0
    assert result.rejected == [(1, "degenerate bbox")]


def test_bbox_outside_frame_rejected(cfg):
    result = parse_detections([line(bbox=(1200, 50, 1300, 120))], cfg)
    assert result.rejected[0][1] == "bbox outside frame"


def test_mask_outside_bbox_slack_rejected(cfg):
    bad = line(mask=[[10, 50], [30, 50], [30, 123.5]])
    result = parse_detections([bad], cfg)
    assert result.rejected[0][1] == "mask outside bbox"


def test_mask_within_two_px_slack_accepted(cfg):
    ok = line(mask=[[8.5, 50], [30, 50], [30, 121.5]])
    result = parse_detections([ok], cfg)
    assert result.accepted == 1


def test_neither_mask_nor_contact_flagged_fallback(cfg):
    result = parse_detections([line()], cfg)
    assert result.accepted == 1
    det = result.frames.frames[0][1][0]
    assert det.bbox_fallback


def test_frame_regression_is_fatal(cfg):
    stream = [line(frame=5), line(frame=3)]
    with pytest.raises(StreamError):
        parse_detections(stream, cfg)


def test_malformed_lines_collected_not_fatal(cfg):
    stream = ["not json", line(frame=0), json.dumps({"frame": 1}), line(frame=2)]
    result = parse_detections(stream, cfg)
    assert result.accepted == 2
    assert [lineno for lineno, _ in result.rejected] == [1, 3]


def test_score_out_of_range_rejected(cfg):
    result = parse_detections([line(score=1.5)], cfg)
    assert "score" in result.rejected[0][1]


def test_empty_stream_gives_empty_seq(cfg):
    result = parse_detections([], cfg)
    assert result.accepted == 0
    assert len(result.frames) == 0


def test_parse_serialize_parse_round_trip(cfg):
    stream = [
        line(frame=0, cls="vehicle", contact=[20.0, 100.0]),
        line(frame=0, mask=[[10.5, 60.0], [29.0, 60.0], [20.0, 119.0]]),
        line(frame=5, cls="pedestrian", score=0.5),
    ]
    first = parse_detections(stream, cfg)
    second = parse_detections(list(serialize_detections(first.frames)), cfg)
    assert second.rejected == []
    assert second.frames == first.frames


def test_fixture_with_spot_a_record_count(cfg):
    # 2,635 valid records spread over consecutive frames, all accepted.
    stream = [line(frame=i // 5, contact=[20.0, 100.0]) for i in range(2635)]
    result = parse_detections(stream, cfg)
    assert result.accepted == 2635
    assert result.rejected == []


def test_resample_every_fifth_frame(cfg):
    stream = [line(frame=i, contact=[20.0, 100.0]) for i in range(15)]
    seq = parse_detections(stream, cfg).frames
    sampled = resample(seq, 5)
    assert [idx for idx, _ in sampled.frames] == [0, 5, 10]
    assert sampled.stride == 5


def test_resample_stride_one_is_identity(cfg):
    stream = [line(frame=i, contact=[20.0, 100.0]) for i in range(7)]
    seq = parse_detections(stream, cfg).frames
    assert resample(seq, 1).frames == seq.frames


def test_resample_keeps_detection_contents(cfg):
    stream = [
        line(frame=0, cls="vehicle", contact=[20.0, 100.0]),
        line(frame=0, cls="pedestrian", contact=[25.0, 110.0]),
        line(frame=1, contact=[20.0, 100.0]),
    ]
    seq = parse_detections(stream, cfg).frames
    sampled = resample(seq, 5)
    assert sampled.frames == [seq.frames[0]]


def test_resample_idempotent_on_sampled_input(cfg):
    stream = [line(frame=i, contact=[20.0, 100.0]) for i in (0, 5, 10)]
    seq = parse_detections(stream, cfg).frames
    once = resample(seq, 5)
    twice = resample(once, 5)
    assert twice == once


def test_resample_idempotent_property(cfg):
    rng = np.random.default_rng(7)
    for _ in range(50):
        indices = sorted(rng.choice(200, size=rng.integers(0, 40), replace=False))
        stride = int(rng.integers(1, 9))
        stream = [line(frame=int(i), contact=[20.0, 100.0]) for i in indices]
        seq = parse_detections(stream, cfg).frames
        once = resample(seq, stride)
        assert resample(once, stride) == once


def test_resample_empty_input(cfg):
    seq = parse_detections([], cfg).frames
    assert resample(seq, 5).frames == []
