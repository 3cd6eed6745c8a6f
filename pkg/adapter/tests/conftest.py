from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
import pytest


@dataclass
class RenderedTruth:
    frame: int
    cls: str
    bottom_center: tuple[float, float]
    bbox: tuple[float, float, float, float]


def render_clip(
    path: Path,
    n_frames: int = 30,
    size: tuple[int, int] = (640, 360),
    fps: float = 15.0,
) -> list[RenderedTruth]:
    """Render a clip of simple dark shapes on a light background.

    One rectangle ("car") drives right along the lower band while one
    ellipse ("person") walks left along the upper band. Returns the
    per-frame ground truth of both shapes.
    """
    width, height = size
    writer = cv2.VideoWriter(
        str(path), cv2.VideoWriter_fourcc(*"MJPG"), fps, (width, height)
    )
    assert writer.isOpened()
    truth: list[RenderedTruth] = []
    for i in range(n_frames):
        frame = np.full((height, width, 3), 235, np.uint8)

        vx, vy, vw, vh = 40 + 4 * i, 220, 60, 36
        cv2.rectangle(frame, (vx, vy), (vx + vw, vy + vh), (40, 35, 35), -1)
        truth.append(RenderedTruth(
            frame=i, cls="vehicle",
            bottom_center=(vx + vw / 2, vy + vh),
            bbox=(vx, vy, vx + vw, vy + vh),
        ))

        pcx, pcy, pax, pay = 520 - 2 * i, 100, 9, 18
        cv2.ellipse(frame, (pcx, pcy), (pax, pay), 0, 0, 360, (50, 45, 45), -1)
        truth.append(RenderedTruth(
            frame=i, cls="pedestrian",
            bottom_center=(float(pcx), float(pcy + pay)),
            bbox=(pcx - pax, pcy - pay, pcx + pax, pcy + pay),
        ))

        writer.write(frame)
    writer.release()
    return truth


@pytest.fixture
def rendered_clip(tmp_path):
    path = tmp_path / "clip.avi"
    truth = render_clip(path)
    return path, truth
