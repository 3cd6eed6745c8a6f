"""Adapter configuration and the class map into the wire-format classes."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

# COCO category labels we keep, mapped onto the two wire-format classes.
DEFAULT_CLASS_MAP = {
    "person": "pedestrian",
    "car": "vehicle",
    "bus": "vehicle",
    "truck": "vehicle",
}

WIRE_CLASSES = ("vehicle", "pedestrian")

MAX_MASK_VERTICES = 64


@dataclass
class AdapterConfig:
    video: Path
    output: Path
    model: str = "torchvision/maskrcnn_resnet50_fpn"
    score_threshold: float = 0.5
    stride: int = 1
    class_map: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_CLASS_MAP))
    weights: Path | None = None

    def __post_init__(self) -> None:
        self.video = Path(self.video)
        self.output = Path(self.output)
        if not 0.0 < self.score_threshold <= 1.0:
            raise ValueError(
                f"score threshold must be in (0, 1], got {self.score_threshold}"
            )
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        bad = set(self.class_map.values()) - set(WIRE_CLASSES)
        if bad:
            raise ValueError(f"class map targets outside the wire format: {sorted(bad)}")
