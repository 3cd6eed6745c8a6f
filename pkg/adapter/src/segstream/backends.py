"""Segmentation backends: one frame in, labeled instance masks out.

Two implementations ship:

* ``torchvision/<name>`` wraps a COCO-pretrained torchvision
  instance-segmentation checkpoint (Mask R-CNN by default). Weights come
  from the torchvision cache or an explicit local file; inference runs in
  eval mode on CPU, which is deterministic for fixed weights.
* ``shapes`` is a classical fallback for synthetic footage: dark shapes on
  a light background are segmented by thresholding + connected components,
  classified by area ("car-sized" vs "person-sized"), and scored by how
  much of their bounding box they fill. It keeps the adapter and its
  round-trip tests runnable with no model weights at all.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from .config import AdapterConfig


class ModelLoadError(RuntimeError):
    """The requested segmentation model could not be loaded."""


@dataclass
class Instance:
    label: str  # COCO category name, pre class-map
    score: float
    mask: np.ndarray  # boolean bitmap, frame-sized


# COCO 91-category ids used by torchvision detection models.
_COCO_LABELS = {1: "person", 3: "car", 6: "bus", 8: "truck"}


class TorchvisionBackend:
    def __init__(self, model_name: str, weights_path=None) -> None:
        try:
            import torch
            from torchvision.models import detection as tv_detection
        except ImportError as exc:
            raise ModelLoadError(f"torchvision unavailable: {exc}") from exc
        factory = getattr(tv_detection, model_name, None)
        if factory is None:
            raise ModelLoadError(f"unknown torchvision model '{model_name}'")
        self._torch = torch
        try:
            if weights_path is not None:
                model = factory(weights=None)
                state = torch.load(weights_path, map_location="cpu", weights_only=True)
                model.load_state_dict(state)
            else:
                model = factory(weights="DEFAULT")
        except Exception as exc:
            raise ModelLoadError(f"cannot load weights for '{model_name}': {exc}") from exc
        model.eval()
        self._model = model

    def segment(self, frame_bgr: np.ndarray) -> list[Instance]:
        torch = self._torch
        rgb = cv2.cvtColor(frame_bgr, cv2.COLOR_BGR2RGB)
        tensor = torch.from_numpy(rgb).permute(2, 0, 1).float() / 255.0
        with torch.no_grad():
            out = self._model([tensor])[0]
        instances = []
        for label_id, score, mask in zip(
            out["labels"].tolist(), out["scores"].tolist(), out["masks"]
        ):
            name = _COCO_LABELS.get(int(label_id))
            if name is None:
                continue
            bitmap = mask[0].numpy() >= 0.5
            instances.append(Instance(label=name, score=float(score), mask=bitmap))
        return instances


class ShapeBackend:
    """Threshold + connected components for simple rendered scenes."""

    def __init__(self, dark_threshold: int = 128, min_area_px: int = 30,
                 vehicle_min_area_px: int = 900) -> None:
        self.dark_threshold = dark_threshold
        self.min_area_px = min_area_px
        self.vehicle_min_area_px = vehicle_min_area_px

    def segment(self, frame_bgr: np.ndarray) -> list[Instance]:
        gray = cv2.cvtColor(frame_bgr, cv2.COLOR_BGR2GRAY)
        foreground = (gray < self.dark_threshold).astype(np.uint8)
        count, labels, stats, _ = cv2.connectedComponentsWithStats(foreground)
        instances = []
        for i in range(1, count):
            area = int(stats[i, cv2.CC_STAT_AREA])
            if area < self.min_area_px:
                continue
            box_area = int(stats[i, cv2.CC_STAT_WIDTH]) * int(stats[i, cv2.CC_STAT_HEIGHT])
            fill = area / box_area if box_area else 0.0
            label = "car" if area >= self.vehicle_min_area_px else "person"
            instances.append(Instance(
                label=label,
                score=min(0.995, float(fill)),
                mask=labels == i,
            ))
        return instances


def load_backend(cfg: AdapterConfig):
    if cfg.model == "shapes":
        return ShapeBackend()
    if cfg.model.startswith("torchvision/"):
        return TorchvisionBackend(cfg.model.split("/", 1)[1], weights_path=cfg.weights)
    raise ModelLoadError(
        f"unknown model identifier '{cfg.model}'"
        " (expected 'shapes' or 'torchvision/<model_name>')"
    )
