"""segstream: instance-segmentation video adapter for the crosswatch wire format."""

__version__ = "0.1.0"

from .adapter import AdapterResult, VideoOpenError, detect_video, run
from .backends import Instance, ModelLoadError, ShapeBackend, TorchvisionBackend
from .config import DEFAULT_CLASS_MAP, AdapterConfig
from .polygons import mask_to_polygon, polygon_bbox
from .schema import DETECTION_SCHEMA, validate_record

__all__ = [
    "AdapterConfig",
    "AdapterResult",
    "DEFAULT_CLASS_MAP",
    "DETECTION_SCHEMA",
    "Instance",
    "ModelLoadError",
    "ShapeBackend",
    "TorchvisionBackend",
    "VideoOpenError",
    "detect_video",
    "mask_to_polygon",
    "polygon_bbox",
    "run",
    "validate_record",
]
