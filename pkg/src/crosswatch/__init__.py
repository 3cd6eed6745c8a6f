"""crosswatch: overhead trajectory and behavior analytics for crosswalk CCTV.

The pipeline turns per-frame oblique-camera detections into overhead-metric
tracks, per-step behavioral features (speed, acceleration, vehicle-pedestrian
distance), and summary statistics for potential-risk monitoring.
"""

__version__ = "0.1.0"

from .config import (
    ConfigError,
    LaneAxis,
    SceneConfig,
    load_scene_config,
    parse_scene_config,
)
from .detections import (
    Detection,
    FrameSeq,
    ParseResult,
    StreamError,
    parse_detections,
    resample,
    serialize_detections,
)
from .features import (
    FeatureRecord,
    FeatureTable,
    acceleration,
    extract_features,
    nearest_opposite_distance,
    speed,
)
from .geometry import (
    DegenerateAnchorsError,
    Homography,
    NumericalError,
    PointAtInfinityError,
    estimate_homography,
    pedestrian_contact_point,
    project,
    project_frame_seq,
    vehicle_contact_point,
)
from .stats import (
    boxplot_summary,
    filter_outliers,
    histogram,
    minmax_normalize,
    pearson_matrix,
    summarize,
)
from .synthetic import (
    AgentSpec,
    RecoveryScore,
    SceneSpec,
    compare_to_truth,
    load_scene_spec,
    simulate_scene,
)
from .tracking import Matching, Track, associate, build_tracks

__all__ = [
    "__version__",
    "AgentSpec",
    "ConfigError",
    "Detection",
    "DegenerateAnchorsError",
    "FeatureRecord",
    "FeatureTable",
    "FrameSeq",
    "Homography",
    "LaneAxis",
    "Matching",
    "NumericalError",
    "ParseResult",
    "PointAtInfinityError",
    "RecoveryScore",
    "SceneConfig",
    "SceneSpec",
    "StreamError",
    "Track",
    "acceleration",
    "associate",
    "boxplot_summary",
    "build_tracks",
    "compare_to_truth",
    "estimate_homography",
    "extract_features",
    "filter_outliers",
    "histogram",
    "load_scene_config",
    "load_scene_spec",
    "minmax_normalize",
    "nearest_opposite_distance",
    "parse_detections",
    "parse_scene_config",
    "pearson_matrix",
    "pedestrian_contact_point",
    "project",
    "project_frame_seq",
    "resample",
    "serialize_detections",
    "simulate_scene",
    "speed",
    "summarize",
    "vehicle_contact_point",
]
