"""signpipe: sign-language pose-stream preprocessing, split tooling, and scoring.

The pipeline turns per-frame keypoint detections into fixed-width
landmark feature sequences stored as ``.slf`` files; the dataset helpers
generate and audit signer/sentence exposure splits; the metrics module
scores translation output.
"""

from .config import PipelineConfig, load_config
from .core import (
    FACE_SUBSET,
    FrameDetections,
    HandDetection,
    KeypointGroup,
    PersonDetection,
    SelectedKeypoints,
    Side,
    VideoClip,
    multi_person_filter,
    resolve_handedness,
    select_keypoints,
)
from .features import (
    FEATURE_DIM,
    FeatureSequence,
    FeatureVector,
    assemble,
    decimate,
    global_normalize,
    local_normalize,
)
from .geometry import (
    Box,
    CropSpec,
    SigningSpace,
    apply_crop,
    crop_spec,
    frame_signing_space,
    stabilize,
)
from .pipeline import ClipResult, extract_clip, extract_stream
from .slf import read_feature_file, read_features, write_feature_file, write_features
from .stream import parse_keypoint_stream, write_keypoint_stream

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ClipResult",
    "CropSpec",
    "FACE_SUBSET",
    "FEATURE_DIM",
    "FeatureSequence",
    "FeatureVector",
    "FrameDetections",
    "HandDetection",
    "KeypointGroup",
    "PersonDetection",
    "PipelineConfig",
    "SelectedKeypoints",
    "Side",
    "SigningSpace",
    "VideoClip",
    "apply_crop",
    "assemble",
    "crop_spec",
    "decimate",
    "extract_clip",
    "extract_stream",
    "frame_signing_space",
    "global_normalize",
    "load_config",
    "local_normalize",
    "multi_person_filter",
    "parse_keypoint_stream",
    "read_feature_file",
    "read_features",
    "resolve_handedness",
    "select_keypoints",
    "stabilize",
    "write_feature_file",
    "write_features",
    "write_keypoint_stream",
]
