"""Trajectory reconstruction from annotated traffic-accident footage.

Pipeline stages: perspective rectification of the road plane, pixel-to-meter
scaling via a geometric-progression ratio model, dash-cam stabilization by
frame registration, and kinematics estimation — driven by a JSON project
document of operator annotations, via either the batch CLI or the annotation
HTTP service.
"""

from .errors import (
    DegenerateCorrespondence,
    ParseError,
    PointAtInfinity,
    SchemaViolation,
    SingularSystem,
    TrajexError,
    TrajexIOError,
    WindingMismatch,
)
from .geometry import (
    AffineMap,
    Homography,
    Point2,
    QuadCorrespondence,
    affine_from_correspondences,
    compose,
    homography_from_correspondences,
    invert,
    map_point,
    map_points,
)
from .project import (
    FrameAnnotation,
    Project,
    ingest_frames,
    load_project,
    save_project,
    validate_annotations,
)
from .scaling import (
    PixelTrack,
    RatioMeasurement,
    RatioModel,
    Trajectory,
    fit_ratio_gradient,
    lateral_ratio,
    longitudinal_displacement,
    scale_lateral,
    scale_longitudinal,
)
from .stabilize import ReferenceTrack, register_to_target_frame, stabilize_track
from .trace import compute_trajectories, run_trace, trace_json_bytes
from .warp import Image, RectifySpec, rectification_from_lane_quad, rectify_image

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "DegenerateCorrespondence",
    "FrameAnnotation",
    "Homography",
    "Image",
    "ParseError",
    "PixelTrack",
    "Point2",
    "PointAtInfinity",
    "Project",
    "QuadCorrespondence",
    "RatioMeasurement",
    "RatioModel",
    "RectifySpec",
    "ReferenceTrack",
    "SchemaViolation",
    "SingularSystem",
    "Trajectory",
    "TrajexError",
    "TrajexIOError",
    "WindingMismatch",
    "affine_from_correspondences",
    "compose",
    "compute_trajectories",
    "fit_ratio_gradient",
    "homography_from_correspondences",
    "ingest_frames",
    "invert",
    "lateral_ratio",
    "load_project",
    "longitudinal_displacement",
    "map_point",
    "map_points",
    "rectification_from_lane_quad",
    "rectify_image",
    "register_to_target_frame",
    "run_trace",
    "save_project",
    "scale_lateral",
    "scale_longitudinal",
    "stabilize_track",
    "trace_json_bytes",
    "validate_annotations",
]
