"""Stereo gaze geometry on a shared planar workspace.

Calibrate a two-camera rig from checkerboard corners, locate the work
surface, triangulate 3D head points, map network gaze predictions onto the
surface, and score them with angular and on-surface distance metrics. A
built-in synthetic scene generator provides exact ground truth for all of
it.
"""

__version__ = "0.1.0"

from .calibration import (
    CalibrationResult,
    CornerObservation,
    StereoRig,
    calibrate_camera,
    calibrate_stereo,
    estimate_homography,
    intrinsics_from_homographies,
    pose_from_homography,
    refine_calibration,
)
from .camera import (
    CameraIntrinsics,
    project_point,
    project_points,
    undistort_pixel,
    undistort_pixels,
)
from .geometry import (
    FRAME_CAMERA,
    FRAME_PLANE,
    GazeRay,
    RigidTransform,
    YawPitch,
    angular_error_deg,
    dir_to_yaw_pitch,
    intersect_ray_plane_z0,
    transform_ray,
    yaw_pitch_to_dir,
)
from .grid import GridConfig, default_target_map, grid_points, target_center
from .metrics import (
    EvalRecord,
    Histogram2D,
    MetricsSummary,
    error_cdf,
    evaluate_frame,
    summarize,
    yaw_pitch_histogram,
)
from .pipeline import (
    GazePrediction,
    SurfaceGazeEstimate,
    correct_gaze_to_camera_frame,
    gaze_point_on_surface,
    ground_truth_direction,
)
from .plane import PlanePose, estimate_plane_pose
from .synthetic import (
    AmplificationRow,
    MethodSpec,
    NoiseSpec,
    SceneSpec,
    SyntheticDataset,
    amplification_study,
    default_scene,
    generate_scene,
    perturb,
)
from .triangulation import (
    FaceObservation,
    HeadPoint,
    head_point,
    pixel_ray,
    triangulate_midpoint,
)

__all__ = [name for name in dir() if not name.startswith("_")]
