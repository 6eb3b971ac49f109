"""From a network's yaw/pitch output to a point on the work surface.

Networks emit either absolute camera-frame angles or angles relative to
the ray from the face to the camera center ("camera offset": zero output
means the person is looking straight into the camera). For offset outputs
the head-to-camera yaw/pitch is added before the angles become a
direction, as additive angle correction. This mirrors the evaluated
pipeline exactly; the approximation degrades at large offsets, so offsets
beyond 30 degrees are logged.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError
from .geometry import (
    FRAME_CAMERA,
    GazeRay,
    dir_to_yaw_pitch,
    normalized,
    transform_ray,
    yaw_pitch_to_dir,
)
from .plane import PlanePose
from .triangulation import HeadPoint

logger = logging.getLogger(__name__)

CONVENTION_OFFSET = "camera_offset"
CONVENTION_ABSOLUTE = "absolute"
CONVENTIONS = (CONVENTION_OFFSET, CONVENTION_ABSOLUTE)

STATUS_OK = "ok"
STATUS_NO_INTERSECTION = "no_intersection"
STATUS_AWAY = "away_from_plane"

LARGE_OFFSET_RAD = math.radians(30.0)


@dataclass(frozen=True)
class GazePrediction:
    """One network output for one frame. Angles are radians."""

    frame_id: str
    method_id: str
    yaw: float
    pitch: float
    convention: str = CONVENTION_OFFSET

    def __post_init__(self):
        if not (math.isfinite(self.yaw) and math.isfinite(self.pitch)):
            raise ValueError(f"non-finite gaze angles in frame {self.frame_id!r}")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown prediction convention {self.convention!r}")


@dataclass(frozen=True)
class SurfaceGazeEstimate:
    """Where a gaze ray meets the work surface, or why it does not."""

    point: np.ndarray | None
    alpha: float | None
    direction_cc: np.ndarray
    status: str


def camera_offset_angles(head: HeadPoint) -> tuple[float, float]:
    """Yaw/pitch of the direction from the head to the camera center."""
    to_camera = normalized(-head.position)
    yp = dir_to_yaw_pitch(to_camera)
    return yp.yaw, yp.pitch


def correct_gaze_to_camera_frame(pred: GazePrediction, head: HeadPoint) -> np.ndarray:
    """Camera-frame gaze direction for a prediction.

    Offset-convention angles get the head-to-camera yaw/pitch added;
    absolute angles convert directly.
    """
    if head.position[2] <= 0:
        raise ValueError("head point must lie in front of the camera")
    if pred.convention == CONVENTION_ABSOLUTE:
        return yaw_pitch_to_dir(pred.yaw, pred.pitch)
    yaw_h, pitch_h = camera_offset_angles(head)
    if abs(yaw_h) > LARGE_OFFSET_RAD or abs(pitch_h) > LARGE_OFFSET_RAD:
        logger.warning(
            "head offset angles (%.1f, %.1f) deg exceed 30 deg; additive correction degrades",
            math.degrees(yaw_h),
            math.degrees(pitch_h),
        )
    return yaw_pitch_to_dir(pred.yaw + yaw_h, pred.pitch + pitch_h)


def gaze_point_on_surface(
    head: HeadPoint, direction_cc, plane: PlanePose
) -> SurfaceGazeEstimate:
    """Intersect a camera-frame gaze ray with the work surface.

    Failures are encoded in the status, never raised, so batch evaluation
    can keep going: ``no_intersection`` for rays parallel to the surface,
    ``away_from_plane`` when the ray leaves the surface behind (or the head
    is on the wrong side of it). Status ``ok`` means the workspace-frame
    direction points down onto the surface from above.
    """
    direction_cc = normalized(direction_cc)
    ray = GazeRay(head.position, direction_cc, FRAME_CAMERA)
    ray_pi = transform_ray(plane.transform, ray)
    oz = float(ray_pi.origin[2])
    dz = float(ray_pi.direction[2])
    if abs(dz) < 1e-12:
        return SurfaceGazeEstimate(None, None, direction_cc, STATUS_NO_INTERSECTION)
    if dz > 0 or oz <= 0:
        return SurfaceGazeEstimate(None, None, direction_cc, STATUS_AWAY)
    alpha = -oz / dz
    point = ray_pi.origin + alpha * ray_pi.direction
    return SurfaceGazeEstimate(point, alpha, direction_cc, STATUS_OK)


def ground_truth_direction(head: HeadPoint, plane: PlanePose, target) -> np.ndarray:
    """Unit camera-frame direction from the head to an on-surface target."""
    target = np.asarray(target, dtype=float).reshape(3)
    target_cc = plane.transform.inverse().apply_point(target)
    delta = target_cc - head.position
    if np.linalg.norm(delta) < 1e-9:
        raise DegenerateGeometryError("head position coincides with the target")
    return delta / np.linalg.norm(delta)
