"""Head-point reconstruction from paired face observations.

The 3D head point lives in the left-camera frame. Triangulation takes the
midpoint of the shortest segment between the two back-projected rays; the
segment length is kept as ``ray_gap``, a direct diagnostic of how
consistent the two observations are.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .calibration import StereoRig
from .camera import CameraIntrinsics, undistort_pixel
from .errors import BehindCameraError, MissingObservationError, ParallelRaysError
from .geometry import FRAME_CAMERA, GazeRay

logger = logging.getLogger(__name__)

SOURCE_BBOX = "bbox_center"
SOURCE_EYES = "eye_midpoint"

RAY_GAP_WARN_M = 0.03


@dataclass(frozen=True)
class FaceObservation:
    """Detection output for one camera in one frame.

    At least one of ``bbox`` (u_min, v_min, u_max, v_max) and
    ``eye_midpoint`` (u, v) must be present.
    """

    frame_id: str
    camera_id: str
    bbox: tuple[float, float, float, float] | None = None
    eye_midpoint: tuple[float, float] | None = None

    def __post_init__(self):
        if self.bbox is None and self.eye_midpoint is None:
            raise ValueError("face observation needs a bbox or an eye midpoint")
        if self.bbox is not None:
            u0, v0, u1, v1 = self.bbox
            if not (u0 <= u1 and v0 <= v1):
                raise ValueError(f"bbox is not well-ordered: {self.bbox}")

    def point(self, source: str) -> tuple[float, float] | None:
        if source == SOURCE_EYES:
            return self.eye_midpoint
        if source == SOURCE_BBOX:
            if self.bbox is None:
                return None
            u0, v0, u1, v1 = self.bbox
            return ((u0 + u1) / 2.0, (v0 + v1) / 2.0)
        raise ValueError(f"unknown head-point source {source!r}")


@dataclass(frozen=True)
class HeadPoint:
    """Triangulated head position in the left-camera frame."""

    position: np.ndarray
    ray_gap: float
    source: str

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float).reshape(3).copy()
        p.setflags(write=False)
        object.__setattr__(self, "position", p)


def pixel_ray(K: CameraIntrinsics, pixel) -> GazeRay:
    """Back-project a pixel to a camera-frame ray from the camera center."""
    x, y = undistort_pixel(K, pixel)
    d = np.array([x, y, 1.0])
    return GazeRay(np.zeros(3), d / np.linalg.norm(d), FRAME_CAMERA)


def triangulate_midpoint(rig: StereoRig, pixel_left, pixel_right) -> HeadPoint:
    """Closest-point midpoint between the two back-projected rays.

    The result is expressed in the left-camera frame. Raises
    ParallelRaysError for (near-)parallel rays and BehindCameraError when
    the midpoint falls behind either camera.
    """
    ray_l = pixel_ray(rig.left, pixel_left)
    ray_r = pixel_ray(rig.right, pixel_right)

    T = rig.right_from_left
    o2 = -(T.rotation.T @ T.translation)  # right camera center in the left frame
    d2 = T.rotation.T @ ray_r.direction
    o1 = ray_l.origin
    d1 = ray_l.direction

    w0 = o1 - o2
    b = float(d1 @ d2)
    d = float(d1 @ w0)
    e = float(d2 @ w0)
    denom = 1.0 - b * b
    if denom < 1e-12:
        raise ParallelRaysError("triangulation rays are parallel (zero baseline or identical pixels)")
    s = (b * e - d) / denom
    t = (e - b * d) / denom
    p1 = o1 + s * d1
    p2 = o2 + t * d2
    mid = (p1 + p2) / 2.0
    gap = float(np.linalg.norm(p1 - p2))

    z_right = float(T.rotation[2] @ mid + T.translation[2])
    if mid[2] <= 0 or z_right <= 0:
        raise BehindCameraError("triangulated point lies behind a camera")
    if gap > RAY_GAP_WARN_M:
        logger.warning("triangulation ray gap %.3f m exceeds %.2f m", gap, RAY_GAP_WARN_M)
    return HeadPoint(mid, gap, source="pixel")


def head_point(
    left_obs: FaceObservation,
    right_obs: FaceObservation,
    rig: StereoRig,
    source_preference: str = SOURCE_EYES,
) -> HeadPoint:
    """Triangulate the head from a pair of face observations.

    Uses the preferred source when both cameras provide it, otherwise falls
    back to bounding-box centers. The source actually used is recorded on
    the result.
    """
    if left_obs is None or right_obs is None:
        raise MissingObservationError("face observation missing in one camera")
    if left_obs.frame_id != right_obs.frame_id:
        raise ValueError(
            f"frame mismatch: {left_obs.frame_id!r} vs {right_obs.frame_id!r}"
        )

    for source in (source_preference, SOURCE_BBOX, SOURCE_EYES):
        pl = left_obs.point(source)
        pr = right_obs.point(source)
        if pl is not None and pr is not None:
            hp = triangulate_midpoint(rig, pl, pr)
            return HeadPoint(hp.position, hp.ray_gap, source)
    raise MissingObservationError(
        f"no head-point source available in both cameras for frame {left_obs.frame_id!r}"
    )
