"""Shared geometric substrate: rotations, rigid transforms, gaze angles, rays.

Conventions used throughout the package:

* Camera frame: +X right, +Y down, +Z forward along the optical axis.
  A person looking straight into the camera has gaze direction (0, 0, -1).
* Workspace frame: the work surface is the plane Z = 0, +Z points up
  toward the heads of the people using it.
* Yaw/pitch: (0, 0) is gaze straight at the camera. Positive yaw swings
  the gaze toward camera -X, positive pitch tilts it up (camera -Y):

      d = (-cos(pitch) sin(yaw), -sin(pitch), -cos(pitch) cos(yaw))

* Angles are radians internally; degrees appear only in reported metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateGeometryError,
    FrameMismatchError,
    GazeAwayFromPlaneError,
    NoIntersectionError,
)

FRAME_CAMERA = "camera"
FRAME_PLANE = "plane"

ROTATION_TOL = 1e-9


def as_vec3(v) -> np.ndarray:
    """Coerce to a float (..., 3) array, rejecting non-finite values."""
    a = np.asarray(v, dtype=float)
    if a.shape[-1] != 3:
        raise ValueError(f"expected 3-vector(s), got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite components")
    return a


def normalized(v) -> np.ndarray:
    """Unit vector along ``v``. Raises on (near-)zero input."""
    a = as_vec3(v)
    n = np.linalg.norm(a, axis=-1, keepdims=True)
    if np.any(n < 1e-12):
        raise DegenerateGeometryError("cannot normalize a zero-length vector")
    return a / n


class YawPitch(NamedTuple):
    """Gaze angles in radians. (0, 0) points straight at the camera."""

    yaw: float
    pitch: float


def yaw_pitch_to_dir(yaw, pitch) -> np.ndarray:
    """Gaze direction for yaw/pitch in radians.

    Accepts scalars or broadcastable arrays; returns shape (..., 3).
    Total function: any finite angles give a unit vector.
    """
    yaw = np.asarray(yaw, dtype=float)
    pitch = np.asarray(pitch, dtype=float)
    cp = np.cos(pitch)
    return np.stack(
        [-cp * np.sin(yaw), -np.sin(pitch), -cp * np.cos(yaw)],
        axis=-1,
    )


def directions_to_yaw_pitch(dirs) -> np.ndarray:
    """Canonical (yaw, pitch) in radians for unit direction(s), shape (..., 2).

    yaw in (-pi, pi], pitch in [-pi/2, pi/2]. Directions within 1e-12 of the
    pitch poles get yaw = 0.
    """
    d = as_vec3(dirs)
    dx, dy, dz = d[..., 0], d[..., 1], d[..., 2]
    pitch = np.arcsin(np.clip(-dy, -1.0, 1.0))
    gimbal = np.hypot(dx, dz) < 1e-12
    yaw = np.where(gimbal, 0.0, np.arctan2(-dx, -dz))
    return np.stack([yaw, pitch], axis=-1)


def dir_to_yaw_pitch(d) -> YawPitch:
    """Canonical yaw/pitch of a single unit direction."""
    yp = directions_to_yaw_pitch(d)
    return YawPitch(float(yp[..., 0]), float(yp[..., 1]))


def angular_error_deg(d_est, d_gt) -> float:
    """Angle between two unit directions, in degrees, in [0, 180]."""
    a = as_vec3(d_est)
    b = as_vec3(d_gt)
    dot = float(np.clip(np.dot(a, b), -1.0, 1.0))
    return math.degrees(math.acos(dot))


# --- rotations ----------------------------------------------------------

def require_rotation(R: np.ndarray, tol: float = ROTATION_TOL) -> np.ndarray:
    """Validate a 3x3 proper rotation (orthonormal, det +1) within ``tol``."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {R.shape}")
    if not np.all(np.isfinite(R)):
        raise ValueError("rotation has non-finite entries")
    err = np.abs(R.T @ R - np.eye(3)).max()
    if err > tol:
        raise ValueError(f"matrix is not orthonormal (|R'R - I| = {err:.3g})")
    det = np.linalg.det(R)
    if abs(det - 1.0) > tol:
        raise ValueError(f"matrix is not a proper rotation (det = {det:.12g})")
    return R


def nearest_rotation(M: np.ndarray) -> np.ndarray:
    """Closest rotation to ``M`` in Frobenius norm (SVD projection)."""
    U, _, Vt = np.linalg.svd(np.asarray(M, dtype=float))
    R = U @ Vt
    if np.linalg.det(R) < 0:
        U = U.copy()
        U[:, -1] *= -1
        R = U @ Vt
    return R


def rotation_from_axis_angle(rvec) -> np.ndarray:
    """Rodrigues map. ``rvec`` may be (3,) or (N, 3); result (3,3) or (N,3,3).

    Uses series expansions of sin(t)/t and (1-cos t)/t^2 below 1e-8 so the
    map is smooth through zero (needed for finite-difference Jacobians).
    """
    r = np.asarray(rvec, dtype=float)
    single = r.ndim == 1
    r = np.atleast_2d(r)
    theta = np.linalg.norm(r, axis=1)
    t2 = theta * theta
    small = theta < 1e-8
    a = np.where(small, 1.0 - t2 / 6.0, np.sin(theta) / np.where(small, 1.0, theta))
    b = np.where(small, 0.5 - t2 / 24.0, (1.0 - np.cos(theta)) / np.where(small, 1.0, t2))
    zeros = np.zeros_like(theta)
    K = np.stack(
        [
            np.stack([zeros, -r[:, 2], r[:, 1]], axis=1),
            np.stack([r[:, 2], zeros, -r[:, 0]], axis=1),
            np.stack([-r[:, 1], r[:, 0], zeros], axis=1),
        ],
        axis=1,
    )
    R = np.eye(3)[None] + a[:, None, None] * K + b[:, None, None] * (K @ K)
    return R[0] if single else R


def axis_angle_from_rotation(R: np.ndarray) -> np.ndarray:
    """Inverse Rodrigues map; rvec with norm in [0, pi]."""
    R = np.asarray(R, dtype=float)
    cos_t = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    theta = math.acos(cos_t)
    vee = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if theta < 1e-8:
        return vee
    if math.pi - theta < 1e-6:
        # near pi the skew part vanishes; recover axis from R + I
        A = (R + np.eye(3)) / 2.0
        axis = np.sqrt(np.clip(np.diag(A), 0.0, None))
        k = int(np.argmax(axis))
        if axis[k] > 0:
            axis = A[:, k] / axis[k]
            axis /= np.linalg.norm(axis)
        if np.dot(axis, vee) < 0:
            axis = -axis
        return theta * axis
    return theta / math.sin(theta) * vee


@dataclass(frozen=True)
class RigidTransform:
    """Rigid motion x -> R x + t, optionally labeled with frame names.

    When ``src_frame``/``dst_frame`` are set, ``transform_ray`` checks and
    rewrites the ray's frame label; unlabeled transforms skip the check.
    """

    rotation: np.ndarray
    translation: np.ndarray
    src_frame: str | None = None
    dst_frame: str | None = None

    def __post_init__(self):
        R = require_rotation(self.rotation).copy()
        t = as_vec3(self.translation).reshape(3).copy()
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls, src_frame: str | None = None, dst_frame: str | None = None) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3), src_frame, dst_frame)

    def apply_point(self, p) -> np.ndarray:
        p = as_vec3(p)
        return p @ self.rotation.T + self.translation

    def apply_direction(self, d) -> np.ndarray:
        return as_vec3(d) @ self.rotation.T

    def compose(self, inner: "RigidTransform") -> "RigidTransform":
        """Transform equivalent to applying ``inner`` first, then ``self``."""
        if self.src_frame is not None and inner.dst_frame is not None:
            if self.src_frame != inner.dst_frame:
                raise FrameMismatchError(
                    f"cannot compose: inner maps to {inner.dst_frame!r}, outer expects {self.src_frame!r}"
                )
        return RigidTransform(
            self.rotation @ inner.rotation,
            self.rotation @ inner.translation + self.translation,
            inner.src_frame,
            self.dst_frame,
        )

    __matmul__ = compose

    def inverse(self) -> "RigidTransform":
        return RigidTransform(
            self.rotation.T,
            -(self.rotation.T @ self.translation),
            self.dst_frame,
            self.src_frame,
        )


@dataclass(frozen=True)
class GazeRay:
    """Half-line {origin + a * direction, a >= 0} in a named frame."""

    origin: np.ndarray
    direction: np.ndarray
    frame: str = FRAME_CAMERA

    def __post_init__(self):
        o = as_vec3(self.origin).reshape(3).copy()
        d = as_vec3(self.direction).reshape(3)
        n = np.linalg.norm(d)
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"ray direction must be unit length, |d| = {n:.9g}")
        d = (d / n).copy()
        o.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)
        if not self.frame:
            raise ValueError("ray frame label must be set")


def transform_ray(T: RigidTransform, ray: GazeRay) -> GazeRay:
    """Re-express a ray through a rigid transform; direction stays unit.

    Raises FrameMismatchError when the transform is labeled and the ray is
    not expressed in its source frame.
    """
    if T.src_frame is not None and ray.frame != T.src_frame:
        raise FrameMismatchError(
            f"ray is in frame {ray.frame!r}, transform expects {T.src_frame!r}"
        )
    d = T.apply_direction(ray.direction)
    d = d / np.linalg.norm(d)
    return GazeRay(
        T.apply_point(ray.origin),
        d,
        T.dst_frame if T.dst_frame is not None else ray.frame,
    )


def intersect_ray_plane_z0(ray: GazeRay) -> tuple[np.ndarray, float]:
    """Intersect a plane-frame ray with the workspace plane Z = 0.

    Returns (point, alpha) with point = origin + alpha * direction and
    alpha > 0. Raises NoIntersectionError for rays parallel to the plane
    and GazeAwayFromPlaneError when the crossing lies behind the origin.
    """
    if ray.frame != FRAME_PLANE:
        raise FrameMismatchError(f"ray must be in the plane frame, got {ray.frame!r}")
    dz = float(ray.direction[2])
    if abs(dz) < 1e-12:
        raise NoIntersectionError("ray is parallel to the workspace plane")
    alpha = -float(ray.origin[2]) / dz
    if alpha <= 0:
        raise GazeAwayFromPlaneError("ray points away from the workspace plane")
    return ray.origin + alpha * ray.direction, alpha
