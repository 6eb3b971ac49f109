"""Pinhole camera with 5-coefficient radial-tangential distortion.

The distortion model, applied to normalized coordinates (x, y) = (X/Z, Y/Z):

    r2 = x^2 + y^2
    radial = 1 + k1 r2 + k2 r2^2 + k3 r2^3
    xd = x * radial + 2 p1 x y + p2 (r2 + 2 x^2)
    yd = y * radial + p1 (r2 + 2 y^2) + 2 p2 x y
    u = fx xd + skew yd + cx
    v = fy yd + cy

Point-level only: the pipeline never remaps whole images.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BehindCameraError, NotInvertibleError
from .geometry import RigidTransform, as_vec3

UNDISTORT_TOL = 1e-10
UNDISTORT_MAX_ITER = 50


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole parameters in pixels plus distortion coefficients.

    ``dist`` is (k1, k2, p1, p2, k3); ``image_size`` is (width, height).
    """

    fx: float
    fy: float
    cx: float
    cy: float
    skew: float = 0.0
    dist: tuple[float, float, float, float, float] = (0.0, 0.0, 0.0, 0.0, 0.0)
    image_size: tuple[int, int] = (1280, 720)

    def __post_init__(self):
        w, h = self.image_size
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not (0 <= self.cx < w and 0 <= self.cy < h):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside image {w}x{h}"
            )
        if len(self.dist) != 5:
            raise ValueError("dist must hold exactly (k1, k2, p1, p2, k3)")
        object.__setattr__(self, "dist", tuple(float(d) for d in self.dist))

    def matrix(self) -> np.ndarray:
        """3x3 calibration matrix K."""
        return np.array(
            [
                [self.fx, self.skew, self.cx],
                [0.0, self.fy, self.cy],
                [0.0, 0.0, 1.0],
            ]
        )


def distort_normalized(xy: np.ndarray, dist) -> np.ndarray:
    """Apply the distortion model to normalized coordinates, shape (..., 2)."""
    k1, k2, p1, p2, k3 = dist
    x, y = xy[..., 0], xy[..., 1]
    r2 = x * x + y * y
    radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3))
    xd = x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x)
    yd = y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y
    return np.stack([xd, yd], axis=-1)


def project_points(K: CameraIntrinsics, pose: RigidTransform, X) -> np.ndarray:
    """Project camera- or world-frame points through ``pose`` into pixels.

    ``X`` has shape (..., 3); result has shape (..., 2). Raises
    BehindCameraError if any point lands at z <= 1e-9 after the pose.
    """
    Xc = pose.apply_point(as_vec3(X))
    z = Xc[..., 2]
    if np.any(z <= 1e-9):
        raise BehindCameraError("point behind camera (z <= 0 after pose transform)")
    xy = Xc[..., :2] / z[..., None]
    xd = distort_normalized(xy, K.dist)
    u = K.fx * xd[..., 0] + K.skew * xd[..., 1] + K.cx
    v = K.fy * xd[..., 1] + K.cy
    return np.stack([u, v], axis=-1)


def project_point(K: CameraIntrinsics, pose: RigidTransform, X) -> tuple[float, float]:
    """Single-point convenience wrapper around :func:`project_points`."""
    uv = project_points(K, pose, np.asarray(X, dtype=float).reshape(3))
    return float(uv[0]), float(uv[1])


def undistort_pixels(K: CameraIntrinsics, pixels) -> np.ndarray:
    """Invert distortion for pixels, returning normalized coordinates (..., 2).

    Fixed-point iteration on the distorted normalized coordinates,
    tolerance 1e-10, at most 50 iterations. Raises NotInvertibleError when
    the iteration fails to settle (pathological distortion or far outside
    the calibrated field of view).
    """
    px = np.asarray(pixels, dtype=float)
    if px.shape[-1] != 2:
        raise ValueError(f"expected pixel array with last axis 2, got {px.shape}")
    yd = (px[..., 1] - K.cy) / K.fy
    xd = (px[..., 0] - K.cx - K.skew * yd) / K.fx
    k1, k2, p1, p2, k3 = K.dist
    x, y = xd.copy(), yd.copy()
    for _ in range(UNDISTORT_MAX_ITER):
        r2 = x * x + y * y
        radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3))
        dx = 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x)
        dy = p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y
        x_new = (xd - dx) / radial
        y_new = (yd - dy) / radial
        step = max(np.abs(x_new - x).max(initial=0.0), np.abs(y_new - y).max(initial=0.0))
        x, y = x_new, y_new
        if step < UNDISTORT_TOL:
            return np.stack([x, y], axis=-1)
    raise NotInvertibleError(
        f"distortion inversion did not converge within {UNDISTORT_MAX_ITER} iterations"
    )


def undistort_pixel(K: CameraIntrinsics, pixel) -> tuple[float, float]:
    """Single-pixel convenience wrapper around :func:`undistort_pixels`."""
    xy = undistort_pixels(K, np.asarray(pixel, dtype=float).reshape(2))
    return float(xy[0]), float(xy[1])
