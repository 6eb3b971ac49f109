"""Camera and stereo-rig calibration from checkerboard corner observations.

The chain per camera: per-view homographies (normalized DLT), closed-form
intrinsics from the absolute-conic constraints, per-view pose
initialization from each homography, then joint damped-least-squares
refinement of intrinsics, distortion and all view poses against pixel
reprojection. Stereo: per-shared-view relative-pose candidates averaged,
then the single relative pose refined against the right-camera corners.

Skew is constrained to 0 unless explicitly released, which also allows
initialization from only two views.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics, distort_normalized
from .errors import (
    DegenerateConfigurationError,
    IllConditionedError,
    InvalidPoseError,
    NoSharedViewsError,
)
from .geometry import (
    RigidTransform,
    axis_angle_from_rotation,
    nearest_rotation,
    rotation_from_axis_angle,
)
from .grid import GridConfig
from .optimize import levenberg_marquardt

logger = logging.getLogger(__name__)

MIN_CORNERS_PER_VIEW = 4
CONDITION_LIMIT = 1e8

CAMERA_LEFT = "left"
CAMERA_RIGHT = "right"


@dataclass(frozen=True)
class CornerObservation:
    """One detected checkerboard corner: lattice index (i, j) seen at (u, v)."""

    view_id: str
    camera_id: str
    grid_index: tuple[int, int]
    pixel: tuple[float, float]


@dataclass(frozen=True)
class CalibrationResult:
    """RMS values are per residual coordinate: sqrt(cost / (2 * corners))."""

    intrinsics: CameraIntrinsics
    per_view_poses: dict[str, RigidTransform]
    rms_reprojection: float
    per_view_rms: dict[str, float]


@dataclass(frozen=True)
class StereoRig:
    """Two calibrated cameras plus the left-to-right relative pose.

    ``right_from_left`` maps left-camera coordinates into the right camera:
    X_right = R X_left + t. A usable rig has a nonzero baseline;
    triangulation rejects the degenerate zero-baseline case on its own.
    """

    left: CameraIntrinsics
    right: CameraIntrinsics
    right_from_left: RigidTransform

    @property
    def baseline(self) -> float:
        return float(np.linalg.norm(self.right_from_left.translation))


# --- homography ----------------------------------------------------------

def _normalize_points(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Isotropic normalization: centroid to origin, mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    d = np.linalg.norm(pts - centroid, axis=1).mean()
    if d < 1e-12:
        raise DegenerateConfigurationError("all points coincide")
    s = np.sqrt(2.0) / d
    T = np.array([[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]])
    npts = (pts - centroid) * s
    return npts, T


def estimate_homography(plane_pts, pixels) -> np.ndarray:
    """Homography mapping 2D plane points to pixels, by normalized DLT.

    Needs at least 4 correspondences in general position. Raises
    DegenerateConfigurationError for too few or (near-)collinear points.
    """
    P = np.asarray(plane_pts, dtype=float).reshape(-1, 2)
    Q = np.asarray(pixels, dtype=float).reshape(-1, 2)
    if P.shape != Q.shape:
        raise ValueError(f"point count mismatch: {P.shape} vs {Q.shape}")
    n = P.shape[0]
    if n < 4:
        raise DegenerateConfigurationError(f"homography needs >= 4 correspondences, got {n}")
    Pn, Tp = _normalize_points(P)
    Qn, Tq = _normalize_points(Q)

    A = np.zeros((2 * n, 9))
    X, Y = Pn[:, 0], Pn[:, 1]
    u, v = Qn[:, 0], Qn[:, 1]
    A[0::2, 0] = -X
    A[0::2, 1] = -Y
    A[0::2, 2] = -1.0
    A[0::2, 6] = u * X
    A[0::2, 7] = u * Y
    A[0::2, 8] = u
    A[1::2, 3] = -X
    A[1::2, 4] = -Y
    A[1::2, 5] = -1.0
    A[1::2, 6] = v * X
    A[1::2, 7] = v * Y
    A[1::2, 8] = v

    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    # a unique solution needs rank 8; s[7] ~ 0 means a degenerate layout
    if s[7] < 1e-8 * s[0]:
        raise DegenerateConfigurationError("correspondence layout is rank-deficient (collinear points?)")
    H = Vt[-1].reshape(3, 3)
    H = np.linalg.inv(Tq) @ H @ Tp
    if abs(H[2, 2]) > 1e-12:
        H = H / H[2, 2]
    return H


# --- closed-form intrinsics (absolute-conic constraints) -----------------

def _conic_row(H: np.ndarray, i: int, j: int) -> np.ndarray:
    h_i, h_j = H[:, i], H[:, j]
    return np.array(
        [
            h_i[0] * h_j[0],
            h_i[0] * h_j[1] + h_i[1] * h_j[0],
            h_i[1] * h_j[1],
            h_i[2] * h_j[0] + h_i[0] * h_j[2],
            h_i[2] * h_j[1] + h_i[1] * h_j[2],
            h_i[2] * h_j[2],
        ]
    )


def intrinsics_from_homographies(
    homographies,
    image_size: tuple[int, int],
    *,
    fix_skew: bool = True,
) -> CameraIntrinsics:
    """Closed-form pinhole parameters from plane-to-image homographies.

    Needs >= 3 views in distinct orientations, or >= 2 with skew fixed at
    zero. Distortion is initialized to zero. Raises IllConditionedError
    when the constraint system is too close to rank-deficient (parallel
    board orientations) to invert reliably.
    """
    hs = [np.asarray(H, dtype=float) for H in homographies]
    min_views = 2 if fix_skew else 3
    if len(hs) < min_views:
        raise IllConditionedError(
            f"need >= {min_views} views for intrinsics initialization, got {len(hs)}"
        )
    rows = []
    for H in hs:
        v12 = _conic_row(H, 0, 1)
        v11 = _conic_row(H, 0, 0)
        v22 = _conic_row(H, 1, 1)
        rows.append(v12)
        rows.append(v11 - v22)
    V = np.asarray(rows)
    if fix_skew:
        V = V[:, [0, 2, 3, 4, 5]]  # drop the B12 column

    _, s, Vt = np.linalg.svd(V, full_matrices=True)
    m = V.shape[1]
    if s[m - 2] <= 0 or s[0] / s[m - 2] > CONDITION_LIMIT:
        raise IllConditionedError(
            "board orientations are too similar: conic constraint system is rank-deficient"
        )
    b = Vt[-1]
    if fix_skew:
        B11, B22, B13, B23, B33 = b
        B12 = 0.0
    else:
        B11, B12, B22, B13, B23, B33 = b
    if B11 < 0:
        B11, B12, B22, B13, B23, B33 = -B11, -B12, -B22, -B13, -B23, -B33

    denom = B11 * B22 - B12 * B12
    if denom <= 0 or B11 <= 0:
        raise IllConditionedError("recovered conic is not positive definite")
    v0 = (B12 * B13 - B11 * B23) / denom
    lam = B33 - (B13 * B13 + v0 * (B12 * B13 - B11 * B23)) / B11
    if lam <= 0:
        raise IllConditionedError("recovered conic is not positive definite")
    fx = float(np.sqrt(lam / B11))
    fy = float(np.sqrt(lam * B11 / denom))
    skew = 0.0 if fix_skew else float(-B12 * fx * fx * fy / lam)
    u0 = float(skew * v0 / fy - B13 * fx * fx / lam)
    return CameraIntrinsics(
        fx=fx, fy=fy, cx=u0, cy=float(v0), skew=skew, dist=(0.0, 0.0, 0.0, 0.0, 0.0), image_size=tuple(image_size)
    )


def pose_from_homography(K, H) -> RigidTransform:
    """Board pose (board frame -> camera frame) from a plane homography.

    ``K`` may be a CameraIntrinsics or a raw 3x3 matrix. The scale is fixed
    by the first rotation column; sign is chosen so the board lies in front
    of the camera. Raises InvalidPoseError when t.z <= 0 survives the sign
    choice (degenerate homography, e.g. H proportional to K).
    """
    Kmat = K.matrix() if isinstance(K, CameraIntrinsics) else np.asarray(K, dtype=float)
    H = np.asarray(H, dtype=float)
    A = np.linalg.solve(Kmat, H)
    n1 = np.linalg.norm(A[:, 0])
    if n1 < 1e-12:
        raise InvalidPoseError("homography first column vanishes under K^-1")
    lam = 1.0 / n1
    if lam * A[2, 2] < 0:
        lam = -lam
    r1 = lam * A[:, 0]
    r2 = lam * A[:, 1]
    t = lam * A[:, 2]
    if t[2] <= 0:
        raise InvalidPoseError(f"recovered board pose has t.z = {t[2]:.3g} <= 0")
    R = nearest_rotation(np.column_stack([r1, r2, np.cross(r1, r2)]))
    return RigidTransform(R, t)


# --- joint refinement -----------------------------------------------------

def _intrinsics_vector(K: CameraIntrinsics, fix_skew: bool) -> np.ndarray:
    base = [K.fx, K.fy, K.cx, K.cy]
    if not fix_skew:
        base.append(K.skew)
    return np.array(base + list(K.dist))


def _intrinsics_from_vector(xi: np.ndarray, fix_skew: bool, image_size) -> CameraIntrinsics:
    if fix_skew:
        fx, fy, cx, cy = xi[:4]
        skew = 0.0
        dist = tuple(xi[4:9])
    else:
        fx, fy, cx, cy, skew = xi[:5]
        dist = tuple(xi[5:10])
    return CameraIntrinsics(
        fx=float(fx), fy=float(fy), cx=float(cx), cy=float(cy),
        skew=float(skew), dist=dist, image_size=tuple(image_size),
    )


def _n_intrinsic_params(fix_skew: bool) -> int:
    return 9 if fix_skew else 10


def _project_param(xi, fix_skew, rvecs, tvecs, view_idx, obj) -> np.ndarray:
    """Vectorized projection of board points under packed parameters."""
    if fix_skew:
        fx, fy, cx, cy = xi[:4]
        skew = 0.0
        dist = xi[4:9]
    else:
        fx, fy, cx, cy, skew = xi[:5]
        dist = xi[5:10]
    R = rotation_from_axis_angle(rvecs)
    Xc = np.einsum("nij,nj->ni", R[view_idx], obj) + tvecs[view_idx]
    z = np.maximum(Xc[:, 2], 1e-9)  # behind-camera excursions blow up the residual instead of raising
    xy = Xc[:, :2] / z[:, None]
    xd = distort_normalized(xy, dist)
    u = fx * xd[:, 0] + skew * xd[:, 1] + cx
    v = fy * xd[:, 1] + cy
    return np.stack([u, v], axis=1)


def _pose_plus(n_intr: int, n_views: int):
    """Additive update except rotations, which compose an increment on the left."""

    def plus(x: np.ndarray, dx: np.ndarray) -> np.ndarray:
        out = x + dx
        for v in range(n_views):
            o = n_intr + 6 * v
            db = dx[o:o + 3]
            if db[0] != 0.0 or db[1] != 0.0 or db[2] != 0.0:
                R = rotation_from_axis_angle(x[o:o + 3])
                out[o:o + 3] = axis_angle_from_rotation(rotation_from_axis_angle(db) @ R)
        return out

    return plus


def _observation_arrays(observations, grid: GridConfig, view_ids):
    """Per-observation view index / board point / pixel arrays."""
    order = {vid: k for k, vid in enumerate(view_ids)}
    s = grid.square_size
    view_idx, obj, pix = [], [], []
    for ob in observations:
        if ob.view_id not in order:
            continue
        i, j = ob.grid_index
        view_idx.append(order[ob.view_id])
        obj.append((s * i, s * j, 0.0))
        pix.append(ob.pixel)
    return (
        np.asarray(view_idx, dtype=int),
        np.asarray(obj, dtype=float),
        np.asarray(pix, dtype=float),
    )


def refine_calibration(
    observations,
    grid: GridConfig,
    init: CalibrationResult,
    *,
    fix_skew: bool = True,
) -> CalibrationResult:
    """Jointly refine intrinsics, distortion and all per-view poses.

    Minimizes the sum of squared pixel reprojection residuals with damped
    least squares; never returns a result worse than the initialization.
    Raises NoConvergenceError (carrying the best iterate) on divergence.
    """
    view_ids = sorted({ob.view_id for ob in observations})
    missing = [v for v in view_ids if v not in init.per_view_poses]
    if missing:
        raise ValueError(f"initialization lacks poses for views: {missing}")
    view_idx, obj, pix = _observation_arrays(observations, grid, view_ids)

    n_intr = _n_intrinsic_params(fix_skew)
    x0 = np.concatenate(
        [_intrinsics_vector(init.intrinsics, fix_skew)]
        + [
            np.concatenate([
                axis_angle_from_rotation(init.per_view_poses[v].rotation),
                init.per_view_poses[v].translation,
            ])
            for v in view_ids
        ]
    )

    def residual(x: np.ndarray) -> np.ndarray:
        xi = x[:n_intr]
        pose = x[n_intr:].reshape(-1, 6)
        uv = _project_param(xi, fix_skew, pose[:, :3], pose[:, 3:], view_idx, obj)
        return (uv - pix).ravel()

    result = levenberg_marquardt(residual, x0, plus=_pose_plus(n_intr, len(view_ids)))

    xi = result.x[:n_intr]
    pose = result.x[n_intr:].reshape(-1, 6)
    intr = _intrinsics_from_vector(xi, fix_skew, init.intrinsics.image_size)
    poses = {
        v: RigidTransform(rotation_from_axis_angle(pose[k, :3]), pose[k, 3:])
        for k, v in enumerate(view_ids)
    }
    res = residual(result.x).reshape(-1, 2)
    per_view_rms = {}
    for k, v in enumerate(view_ids):
        sel = view_idx == k
        per_view_rms[v] = float(np.sqrt(np.mean(res[sel] ** 2)))
    rms = float(np.sqrt(np.mean(res ** 2)))
    return CalibrationResult(intr, poses, rms, per_view_rms)


def calibrate_camera(
    observations,
    grid: GridConfig,
    image_size: tuple[int, int],
    *,
    fix_skew: bool = True,
) -> CalibrationResult:
    """Full single-camera chain: homographies -> closed-form K -> poses -> refinement.

    Views with fewer than 4 detected corners are dropped with a warning.
    """
    by_view: dict[str, list[CornerObservation]] = {}
    for ob in observations:
        if not grid.in_bounds(*ob.grid_index):
            raise ValueError(
                f"corner index {ob.grid_index} outside grid lattice "
                f"({grid.rows + 1}x{grid.cols + 1}) in view {ob.view_id!r}"
            )
        by_view.setdefault(ob.view_id, []).append(ob)

    usable = {}
    for vid in sorted(by_view):
        if len(by_view[vid]) < MIN_CORNERS_PER_VIEW:
            logger.warning("dropping view %r: only %d corners detected", vid, len(by_view[vid]))
            continue
        usable[vid] = by_view[vid]

    s = grid.square_size
    homographies = {}
    for vid, obs in usable.items():
        plane_pts = np.array([(s * ob.grid_index[0], s * ob.grid_index[1]) for ob in obs])
        pixels = np.array([ob.pixel for ob in obs])
        homographies[vid] = estimate_homography(plane_pts, pixels)

    K0 = intrinsics_from_homographies(
        [homographies[v] for v in sorted(homographies)], image_size, fix_skew=fix_skew
    )
    poses0 = {vid: pose_from_homography(K0, H) for vid, H in homographies.items()}

    flat_obs = [ob for vid in sorted(usable) for ob in usable[vid]]
    view_idx, obj, pix = _observation_arrays(flat_obs, grid, sorted(usable))
    xi0 = _intrinsics_vector(K0, fix_skew)
    rvecs0 = np.array([axis_angle_from_rotation(poses0[v].rotation) for v in sorted(usable)])
    tvecs0 = np.array([poses0[v].translation for v in sorted(usable)])
    res0 = _project_param(xi0, fix_skew, rvecs0, tvecs0, view_idx, obj) - pix
    rms0 = float(np.sqrt(np.mean(res0 ** 2)))
    init = CalibrationResult(K0, poses0, rms0, {})

    return refine_calibration(flat_obs, grid, init, fix_skew=fix_skew)


# --- stereo ---------------------------------------------------------------

def calibrate_stereo(
    left: CalibrationResult,
    right: CalibrationResult,
    observations,
    grid: GridConfig,
    shared_views=None,
) -> StereoRig:
    """Relative pose of the rig from views seen by both cameras.

    Per shared view the candidate is pose_right o pose_left^-1; candidates
    are averaged (chordal rotation mean, translation mean) and the single
    relative pose is then refined against the right-camera corners of all
    shared views, with the left poses held fixed.
    """
    if shared_views is None:
        shared_views = sorted(set(left.per_view_poses) & set(right.per_view_poses))
    else:
        shared_views = sorted(shared_views)
        for v in shared_views:
            if v not in left.per_view_poses or v not in right.per_view_poses:
                raise NoSharedViewsError(f"view {v!r} lacks a pose in one of the cameras")
    if not shared_views:
        raise NoSharedViewsError("no views were seen by both cameras")

    rotations = []
    translations = []
    for v in shared_views:
        T = right.per_view_poses[v].compose(left.per_view_poses[v].inverse())
        rotations.append(T.rotation)
        translations.append(T.translation)
    R0 = nearest_rotation(np.mean(rotations, axis=0))
    t0 = np.mean(translations, axis=0)

    right_obs = [
        ob for ob in observations
        if ob.camera_id == CAMERA_RIGHT and ob.view_id in set(shared_views)
    ]
    if not right_obs:
        return StereoRig(left.intrinsics, right.intrinsics, RigidTransform(R0, t0))

    view_idx, obj, pix = _observation_arrays(right_obs, grid, shared_views)
    left_R = np.array([left.per_view_poses[v].rotation for v in shared_views])
    left_t = np.array([left.per_view_poses[v].translation for v in shared_views])
    xi = _intrinsics_vector(right.intrinsics, fix_skew=False)

    def residual(x: np.ndarray) -> np.ndarray:
        R_rel = rotation_from_axis_angle(x[:3])
        t_rel = x[3:]
        # compose the candidate rig transform onto each fixed left pose
        rv = np.array([axis_angle_from_rotation(R_rel @ Rl) for Rl in left_R])
        tv = (left_t @ R_rel.T) + t_rel
        uv = _project_param(xi, False, rv, tv, view_idx, obj)
        return (uv - pix).ravel()

    x0 = np.concatenate([axis_angle_from_rotation(R0), t0])
    result = levenberg_marquardt(residual, x0, plus=_pose_plus(0, 1))
    rel = RigidTransform(rotation_from_axis_angle(result.x[:3]), result.x[3:])
    return StereoRig(left.intrinsics, right.intrinsics, rel)
