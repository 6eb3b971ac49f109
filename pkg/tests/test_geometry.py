import math

import numpy as np
import pytest

from planegaze.errors import (
    FrameMismatchError,
    GazeAwayFromPlaneError,
    NoIntersectionError,
)
from planegaze.geometry import (
    FRAME_CAMERA,
    FRAME_PLANE,
    GazeRay,
    RigidTransform,
    angular_error_deg,
    axis_angle_from_rotation,
    dir_to_yaw_pitch,
    directions_to_yaw_pitch,
    intersect_ray_plane_z0,
    rotation_from_axis_angle,
    transform_ray,
    yaw_pitch_to_dir,
)

from conftest import random_rotation, random_unit_vectors


class TestYawPitch:
    def test_zero_angles_point_at_camera(self):
        np.testing.assert_allclose(yaw_pitch_to_dir(0.0, 0.0), [0, 0, -1], atol=1e-15)

    def test_pure_yaw(self):
        np.testing.assert_allclose(yaw_pitch_to_dir(math.pi / 2, 0.0), [-1, 0, 0], atol=1e-15)

    def test_pure_pitch_up_in_y_down_frame(self):
        np.testing.assert_allclose(yaw_pitch_to_dir(0.0, math.pi / 2), [0, -1, 0], atol=1e-15)

    def test_inverse_trivial_cases(self):
        assert dir_to_yaw_pitch(np.array([0, 0, -1.0])) == pytest.approx((0.0, 0.0))
        yaw, pitch = dir_to_yaw_pitch(np.array([-1.0, 0, 0]))
        assert yaw == pytest.approx(math.pi / 2)
        assert pitch == pytest.approx(0.0)

    def test_gimbal_pole_gets_zero_yaw(self):
        yaw, pitch = dir_to_yaw_pitch(np.array([0, -1.0, 0]))
        assert yaw == 0.0
        assert pitch == pytest.approx(math.pi / 2)

    def test_round_trip_1000_random_unit_vectors(self):
        rng = np.random.default_rng(42)
        dirs = random_unit_vectors(rng, 1000)
        yp = directions_to_yaw_pitch(dirs)
        back = yaw_pitch_to_dir(yp[:, 0], yp[:, 1])
        assert np.abs(back - dirs).max() < 1e-9

    def test_canonical_ranges(self):
        rng = np.random.default_rng(7)
        yp = directions_to_yaw_pitch(random_unit_vectors(rng, 500))
        assert np.all(yp[:, 0] > -math.pi) and np.all(yp[:, 0] <= math.pi)
        assert np.all(np.abs(yp[:, 1]) <= math.pi / 2)


class TestAngularError:
    def test_identical_directions(self):
        assert angular_error_deg([0, 0, -1], [0, 0, -1]) == 0.0

    def test_ten_degrees(self):
        d = [0, -math.sin(math.radians(10)), -math.cos(math.radians(10))]
        assert angular_error_deg([0, 0, -1], d) == pytest.approx(10.0, abs=1e-9)

    def test_opposite_directions(self):
        assert angular_error_deg([0, 0, -1], [0, 0, 1]) == pytest.approx(180.0)

    def test_symmetric_nonnegative_and_rotation_invariant(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a, b = random_unit_vectors(rng, 2)
            e = angular_error_deg(a, b)
            assert e >= 0.0
            assert e == pytest.approx(angular_error_deg(b, a), abs=1e-12)
            R = random_rotation(rng)
            assert angular_error_deg(R @ a, R @ b) == pytest.approx(e, abs=1e-7)

    def test_zero_iff_equal(self):
        rng = np.random.default_rng(8)
        a, b = random_unit_vectors(rng, 2)
        # arccos near 1 amplifies float noise to ~sqrt(eps) radians
        assert angular_error_deg(a, a) == pytest.approx(0.0, abs=5e-6)
        assert angular_error_deg(a, b) > 1e-3


class TestRigidTransform:
    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            RigidTransform(np.eye(3) * 1.1, np.zeros(3))

    def test_rejects_reflection(self):
        R = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ValueError):
            RigidTransform(R, np.zeros(3))

    def test_compose_and_inverse(self):
        rng = np.random.default_rng(11)
        T1 = RigidTransform(random_rotation(rng), rng.normal(size=3))
        T2 = RigidTransform(random_rotation(rng), rng.normal(size=3))
        p = rng.normal(size=3)
        np.testing.assert_allclose(
            (T2 @ T1).apply_point(p), T2.apply_point(T1.apply_point(p)), atol=1e-12
        )
        roundtrip = T1.inverse().apply_point(T1.apply_point(p))
        np.testing.assert_allclose(roundtrip, p, atol=1e-12)

    def test_axis_angle_round_trip(self):
        rng = np.random.default_rng(5)
        for theta in [1e-12, 1e-9, 0.3, 1.5, math.pi - 1e-4]:
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            rvec = axis * theta
            R = rotation_from_axis_angle(rvec)
            back = axis_angle_from_rotation(R)
            np.testing.assert_allclose(back, rvec, atol=1e-7)


class TestTransformRay:
    def test_identity_leaves_ray_unchanged(self):
        ray = GazeRay([0.1, 0.2, 0.3], [0, 0, -1.0], FRAME_CAMERA)
        out = transform_ray(RigidTransform.identity(), ray)
        np.testing.assert_allclose(out.origin, ray.origin)
        np.testing.assert_allclose(out.direction, ray.direction)
        assert out.frame == FRAME_CAMERA

    def test_translation_moves_origin_only(self):
        T = RigidTransform(np.eye(3), [1.0, 0, 0])
        out = transform_ray(T, GazeRay([0, 0, 0], [0, 0, 1.0]))
        np.testing.assert_allclose(out.origin, [1, 0, 0])
        np.testing.assert_allclose(out.direction, [0, 0, 1])

    def test_rotation_about_z(self):
        Rz = rotation_from_axis_angle([0, 0, math.pi / 2])
        out = transform_ray(RigidTransform(Rz, np.zeros(3)), GazeRay([0, 0, 0], [1.0, 0, 0]))
        np.testing.assert_allclose(out.direction, [0, 1, 0], atol=1e-15)

    def test_frame_mismatch_raises(self):
        T = RigidTransform(np.eye(3), np.zeros(3), FRAME_PLANE, FRAME_CAMERA)
        with pytest.raises(FrameMismatchError):
            transform_ray(T, GazeRay([0, 0, 0], [0, 0, 1.0], FRAME_CAMERA))

    def test_frame_label_updated(self):
        T = RigidTransform(np.eye(3), np.zeros(3), FRAME_CAMERA, FRAME_PLANE)
        out = transform_ray(T, GazeRay([0, 0, 0], [0, 0, 1.0], FRAME_CAMERA))
        assert out.frame == FRAME_PLANE

    def test_direction_stays_unit_and_composes(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            T1 = RigidTransform(random_rotation(rng), rng.normal(size=3))
            T2 = RigidTransform(random_rotation(rng), rng.normal(size=3))
            ray = GazeRay(rng.normal(size=3), random_unit_vectors(rng, 1)[0])
            once = transform_ray(T2, transform_ray(T1, ray))
            combined = transform_ray(T2 @ T1, ray)
            assert abs(np.linalg.norm(once.direction) - 1.0) < 1e-12
            np.testing.assert_allclose(once.origin, combined.origin, atol=1e-12)
            np.testing.assert_allclose(once.direction, combined.direction, atol=1e-12)


class TestRayPlaneIntersection:
    def test_straight_down(self):
        ray = GazeRay([0, 0, 1.0], [0, 0, -1.0], FRAME_PLANE)
        point, alpha = intersect_ray_plane_z0(ray)
        np.testing.assert_allclose(point, [0, 0, 0], atol=1e-15)
        assert alpha == pytest.approx(1.0)

    def test_closed_form_example(self):
        ray = GazeRay([0.1, 0.2, 0.5], [0, 0.6, -0.8], FRAME_PLANE)
        point, alpha = intersect_ray_plane_z0(ray)
        assert alpha == pytest.approx(0.625, abs=1e-15)
        np.testing.assert_allclose(point, [0.1, 0.575, 0.0], atol=1e-15)

    def test_parallel_ray(self):
        with pytest.raises(NoIntersectionError):
            intersect_ray_plane_z0(GazeRay([0, 0, 1.0], [0, 1.0, 0], FRAME_PLANE))

    def test_away_from_plane(self):
        with pytest.raises(GazeAwayFromPlaneError):
            intersect_ray_plane_z0(GazeRay([0, 0, 1.0], [0, 0, 1.0], FRAME_PLANE))

    def test_camera_frame_ray_rejected(self):
        with pytest.raises(FrameMismatchError):
            intersect_ray_plane_z0(GazeRay([0, 0, 1.0], [0, 0, -1.0], FRAME_CAMERA))

    def test_point_on_ray_componentwise(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            origin = rng.uniform([-1, -1, 0.05], [1, 1, 2])
            d = random_unit_vectors(rng, 1)[0]
            if d[2] > -0.05:
                d = d * np.array([1, 1, -1.0])
                if abs(d[2]) < 0.05:
                    continue
                d /= np.linalg.norm(d)
            ray = GazeRay(origin, d, FRAME_PLANE)
            point, alpha = intersect_ray_plane_z0(ray)
            np.testing.assert_allclose(point, origin + alpha * d, atol=1e-12)
            assert abs(point[2]) < 1e-12
