import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cafebot.geometry import (
    CameraExtrinsics,
    CameraIntrinsics,
    InvalidObservationError,
    PixelObservation,
    RobotPose,
    agent_to_world,
    camera_to_agent,
    euler_to_rotation,
    pixel_to_camera,
    pixel_to_world,
    pixel_to_world_fused,
    rot_x,
    rot_y,
    rot_z,
    world_to_agent,
    world_to_pixel,
    wrap_angle,
)
from cafebot.simworld.robot import default_mounts, mount_extrinsics

from oracles import ref_pixel_to_world, ref_world_to_pixel

angles = st.floats(-math.pi, math.pi, allow_nan=False)


@pytest.fixture
def intr():
    return CameraIntrinsics.from_fov(128, 96, 70.0)


class TestIntrinsics:
    def test_from_fov_principal_point_on_pixel_grid(self, intr):
        assert intr.cx == 63.5
        assert intr.cy == 47.5
        assert intr.fx == pytest.approx(64.0 / math.tan(math.radians(35.0)))

    def test_matrix(self, intr):
        k = intr.matrix
        assert k[0, 0] == intr.fx and k[1, 2] == intr.cy and k[2, 2] == 1.0

    def test_rejects_nonpositive_focal(self):
        with pytest.raises(ValueError):
            CameraIntrinsics(0.0, 1.0, 0.0, 0.0)


class TestPixelToCamera:
    def test_principal_point_is_on_axis(self, intr):
        p = pixel_to_camera(intr, PixelObservation(intr.cx, intr.cy, 2.0))
        np.testing.assert_allclose(p, [0.0, 0.0, 2.0])

    def test_hand_example(self):
        intr = CameraIntrinsics(100.0, 50.0, 10.0, 20.0)
        # x = (30 - 10) / 100 * 3, y = (0 - 20) / 50 * 3
        p = pixel_to_camera(intr, PixelObservation(30, 0, 3.0))
        np.testing.assert_allclose(p, [0.6, -1.2, 3.0])

    @pytest.mark.parametrize("depth", [0.0, -1.0, float("nan"), float("inf")])
    def test_bad_depth(self, intr, depth):
        with pytest.raises(InvalidObservationError):
            pixel_to_camera(intr, PixelObservation(1, 1, depth))


class TestRotations:
    @given(angles, angles, angles)
    def test_euler_rotation_is_proper_orthonormal(self, a, b, g):
        r = euler_to_rotation(a, b, g)
        np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(r) == pytest.approx(1.0)

    def test_composition_order(self):
        a, b, g = 0.3, -0.7, 1.9
        np.testing.assert_allclose(euler_to_rotation(a, b, g), rot_z(g) @ rot_y(b) @ rot_x(a))

    def test_rot_z_quarter_turn(self):
        np.testing.assert_allclose(rot_z(math.pi / 2) @ [1, 0, 0], [0, 1, 0], atol=1e-15)

    def test_mount_rotations_are_mirrored(self):
        for m in default_mounts().values():
            r = m.extrinsics.rotation
            np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
            assert np.linalg.det(r) == pytest.approx(-1.0)

    def test_extrinsics_reject_non_orthonormal(self):
        with pytest.raises(ValueError):
            CameraExtrinsics(np.diag([1.0, 2.0, 1.0]))


class TestAgentToWorld:
    def test_identity_pose_negates_y(self):
        np.testing.assert_allclose(agent_to_world(RobotPose(), [1.0, 2.0, 3.0]), [1.0, -2.0, 3.0])

    def test_flip_x_alternative(self):
        np.testing.assert_allclose(agent_to_world(RobotPose(), [1.0, 2.0, 3.0], flip_axis="x"), [-1.0, 2.0, 3.0])

    def test_bad_flip_axis(self):
        with pytest.raises(ValueError):
            agent_to_world(RobotPose(), [0, 0, 0], flip_axis="z")

    def test_right_of_robot_facing_north_is_east(self):
        # facing +y (north), a point 1 m to the body's right is 1 m east
        pose = RobotPose.planar(2.0, 3.0, math.pi / 2)
        np.testing.assert_allclose(agent_to_world(pose, [0.0, 1.0, 0.0]), [3.0, 3.0, 0.0], atol=1e-12)

    @given(angles, angles, angles, st.lists(st.floats(-5, 5), min_size=3, max_size=3))
    def test_inverse(self, a, b, g, p):
        pose = RobotPose((a, b, g), np.array([0.5, -1.0, 0.2]))
        np.testing.assert_allclose(world_to_agent(pose, agent_to_world(pose, p)), p, atol=1e-12)

    def test_batch_matches_single(self, rng):
        pose = RobotPose((0.1, 0.2, 0.3), np.array([1.0, 2.0, 0.0]))
        pts = rng.normal(size=(20, 3))
        batch = agent_to_world(pose, pts)
        for k in range(20):
            np.testing.assert_allclose(batch[k], agent_to_world(pose, pts[k]), atol=1e-14)


class TestPixelToWorld:
    def test_matches_reference_chain(self, intr, rng):
        extr = mount_extrinsics(1.45, 15.0)
        for _ in range(50):
            euler = tuple(rng.uniform(-math.pi, math.pi, 3))
            t = rng.uniform(-3, 3, 3)
            pose = RobotPose(euler, t)
            i, j, d = rng.uniform(0, 127), rng.uniform(0, 95), rng.uniform(0.1, 8)
            got = pixel_to_world(intr, extr, pose, PixelObservation(i, j, d))
            ref = ref_pixel_to_world(i, j, d, intr.fx, intr.fy, intr.cx, intr.cy,
                                     extr.rotation, extr.translation, euler, t)
            np.testing.assert_allclose(got, ref, atol=1e-12)

    def test_fused_matches_stepwise(self, intr, rng):
        extr = mount_extrinsics(1.1, 10.0)
        pose = RobotPose.planar(1.0, 2.0, 0.7)
        i, j, d = rng.uniform(0, 127, 30), rng.uniform(0, 95, 30), rng.uniform(0.2, 5, 30)
        fused = pixel_to_world_fused(intr, extr, pose, i, j, d)
        for k in range(30):
            step = agent_to_world(pose, camera_to_agent(extr, pixel_to_camera(intr, PixelObservation(i[k], j[k], d[k]))))
            np.testing.assert_allclose(fused[k], step, atol=1e-12)

    def test_level_camera_center_pixel_looks_forward(self, intr):
        extr = mount_extrinsics(0.7, 0.0)
        pose = RobotPose.planar(0.0, 0.0, 0.0)
        p = pixel_to_world(intr, extr, pose, PixelObservation(intr.cx, intr.cy, 2.0))
        np.testing.assert_allclose(p, [2.0, 0.0, 0.7], atol=1e-12)

    def test_world_to_pixel_matches_reference(self, intr, rng):
        extr = mount_extrinsics(1.45, 15.0)
        pose = RobotPose((0.05, -0.1, 2.0), np.array([1.0, 1.0, 0.0]))
        for _ in range(20):
            p = rng.uniform(-2, 4, 3)
            ref = ref_world_to_pixel(p, intr.fx, intr.fy, intr.cx, intr.cy,
                                     extr.rotation, extr.translation, pose.euler, pose.translation)
            np.testing.assert_allclose(world_to_pixel(intr, extr, pose, p), ref, atol=1e-9)


class TestWrapAngle:
    @given(st.floats(-100, 100))
    def test_range_and_equivalence(self, a):
        w = wrap_angle(a)
        assert -math.pi <= w <= math.pi
        assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-9)
        assert math.sin(w) == pytest.approx(math.sin(a), abs=1e-9)

    @settings(max_examples=50)
    @given(angles, angles, angles)
    def test_normalized_pose_same_rotation(self, a, b, g):
        pose = RobotPose((a + 2 * math.pi, b - 4 * math.pi, g + 6 * math.pi))
        np.testing.assert_allclose(pose.normalized().rotation, pose.rotation, atol=1e-9)
