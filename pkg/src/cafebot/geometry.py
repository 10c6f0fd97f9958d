"""Coordinate transforms: pixel -> camera -> robot body -> world.

Frames used throughout the package:

* camera (optical) frame: x right, y down, z forward along the optical axis.
  Depth is the camera-frame z, not the ray length.
* body frame of the robot: x forward, y right, z up.  This frame is mirrored
  with respect to the world (right-handed, z up), so going to world negates
  one axis before rotating by the robot's Euler angles.
* world frame: x east, y north, z up, floor at z = 0.

Vectors are plain ``numpy`` arrays of shape ``(3,)``; the ``*_batch``
variants accept ``(N, 3)`` arrays and are used for point clouds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InvalidObservationError",
    "CameraIntrinsics",
    "CameraExtrinsics",
    "RobotPose",
    "PixelObservation",
    "rot_x",
    "rot_y",
    "rot_z",
    "euler_to_rotation",
    "pixel_to_camera",
    "pixels_to_camera",
    "camera_to_agent",
    "agent_to_world",
    "agent_to_world_batch",
    "pixel_to_world",
    "pixel_to_world_fused",
    "world_to_agent",
    "world_to_pixel",
    "wrap_angle",
]


class InvalidObservationError(ValueError):
    """Raised for a pixel observation that cannot be back-projected."""


def wrap_angle(a: float) -> float:
    """Wrap an angle to [-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    # remainder maps pi to pi or -pi depending on rounding; keep the closed range
    return w


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int = 128
    height: int = 96

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")

    @classmethod
    def from_fov(cls, width: int, height: int, hfov_deg: float) -> "CameraIntrinsics":
        """Square-pixel pinhole with the principal point at the image center.

        Pixel centers sit on integer coordinates, so the center is
        ``((width - 1) / 2, (height - 1) / 2)``.
        """
        f = (width / 2.0) / math.tan(math.radians(hfov_deg) / 2.0)
        return cls(f, f, (width - 1) / 2.0, (height - 1) / 2.0, width, height)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class CameraExtrinsics:
    """Camera pose in the robot body frame: ``p_body = rotation @ p_cam + translation``.

    ``rotation`` is orthonormal.  Because the body frame is mirrored, mount
    rotations built by :mod:`cafebot.simworld` have determinant -1.
    """

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if np.max(np.abs(r @ r.T - np.eye(3))) > 1e-9:
            raise ValueError("extrinsic rotation is not orthonormal")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)


@dataclass(frozen=True)
class RobotPose:
    """Euler angles (alpha, beta, gamma) in radians plus a world translation."""

    euler: tuple[float, float, float] = (0.0, 0.0, 0.0)
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        e = tuple(float(a) for a in self.euler)
        if len(e) != 3 or not all(math.isfinite(a) for a in e):
            raise ValueError(f"euler angles must be 3 finite values, got {self.euler!r}")
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if not np.all(np.isfinite(t)):
            raise ValueError("pose translation must be finite")
        object.__setattr__(self, "euler", e)
        object.__setattr__(self, "translation", t)

    @classmethod
    def planar(cls, x: float, y: float, heading: float) -> "RobotPose":
        return cls((0.0, 0.0, wrap_angle(heading)), np.array([x, y, 0.0]))

    @property
    def heading(self) -> float:
        return self.euler[2]

    def normalized(self) -> "RobotPose":
        return RobotPose(tuple(wrap_angle(a) for a in self.euler), self.translation)

    @property
    def rotation(self) -> np.ndarray:
        return euler_to_rotation(*self.euler)


@dataclass(frozen=True)
class PixelObservation:
    i: float  # column
    j: float  # row
    depth: float


def rot_x(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(beta: float) -> np.ndarray:
    c, s = math.cos(beta), math.sin(beta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(gamma: float) -> np.ndarray:
    c, s = math.cos(gamma), math.sin(gamma)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_to_rotation(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Return ``Rz(gamma) @ Ry(beta) @ Rx(alpha)``."""
    return rot_z(gamma) @ rot_y(beta) @ rot_x(alpha)


def pixel_to_camera(intr: CameraIntrinsics, obs: PixelObservation) -> np.ndarray:
    """Back-project a pixel with known depth into the camera frame.

    Raises
    ------
    InvalidObservationError
        If the depth is not strictly positive (or not finite).
    """
    d = float(obs.depth)
    if not (d > 0 and math.isfinite(d)):
        raise InvalidObservationError(f"depth must be positive, got {obs.depth!r}")
    return np.array([(obs.i - intr.cx) / intr.fx * d, (obs.j - intr.cy) / intr.fy * d, d])


def pixels_to_camera(intr: CameraIntrinsics, i, j, depth) -> np.ndarray:
    """Vectorized :func:`pixel_to_camera`; returns an ``(N, 3)`` array.

    No depth validation is done here, callers mask invalid depth first.
    """
    i = np.asarray(i, dtype=float)
    j = np.asarray(j, dtype=float)
    d = np.asarray(depth, dtype=float)
    return np.stack([(i - intr.cx) / intr.fx * d, (j - intr.cy) / intr.fy * d, d], axis=-1)


def camera_to_agent(extr: CameraExtrinsics, p_c) -> np.ndarray:
    """``R @ p_c + T``; also accepts ``(N, 3)`` arrays."""
    p = np.asarray(p_c, dtype=float)
    return p @ extr.rotation.T + extr.translation


def _mirror_index(flip_axis: str) -> int:
    try:
        return {"y": 1, "x": 0}[flip_axis]
    except KeyError:
        raise ValueError(f"flip_axis must be 'x' or 'y', got {flip_axis!r}") from None


def agent_to_world(pose: RobotPose, p_g, flip_axis: str = "y") -> np.ndarray:
    """Body frame to world: negate one body axis, rotate by the pose, translate.

    The default negates y.  ``flip_axis="x"`` negates x instead, for
    experimenting with the other mirror convention.
    """
    q = np.array(p_g, dtype=float)
    q[..., _mirror_index(flip_axis)] *= -1.0
    return q @ pose.rotation.T + pose.translation


agent_to_world_batch = agent_to_world


def world_to_agent(pose: RobotPose, p_w, flip_axis: str = "y") -> np.ndarray:
    """Inverse of :func:`agent_to_world`."""
    q = (np.asarray(p_w, dtype=float) - pose.translation) @ pose.rotation
    q = np.array(q)
    q[..., _mirror_index(flip_axis)] *= -1.0
    return q


def pixel_to_world(
    intr: CameraIntrinsics,
    extr: CameraExtrinsics,
    pose: RobotPose,
    obs: PixelObservation,
    flip_axis: str = "y",
) -> np.ndarray:
    """Compose the three transforms for a single observation."""
    p_c = pixel_to_camera(intr, obs)
    return agent_to_world(pose, camera_to_agent(extr, p_c), flip_axis)


def camera_to_world_transform(extr: CameraExtrinsics, pose: RobotPose, flip_axis: str = "y"):
    """Collapse camera -> world into one affine map ``(M, t)`` with ``p_w = M p_c + t``."""
    mirror = np.eye(3)
    k = _mirror_index(flip_axis)
    mirror[k, k] = -1.0
    rg = pose.rotation
    m = rg @ mirror @ extr.rotation
    t = rg @ mirror @ extr.translation + pose.translation
    return m, t


def pixel_to_world_fused(intr, extr, pose, i, j, depth, flip_axis: str = "y") -> np.ndarray:
    """Back-project many pixels at once through a single fused affine map."""
    m, t = camera_to_world_transform(extr, pose, flip_axis)
    return pixels_to_camera(intr, i, j, depth) @ m.T + t


def world_to_pixel(intr, extr, pose, p_w, flip_axis: str = "y"):
    """Project world points to continuous ``(i, j, depth)``.

    Returns an array of shape ``(..., 3)``.  Points behind the camera get a
    non-positive depth; callers decide what to do with those.
    """
    m, t = camera_to_world_transform(extr, pose, flip_axis)
    # m is orthonormal so its inverse is its transpose
    p_c = (np.asarray(p_w, dtype=float) - t) @ m
    z = p_c[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        i = p_c[..., 0] / z * intr.fx + intr.cx
        j = p_c[..., 1] / z * intr.fy + intr.cy
    return np.stack([i, j, z], axis=-1)
