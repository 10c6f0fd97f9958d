"""Robot state and the three fixed camera mounts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..geometry import CameraExtrinsics, CameraIntrinsics, RobotPose

IMAGE_WIDTH = 128
IMAGE_HEIGHT = 96
HFOV_DEG = 70.0

# (height above floor in m, downward pitch in degrees).  Fixture values.
MOUNT_LAYOUT = {
    "head": (1.45, 15.0),
    "chest": (1.10, 10.0),
    "waist": (0.70, 0.0),
}


def mount_extrinsics(height: float, pitch_down_deg: float, forward: float = 0.0) -> CameraExtrinsics:
    """Camera-to-body transform for a camera on the robot's center line.

    The body frame is x forward, y right, z up; the optical frame is
    x right, y down, z forward.  Columns of the rotation are the camera axes
    expressed in body coordinates.
    """
    p = math.radians(pitch_down_deg)
    fwd = np.array([math.cos(p), 0.0, -math.sin(p)])
    right = np.array([0.0, 1.0, 0.0])
    down = np.array([-math.sin(p), 0.0, -math.cos(p)])
    rot = np.column_stack([right, down, fwd])
    return CameraExtrinsics(rot, np.array([forward, 0.0, height]))


@dataclass(frozen=True)
class CameraMount:
    name: str
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics


def default_mounts(width: int = IMAGE_WIDTH, height: int = IMAGE_HEIGHT, hfov_deg: float = HFOV_DEG) -> dict[str, CameraMount]:
    intr = CameraIntrinsics.from_fov(width, height, hfov_deg)
    return {
        name: CameraMount(name, intr, mount_extrinsics(h, pitch))
        for name, (h, pitch) in MOUNT_LAYOUT.items()
    }


@dataclass
class RobotState:
    pose: RobotPose = field(default_factory=RobotPose)
    mounts: dict[str, CameraMount] = field(default_factory=default_mounts)
    held_item: str | None = None

    def __post_init__(self):
        if len(self.mounts) != 3:
            raise ValueError("a robot carries exactly three camera mounts")

    @classmethod
    def at(cls, x: float, y: float, heading: float = 0.0, **kw) -> "RobotState":
        return cls(RobotPose.planar(x, y, heading), **kw)

    @property
    def xy(self) -> np.ndarray:
        return self.pose.translation[:2].copy()

    @property
    def heading(self) -> float:
        return self.pose.heading

    def set_planar(self, x: float, y: float, heading: float | None = None) -> None:
        h = self.heading if heading is None else heading
        self.pose = RobotPose.planar(x, y, h)

    def copy(self) -> "RobotState":
        return replace(self)
