"""Deterministic desk-scale cafe world with synthetic RGB-D-segmentation cameras."""

from .effects import Effect, EffectResult, PreconditionFailed, apply_effect
from .motion import InvalidTargetError, MoveResult, follow_path, move_to, plan_path
from .robot import CameraMount, RobotState, default_mounts, mount_extrinsics
from .scene import (
    CATEGORIES,
    CATEGORY_COLORS,
    CATEGORY_STATES,
    ObjectInstance,
    SceneFormatError,
    SceneValidationError,
    WorldScene,
    dump_scene,
    load_scene,
    make_object,
    scene_from_dict,
)
from .sensors import SensorFrame, observe_four_directions, render, render_view
from .fixtures import cafe_small, default_start, tour_waypoints

__all__ = [
    "CATEGORIES",
    "CATEGORY_COLORS",
    "CATEGORY_STATES",
    "CameraMount",
    "Effect",
    "EffectResult",
    "InvalidTargetError",
    "MoveResult",
    "ObjectInstance",
    "PreconditionFailed",
    "RobotState",
    "SceneFormatError",
    "SceneValidationError",
    "SensorFrame",
    "WorldScene",
    "apply_effect",
    "cafe_small",
    "default_mounts",
    "default_start",
    "dump_scene",
    "follow_path",
    "load_scene",
    "make_object",
    "mount_extrinsics",
    "move_to",
    "observe_four_directions",
    "plan_path",
    "render",
    "render_view",
    "scene_from_dict",
    "tour_waypoints",
]
