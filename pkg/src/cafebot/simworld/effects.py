"""World-state mutation hook used by the skill executor."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .robot import RobotState
from .scene import CATEGORY_STATES, WorldScene


class PreconditionFailed(Exception):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


@dataclass(frozen=True)
class Effect:
    """A declared state transition.

    ``changes`` is applied to object ``object_id`` (if given).  ``requires_held``
    is checked against the robot's held item, ``sets_held`` replaces it.
    """

    object_id: int | None = None
    changes: dict[str, Any] = field(default_factory=dict)
    requires_held: str | None = None
    sets_held: str | None = None


@dataclass(frozen=True)
class EffectResult:
    changed: bool


def apply_effect(scene: WorldScene, robot: RobotState, effect: Effect) -> EffectResult:
    """Apply ``effect`` atomically.

    All checks run before anything is written, so a raised
    :class:`PreconditionFailed` leaves scene and robot untouched.
    """
    obj = None
    if effect.object_id is not None:
        try:
            obj = scene.get(effect.object_id)
        except KeyError:
            raise PreconditionFailed(f"object {effect.object_id} does not exist") from None
        schema = CATEGORY_STATES[obj.category]
        for key, val in effect.changes.items():
            if key not in schema:
                raise PreconditionFailed(f"{obj.category} has no state {key!r}")
            if not isinstance(val, schema[key][0]):
                raise PreconditionFailed(f"bad value for {obj.category}.{key}: {val!r}")
    elif effect.changes:
        raise PreconditionFailed("state changes given without a target object")
    if effect.requires_held is not None and robot.held_item != effect.requires_held:
        held = robot.held_item or "nothing"
        raise PreconditionFailed(f"requires holding {effect.requires_held}, holding {held}")

    changed = False
    if obj is not None:
        for key, val in effect.changes.items():
            if obj.state.get(key) != val:
                obj.state[key] = val
                changed = True
    if effect.sets_held is not None and robot.held_item != effect.sets_held:
        robot.held_item = effect.sets_held
        changed = True
    return EffectResult(changed)
