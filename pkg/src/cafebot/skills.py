"""Atomic robot skills executed against the simulated cafe.

Each skill has an explicit precondition and a documented state transition:

=======================  ==========================================  ===============================================
skill                    precondition                                effect
=======================  ==========================================  ===============================================
move_to(target)          target resolvable in language memory,       robot stands within reach of the target
                         a collision-free path exists
produce_and_grab_milk    a bar table within reach                    bar table ``milk_made``; robot holds milk
make_coffee              coffee machine within reach                 ``coffee_ready``
pour_water               kettle within reach                         ``poured``
grab_bread               untaken bread within reach                  bread ``taken``; robot holds bread
control_ac(mode)         air conditioner within reach                on/off sets ``power``; raise/lower ``setpoint``
mop_floor                stain within reach                          stain ``dirty`` false
wipe_table               table within reach, holding a towel         table ``dirty`` false
control_curtains(a)      curtain within reach                        ``open`` true/false
control_lighting(s)      light switch within reach                   ``on`` true/false
straighten_chair         chair within reach                          ``aligned`` true
take_towel               none (towels come from the robot's supply)  robot holds towel
=======================  ==========================================  ===============================================

Manipulations act on the nearest object of the relevant category (planar
distance to its footprint, then lowest id).  Re-applying a state that
already holds succeeds with reason ``no_op``.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .mem.memory import EnvironmentMemory, LanguageMemoryEntry
from .simworld.effects import Effect, PreconditionFailed, apply_effect
from .simworld.motion import follow_path, plan_path
from .simworld.robot import RobotState
from .simworld.scene import CATEGORIES, ObjectInstance, WorldScene

REACH = 0.8
# goal cells for move_to lie this close to the remembered target point
APPROACH = 0.75
AC_RANGE = (16, 30)


class Reason(str, enum.Enum):
    TARGET_UNKNOWN = "target_unknown"
    UNREACHABLE = "unreachable"
    PRECONDITION_FAILED = "precondition_failed"
    NO_OP = "no_op"
    INVALID_ACTION = "invalid_action"


@dataclass(frozen=True)
class SkillSpec:
    name: str
    params: tuple[tuple[str, tuple[str, ...] | None], ...]
    description: str
    requires: str
    derived: bool = False

    def signature(self) -> str:
        args = []
        for pname, choices in self.params:
            args.append(f"{pname}: {'|'.join(choices)}" if choices else pname)
        return f"{self.name}({', '.join(args)})"

    def line(self) -> str:
        tag = " [derived]" if self.derived else ""
        return f"{self.signature()} -- {self.description} Requires: {self.requires}{tag}"


CATALOG: tuple[SkillSpec, ...] = (
    SkillSpec("move_to", (("target_name", None),),
              "Move next to the named item using the environment memory.",
              "target known in memory (category, category_<id>)."),
    SkillSpec("produce_and_grab_milk", (), "Make a glass of milk at the bar table and hold it.",
              "standing at the bar table."),
    SkillSpec("make_coffee", (), "Operate the coffee machine.", "standing at the coffee machine."),
    SkillSpec("pour_water", (), "Pour water with the kettle.", "standing at the kettle."),
    SkillSpec("grab_bread", (), "Pick up a piece of bread.", "standing at bread that is not taken."),
    SkillSpec("control_ac", (("mode", ("raise", "lower", "on", "off")),),
              "Operate the air conditioner.", "standing at the air conditioner."),
    SkillSpec("mop_floor", (), "Mop a dirty patch of floor.", "standing at the stain."),
    SkillSpec("wipe_table", (), "Wipe a table with a towel.", "standing at the table and holding a towel."),
    SkillSpec("control_curtains", (("action", ("open", "close")),), "Open or close a curtain.",
              "standing at the curtain."),
    SkillSpec("control_lighting", (("state", ("on", "off")),), "Switch a light on or off.",
              "standing at the light switch."),
    SkillSpec("straighten_chair", (), "Straighten a misplaced chair.", "standing at the chair."),
    SkillSpec("take_towel", (), "Take a towel from the robot's supply.", "nothing.", derived=True),
)
SKILLS: dict[str, SkillSpec] = {s.name: s for s in CATALOG}


def catalog() -> list[SkillSpec]:
    return list(CATALOG)


def catalog_text() -> str:
    """One line per skill; this is the capability list handed to planners."""
    return "\n".join(s.line() for s in CATALOG)


@dataclass(frozen=True)
class SkillAction:
    kind: str
    args: tuple[str, ...] = ()

    def render(self) -> str:
        return f"{self.kind}({', '.join(self.args)})"

    def target_category(self) -> str | None:
        if self.kind != "move_to" or not self.args:
            return None
        return parse_target(self.args[0])[0]


@dataclass(frozen=True)
class SkillOutcome:
    success: bool
    reason: Reason | None = None
    detail: str = ""
    distance_traveled: float = 0.0
    object_id: int | None = None

    def to_json(self) -> dict:
        return {
            "success": self.success,
            "reason": self.reason.value if self.reason else None,
            "detail": self.detail,
            "distance": round(self.distance_traveled, 6),
            "object_id": self.object_id,
        }


_TARGET_RE = re.compile(r"^([a-z_]+?)(?:_(\d+))?$")


def parse_target(name: str) -> tuple[str | None, int | None]:
    """Split ``cup_15`` into ``("cup", 15)``; ``cup`` into ``("cup", None)``."""
    m = _TARGET_RE.match(name)
    if not m:
        return None, None
    cat, oid = m.group(1), m.group(2)
    if cat not in CATEGORIES:
        return None, None
    return cat, int(oid) if oid is not None else None


def validate_action(action: SkillAction) -> str | None:
    """Return an error message if ``action`` does not match the catalog, else None."""
    spec = SKILLS.get(action.kind)
    if spec is None:
        return f"unknown skill {action.kind!r}"
    if len(action.args) != len(spec.params):
        return f"{action.kind} takes {len(spec.params)} argument(s), got {len(action.args)}"
    for (pname, choices), val in zip(spec.params, action.args):
        if choices is not None and val not in choices:
            return f"{action.kind}: {pname} must be one of {', '.join(choices)}"
        if choices is None and not re.fullmatch(r"[a-z][a-z0-9_]*", val):
            return f"{action.kind}: bad {pname} {val!r}"
    return None


def resolve_target(name: str, mem: EnvironmentMemory, from_xy) -> LanguageMemoryEntry | None:
    """Memory entry for a target name: nearest matching entry, then lowest id."""
    cat, oid = parse_target(name)
    if cat is None:
        return None
    cands = mem.of_category(cat)
    if oid is not None:
        cands = [e for e in cands if e.object_id == oid]
    if not cands:
        return None
    fx, fy = float(from_xy[0]), float(from_xy[1])

    def key(e: LanguageMemoryEntry):
        x, y, z = e.world_pos
        return (math.sqrt((x - fx) ** 2 + (y - fy) ** 2 + z ** 2), e.object_id)

    # distance measured from the robot base at floor level
    return min(cands, key=key)


def _nearest_in_reach(scene: WorldScene, robot: RobotState, category: str, pred=None) -> ObjectInstance | None:
    xy = robot.xy
    cands = [o for o in scene.of_category(category) if o.planar_distance(xy) <= REACH]
    if pred is not None:
        cands = [o for o in cands if pred(o)]
    if not cands:
        return None
    return min(cands, key=lambda o: (o.planar_distance(xy), o.id))


def _execute_move(action: SkillAction, scene: WorldScene, robot: RobotState, mem: EnvironmentMemory) -> SkillOutcome:
    name = action.args[0]
    entry = resolve_target(name, mem, robot.xy)
    if entry is None:
        return SkillOutcome(False, Reason.TARGET_UNKNOWN, f"{name} not in memory")
    tx, ty = entry.world_pos[0], entry.world_pos[1]
    if math.hypot(robot.xy[0] - tx, robot.xy[1] - ty) <= APPROACH and scene.is_free(*robot.xy):
        return SkillOutcome(True, Reason.NO_OP, "already there", 0.0, entry.object_id)
    gx, gy = scene.cell_centers()
    goal = np.hypot(gx - tx, gy - ty) <= APPROACH
    path = plan_path(scene, robot.xy, goal)
    if path is None:
        return SkillOutcome(False, Reason.UNREACHABLE, f"no path to {name}", 0.0, entry.object_id)
    res = follow_path(scene, robot, path)
    robot.set_planar(robot.xy[0], robot.xy[1], math.atan2(ty - robot.xy[1], tx - robot.xy[0]))
    if not res.reached:
        return SkillOutcome(False, Reason.UNREACHABLE, f"blocked on the way to {name}", res.path_length, entry.object_id)
    return SkillOutcome(True, None, "", res.path_length, entry.object_id)


def _effect_for(action: SkillAction, scene: WorldScene, robot: RobotState) -> Effect:
    """Map a manipulation to its effect, raising PreconditionFailed when out of reach."""
    k = action.kind

    def need(category, pred=None, what=None):
        o = _nearest_in_reach(scene, robot, category, pred)
        if o is None:
            raise PreconditionFailed(f"no {what or category.replace('_', ' ')} within {REACH} m")
        return o

    if k == "take_towel":
        return Effect(sets_held="towel")
    if k == "produce_and_grab_milk":
        o = need("table", lambda t: t.state.get("bar"), "bar table")
        return Effect(o.id, {"milk_made": True}, sets_held="milk")
    if k == "make_coffee":
        return Effect(need("coffee_machine").id, {"coffee_ready": True})
    if k == "pour_water":
        return Effect(need("kettle").id, {"poured": True})
    if k == "grab_bread":
        o = need("bread", lambda b: not b.state.get("taken"), "untaken bread")
        return Effect(o.id, {"taken": True}, sets_held="bread")
    if k == "control_ac":
        o = need("air_conditioner")
        mode = action.args[0]
        if mode in ("on", "off"):
            return Effect(o.id, {"power": mode == "on"})
        sp = int(o.state.get("setpoint", 24)) + (1 if mode == "raise" else -1)
        return Effect(o.id, {"setpoint": min(max(sp, AC_RANGE[0]), AC_RANGE[1])})
    if k == "mop_floor":
        return Effect(need("stain").id, {"dirty": False})
    if k == "wipe_table":
        return Effect(need("table").id, {"dirty": False}, requires_held="towel")
    if k == "control_curtains":
        return Effect(need("curtain").id, {"open": action.args[0] == "open"})
    if k == "control_lighting":
        return Effect(need("light_switch").id, {"on": action.args[0] == "on"})
    if k == "straighten_chair":
        return Effect(need("chair").id, {"aligned": True})
    raise PreconditionFailed(f"no effect declared for {k}")


def execute(action: SkillAction, scene: WorldScene, robot: RobotState, mem: EnvironmentMemory) -> SkillOutcome:
    """Run one skill.  Never raises: every failure comes back as an outcome."""
    err = validate_action(action)
    if err is not None:
        return SkillOutcome(False, Reason.INVALID_ACTION, err)
    try:
        if action.kind == "move_to":
            return _execute_move(action, scene, robot, mem)
        effect = _effect_for(action, scene, robot)
        res = apply_effect(scene, robot, effect)
    except PreconditionFailed as exc:
        return SkillOutcome(False, Reason.PRECONDITION_FAILED, exc.reason)
    return SkillOutcome(True, None if res.changed else Reason.NO_OP, "", 0.0, effect.object_id)


@dataclass
class ExecutionTrace:
    steps: list[tuple[SkillAction, SkillOutcome]] = field(default_factory=list)

    @property
    def all_succeeded(self) -> bool:
        return all(o.success for _, o in self.steps)

    @property
    def distance(self) -> float:
        return sum(o.distance_traveled for _, o in self.steps)


def execute_plan(actions, scene: WorldScene, robot: RobotState, mem: EnvironmentMemory, stop_on_failure: bool = False) -> ExecutionTrace:
    trace = ExecutionTrace()
    for a in actions:
        out = execute(a, scene, robot, mem)
        trace.steps.append((a, out))
        if stop_on_failure and not out.success:
            break
    return trace
