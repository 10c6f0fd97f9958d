"""Seeded instruction generation with grounding plans, world setup and goals."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from ..mem.memory import EnvironmentMemory
from ..planner.grammar import Plan, parse_plan
from ..simworld.robot import RobotState
from ..simworld.scene import WorldScene
from ..skills import SkillAction, execute_plan
from ..vocab import CLOSERS, JOINERS, OPENERS, SPATIAL_TARGET, SUBTASK_PHRASES, display, find_subtasks

LENGTHS = {"short": (2, 3), "long": (3, 5)}
# a landmark only anchors a reference if the runner-up is this much further away
LANDMARK_MARGIN = 0.3
# kinds that may not appear together in one instruction
_GROUPS = {
    "ac_on": "ac", "ac_off": "ac", "ac_cooler": "ac", "ac_warmer": "ac",
    "curtain_open": "curtain", "curtain_close": "curtain",
    "light_on": "light", "light_off": "light",
}


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Goal:
    """``object_id`` None means "any object of ``category``"."""

    category: str
    key: str
    value: object
    object_id: int | None = None

    def met(self, scene: WorldScene) -> bool:
        objs = scene.of_category(self.category)
        if self.object_id is not None:
            objs = [o for o in objs if o.id == self.object_id]
        return any(o.state.get(self.key) == self.value for o in objs)

    def to_json(self) -> dict:
        return {"category": self.category, "key": self.key, "value": self.value, "object_id": self.object_id}


@dataclass(frozen=True)
class Subtask:
    kind: str
    landmark: str | None
    target_id: int | None
    goal: Goal
    setup: tuple[tuple[int, str, object], ...] = ()

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "landmark": self.landmark,
            "target_id": self.target_id,
            "goal": self.goal.to_json(),
            "setup": [list(s) for s in self.setup],
        }


@dataclass(frozen=True)
class InstructionCase:
    text: str
    grounding_plan: Plan
    subtasks: tuple[Subtask, ...] = field(default_factory=tuple)

    @property
    def n_subtasks(self) -> int:
        return len(self.subtasks)

    def prepare(self, scene: WorldScene) -> WorldScene:
        """A copy of ``scene`` with this case's initial states applied."""
        s = scene.copy()
        for st in self.subtasks:
            for oid, key, value in st.setup:
                s.get(oid).state[key] = value
        return s

    def goals_met(self, scene: WorldScene) -> list[bool]:
        return [st.goal.met(scene) for st in self.subtasks]

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "grounding_plan": self.grounding_plan.render(),
            "subtasks": [st.to_json() for st in self.subtasks],
        }


def case_from_json(doc: dict) -> InstructionCase:
    subs = []
    for s in doc["subtasks"]:
        g = s["goal"]
        subs.append(Subtask(s["kind"], s["landmark"], s["target_id"],
                            Goal(g["category"], g["key"], g["value"], g["object_id"]),
                            tuple(tuple(x) for x in s["setup"])))
    return InstructionCase(doc["text"], parse_plan(doc["grounding_plan"]), tuple(subs))


def dump_cases(cases) -> bytes:
    return json.dumps({"cases": [c.to_json() for c in cases]}, sort_keys=True, indent=1).encode("utf-8")


def load_cases(data: bytes | str) -> list[InstructionCase]:
    return [case_from_json(c) for c in json.loads(data)["cases"]]


def _center_dist(a, b) -> float:
    return math.hypot(a.position[0] - b.position[0], a.position[1] - b.position[1])


def anchored_landmarks(scene: WorldScene, category: str) -> dict[str, int]:
    """Landmark category -> id of the ``category`` object it unambiguously points at."""
    out = {}
    targets = scene.of_category(category)
    for lm in sorted({o.category for o in scene.objects}):
        inst = scene.of_category(lm)
        if len(inst) != 1 or lm == category or not targets:
            continue
        ranked = sorted(targets, key=lambda t: (_center_dist(t, inst[0]), t.id))
        if len(ranked) > 1 and _center_dist(ranked[1], inst[0]) - _center_dist(ranked[0], inst[0]) < LANDMARK_MARGIN:
            continue
        out[lm] = ranked[0].id
    return out


def _single(scene: WorldScene, category: str):
    objs = scene.of_category(category)
    return objs[0] if objs else None


def _bar_table(scene: WorldScene):
    bars = [t for t in scene.of_category("table") if t.state.get("bar")]
    return min(bars, key=lambda t: t.id) if bars else None


def build_subtask(kind: str, scene: WorldScene, rng: random.Random) -> tuple[Subtask, list[SkillAction]] | None:
    """Sample landmark and target for ``kind``; None when the scene cannot host it."""
    if kind in SPATIAL_TARGET:
        cat = SPATIAL_TARGET[kind]
        anchors = anchored_landmarks(scene, cat)
        if not anchors:
            return None
        lm = rng.choice(sorted(anchors))
        tid = anchors[lm]
        name = f"{cat}_{tid}"
        move = SkillAction("move_to", (name,))
        if kind == "wipe":
            return (Subtask(kind, lm, tid, Goal(cat, "dirty", False, tid), ((tid, "dirty", True),)),
                    [SkillAction("take_towel"), move, SkillAction("wipe_table")])
        if kind == "chair":
            return (Subtask(kind, lm, tid, Goal(cat, "aligned", True, tid), ((tid, "aligned", False),)),
                    [move, SkillAction("straighten_chair")])
        if kind.startswith("curtain"):
            want = kind == "curtain_open"
            return (Subtask(kind, lm, tid, Goal(cat, "open", want, tid), ((tid, "open", not want),)),
                    [move, SkillAction("control_curtains", ("open" if want else "close",))])
        want = kind == "light_on"
        return (Subtask(kind, lm, tid, Goal(cat, "on", want, tid), ((tid, "on", not want),)),
                [move, SkillAction("control_lighting", ("on" if want else "off",))])

    if kind == "milk":
        bar = _bar_table(scene)
        if bar is None:
            return None
        return (Subtask(kind, None, bar.id, Goal("table", "milk_made", True, bar.id), ((bar.id, "milk_made", False),)),
                [SkillAction("move_to", (f"table_{bar.id}",)), SkillAction("produce_and_grab_milk")])
    if kind == "bread":
        breads = scene.of_category("bread")
        if not breads:
            return None
        return (Subtask(kind, None, None, Goal("bread", "taken", True), tuple((b.id, "taken", False) for b in breads)),
                [SkillAction("move_to", ("bread",)), SkillAction("grab_bread")])
    simple = {
        "coffee": ("coffee_machine", "coffee_ready", True, False, "make_coffee", ()),
        "water": ("kettle", "poured", True, False, "pour_water", ()),
        "mop": ("stain", "dirty", False, True, "mop_floor", ()),
        "ac_on": ("air_conditioner", "power", True, False, "control_ac", ("on",)),
        "ac_off": ("air_conditioner", "power", False, True, "control_ac", ("off",)),
        "ac_cooler": ("air_conditioner", "setpoint", 23, 24, "control_ac", ("lower",)),
        "ac_warmer": ("air_conditioner", "setpoint", 25, 24, "control_ac", ("raise",)),
    }
    cat, key, goal, init, skill, args = simple[kind]
    o = _single(scene, cat)
    if o is None or len(scene.of_category(cat)) != 1:
        return None
    return (Subtask(kind, None, o.id, Goal(cat, key, goal, o.id), ((o.id, key, init),)),
            [SkillAction("move_to", (cat,)), SkillAction(skill, args)])


def render_text(subtasks, rng: random.Random) -> str:
    parts = []
    for st in subtasks:
        phrase = rng.choice(SUBTASK_PHRASES[st.kind])
        if "{landmark}" in phrase:
            phrase = phrase.replace("{landmark}", display(st.landmark))
        parts.append(phrase)
    text = parts[0]
    for p in parts[1:]:
        text += rng.choice(JOINERS) + p
    opener = rng.choice(OPENERS)
    text = opener + (text if opener else text[0].upper() + text[1:])
    return text + rng.choice(CLOSERS)


def validate_case(case: InstructionCase, scene: WorldScene, robot: RobotState, mem: EnvironmentMemory) -> bool:
    """Grounding plan runs without a failed step and meets every goal."""
    s = case.prepare(scene)
    if any(case.goals_met(s)):
        return False
    trace = execute_plan(case.grounding_plan.steps, s, robot.copy(), mem)
    return trace.all_succeeded and all(case.goals_met(s))


def generate_instructions(seed: int, length: str, count: int, scene: WorldScene,
                          robot: RobotState, mem: EnvironmentMemory, max_tries: int = 200) -> list[InstructionCase]:
    """``count`` validated cases with 2-3 (short) or 3-5 (long) sub-tasks.

    ``robot`` and ``mem`` are the state after the exploration tour; every
    grounding plan is executed from there before the case is accepted.
    """
    if count <= 0:
        raise ValueError("count must be > 0")
    if length not in LENGTHS:
        raise ValueError(f"length must be one of {sorted(LENGTHS)}")
    lo, hi = LENGTHS[length]
    rng = random.Random(seed)
    kinds = sorted(SUBTASK_PHRASES)
    cases: list[InstructionCase] = []
    tries = 0
    while len(cases) < count:
        tries += 1
        if tries > max_tries * count:
            raise GenerationError(f"could only generate {len(cases)} of {count} {length} cases")
        n = rng.randint(lo, hi)
        picked, groups = [], set()
        for kind in rng.sample(kinds, len(kinds)):
            g = _GROUPS.get(kind, kind)
            if g in groups:
                continue
            built = build_subtask(kind, scene, rng)
            if built is None:
                continue
            picked.append(built)
            groups.add(g)
            if len(picked) == n:
                break
        if len(picked) < n:
            continue
        subs = tuple(p[0] for p in picked)
        # two sub-tasks on the same object would interfere
        targets = [s.target_id for s in subs if s.target_id is not None]
        if len(set(targets)) != len(targets):
            continue
        steps = tuple(a for p in picked for a in p[1])
        case = InstructionCase(render_text(subs, rng), Plan(steps), subs)
        # the text must read back as exactly these sub-tasks
        if find_subtasks(case.text) != [(s.kind, s.landmark) for s in subs]:
            continue
        if validate_case(case, scene, robot, mem):
            cases.append(case)
    return cases
