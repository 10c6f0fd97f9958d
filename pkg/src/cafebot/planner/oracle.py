"""Deterministic rule-table planner and question answerer.

Both functions read only the structured request payload, so the same request
always produces the same text.  The rules cover the instruction and question
vocabulary in :mod:`cafebot.vocab`.
"""

from __future__ import annotations

import math

from ..skills import SkillAction, parse_target
from ..vocab import (
    AFFORDANCES,
    SPATIAL_TARGET,
    display,
    find_subtasks,
    from_display,
    parse_question,
)
from .grammar import Plan, render_plan

# items that stand on tables, as opposed to floor or wall items
TABLE_ITEMS = frozenset({"cup", "bread", "kettle", "coffee_machine", "towel"})
# an item further than this from every remembered table point is not on a table
ON_TABLE_RANGE = 1.6
# exploration points with fewer unknown cells around them are not worth a visit
MIN_UNKNOWN = 10

_FIXED_STEPS = {
    "coffee": [("move_to", "coffee_machine"), ("make_coffee",)],
    "water": [("move_to", "kettle"), ("pour_water",)],
    "bread": [("move_to", "bread"), ("grab_bread",)],
    "ac_on": [("move_to", "air_conditioner"), ("control_ac", "on")],
    "ac_off": [("move_to", "air_conditioner"), ("control_ac", "off")],
    "ac_cooler": [("move_to", "air_conditioner"), ("control_ac", "lower")],
    "ac_warmer": [("move_to", "air_conditioner"), ("control_ac", "raise")],
    "mop": [("move_to", "stain"), ("mop_floor",)],
}
_SPATIAL_STEPS = {
    "wipe": [("take_towel",), ("move_to", None), ("wipe_table",)],
    "curtain_open": [("move_to", None), ("control_curtains", "open")],
    "curtain_close": [("move_to", None), ("control_curtains", "close")],
    "light_on": [("move_to", None), ("control_lighting", "on")],
    "light_off": [("move_to", None), ("control_lighting", "off")],
    "chair": [("move_to", None), ("straighten_chair",)],
}


def _planar(a, b) -> float:
    return math.hypot(a[2] - b[2], a[3] - b[3])


def _first(rows, category):
    hits = [r for r in rows if r[1] == category]
    return min(hits, key=lambda r: r[0]) if hits else None


def _nearest(rows, category, anchor):
    hits = [r for r in rows if r[1] == category]
    if not hits:
        return None
    return min(hits, key=lambda r: (_planar(r, anchor), r[0]))


def _anchored_name(category: str, landmark: str | None, rows) -> str:
    """``category_<id>`` of the instance nearest the landmark, or the bare category."""
    if rows is None or landmark is None:
        return category
    lm = _first(rows, landmark)
    if lm is None:
        return category
    hit = _nearest(rows, category, lm)
    return f"{category}_{hit[0]}" if hit is not None else category


def subtask_steps(kind: str, landmark: str | None, rows) -> list[SkillAction]:
    """Skill steps for one recognized sub-task given memory rows (or None)."""
    if kind == "milk":
        # the bar table is the one that holds the coffee machine
        target = _anchored_name("table", "coffee_machine", rows)
        return [SkillAction("move_to", (target,)), SkillAction("produce_and_grab_milk")]
    if kind in _FIXED_STEPS:
        return [SkillAction(s[0], tuple(s[1:])) for s in _FIXED_STEPS[kind]]
    target = _anchored_name(SPATIAL_TARGET[kind], landmark, rows)
    out = []
    for s in _SPATIAL_STEPS[kind]:
        if s[0] == "move_to":
            out.append(SkillAction("move_to", (target,)))
        else:
            out.append(SkillAction(s[0], tuple(s[1:])))
    return out


def rule_plan(instruction: str, rows) -> Plan:
    steps: list[SkillAction] = []
    for kind, landmark in find_subtasks(instruction):
        steps.extend(subtask_steps(kind, landmark, rows))
    return Plan(tuple(steps))


def _alternatives(base: Plan, rows):
    """The base plan, then variants that pin one generic move_to to each remembered instance."""
    yield base
    if not rows:
        return
    for k, step in enumerate(base.steps):
        if step.kind != "move_to":
            continue
        cat, oid = parse_target(step.args[0])
        if cat is None or oid is not None:
            continue
        for r in sorted((r for r in rows if r[1] == cat), key=lambda r: r[0]):
            steps = list(base.steps)
            steps[k] = SkillAction("move_to", (f"{cat}_{r[0]}",))
            yield Plan(tuple(steps))


def plan_text(payload: dict) -> str:
    rows = payload.get("memory")
    failed = {f["plan"] for f in payload.get("failed_plans", [])}
    base = rule_plan(payload["instruction"], rows)
    for cand in _alternatives(base, rows):
        text = render_plan(cand)
        if text not in failed:
            return text + "\n"
    return "# no untried plan left\n"


# -- question answering ------------------------------------------------------

def _known_rows(payload: dict) -> list:
    by_id = {}
    for r in payload.get("memory") or []:
        by_id[r[0]] = r
    for r in payload.get("observed") or []:
        by_id[r[0]] = r
    return [by_id[k] for k in sorted(by_id)]


def _table_of(row, rows):
    if row[1] not in TABLE_ITEMS:
        return None
    t = _nearest(rows, "table", row)
    if t is None or _planar(t, row) > ON_TABLE_RANGE:
        return None
    return t


def _explore_or(payload: dict, fallback: str) -> str:
    if payload.get("force"):
        return f"ANSWER: {fallback}\n"
    visited = set(payload.get("visited", []))
    failed = set(payload.get("failures", []))
    rx, ry = payload.get("robot", [0.0, 0.0])
    avail = [c for c in payload.get("candidates", [])
             if c["name"] not in visited and c["name"] not in failed and c["xy"] not in failed
             and not c.get("occupied")]
    image = any(c.get("unknown") is not None for c in avail)
    if image:
        avail = [c for c in avail if c["unknown"] >= MIN_UNKNOWN]
    if not avail:
        return f"ANSWER: {fallback}\n"

    def key(c):
        d = math.hypot(c["x"] - rx, c["y"] - ry)
        if image:
            routed = c["route"] is not None
            return (not routed, -c["unknown"], c["route"] if routed else d, c["name"])
        return (d, c["name"])

    best = min(avail, key=key)
    return f"EXPLORE: {best['x']:.2f}, {best['y']:.2f}\n"


def _dist3(a, b) -> float:
    return math.dist(a[2:5], b[2:5])


def eqa_text(payload: dict) -> str:
    parsed = parse_question(payload["question"])
    if parsed is None:
        return "ANSWER: unknown\n"
    tid, slots = parsed
    rows = _known_rows(payload)

    if tid == 4:
        cat = from_display(slots["obj"])
        if cat is not None and _first(rows, cat) is not None:
            return "ANSWER: Yes\n"
        return _explore_or(payload, "No")
    if tid == 5:
        cats = AFFORDANCES.get(slots["activity"], frozenset())
        if any(_first(rows, c) is not None for c in sorted(cats)):
            return "ANSWER: Yes\n"
        return _explore_or(payload, "No")
    if tid == 2:
        a = _first(rows, from_display(slots["obj1"]) or "")
        b = _first(rows, from_display(slots["obj2"]) or "")
        if a is not None and b is not None:
            ta, tb = _table_of(a, rows), _table_of(b, rows)
            if ta is not None and tb is not None:
                return f"ANSWER: {'Yes' if ta[0] == tb[0] else 'No'}\n"
        return _explore_or(payload, "No")
    if tid == 3:
        a, b, c = (_first(rows, from_display(slots[k]) or "") for k in ("obj1", "obj2", "obj3"))
        if a is not None and b is not None and c is not None:
            return f"ANSWER: {'Yes' if _dist3(a, b) < _dist3(a, c) else 'No'}\n"
        return _explore_or(payload, "No")
    # template 1: items sharing a table with the named one
    x = _first(rows, from_display(slots["obj"]) or "")
    if x is not None:
        t = _table_of(x, rows)
        if t is not None:
            names = sorted({display(r[1]) for r in rows
                            if r[0] != x[0] and _table_of(r, rows) is not None and _table_of(r, rows)[0] == t[0]})
            if names:
                return f"ANSWER: {' and '.join(names)}\n"
    return _explore_or(payload, "nothing")
