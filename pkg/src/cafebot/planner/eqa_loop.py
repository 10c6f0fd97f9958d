"""Closed-loop embodied question answering: observe, judge, explore, repeat."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from ..mem.floorplan import OCCUPIED, UNKNOWN
from ..mem.memory import EnvironmentMemory, extract_object_observations, integrate_frame
from ..simworld.motion import follow_path, grid_graph, plan_path
from ..simworld.robot import RobotState
from ..simworld.scene import ROBOT_RADIUS, WorldScene
from ..simworld.sensors import observe_four_directions
from ..skills import APPROACH, resolve_target
from .backends import Backend, BackendRequest
from .core import PlanningError, memory_rows, plan_summary_text, rows_text
from .prompts import render_messages

EQA_TEMPLATE = "eqa_v1"
# unknown cells are counted within this radius of an exploration point
SCAN_RADIUS = 1.5
# a candidate or path sample this close to an occupied cell counts as blocked
CLEARANCE = ROBOT_RADIUS + 0.05
# a coordinate target counts as reached within this distance
GOAL_RADIUS = 0.2
# the robot's own cell may be blocked in memory; routes start from a free cell this close
START_SNAP = 0.3


@dataclass(frozen=True)
class EqaTurn:
    """One judgment: either ``sufficient`` with an answer or ``explore`` with a target.

    ``target`` is an ``(x, y)`` tuple or an item name.
    """

    question: str
    verdict: str
    answer: str | None = None
    target: tuple[float, float] | str | None = None

    def __post_init__(self):
        if self.verdict == "sufficient":
            ok = self.answer is not None and self.target is None
        elif self.verdict == "explore":
            ok = self.target is not None and self.answer is None
        else:
            ok = False
        if not ok:
            raise ValueError(f"malformed turn: {self.verdict!r}")


@dataclass(frozen=True)
class EqaCaps:
    max_explorations: int = 10
    candidate_spacing: float = 1.5

    def __post_init__(self):
        if self.max_explorations < 0:
            raise ValueError("max_explorations must be >= 0")


@dataclass
class EqaHistory:
    """Exploration state that multi-round answering carries between questions."""

    visited: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)


@dataclass
class EqaEpisode:
    answer: str
    ec: int
    upc: int
    path_length: float
    turns: list[EqaTurn]
    mem: EnvironmentMemory
    forced: bool = False

    @property
    def pl_cm(self) -> float:
        return self.path_length * 100.0


class EqaReplyError(ValueError):
    pass


_REPLY = re.compile(r"^\s*(ANSWER|EXPLORE)\s*:\s*(.*?)\s*$", re.IGNORECASE)
_COORDS = re.compile(r"^\(?\s*(-?\d+(?:\.\d*)?)\s*,\s*(-?\d+(?:\.\d*)?)(?:\s*,\s*-?\d+(?:\.\d*)?)?\s*\)?$")


def parse_eqa_reply(question: str, text: str) -> EqaTurn:
    for line in text.splitlines():
        m = _REPLY.match(line)
        if not m:
            continue
        kind, value = m.group(1).upper(), m.group(2)
        if not value:
            raise EqaReplyError(f"empty {kind.lower()} value")
        if kind == "ANSWER":
            return EqaTurn(question, "sufficient", answer=value)
        c = _COORDS.match(value)
        if c:
            return EqaTurn(question, "explore", target=(float(c.group(1)), float(c.group(2))))
        if re.fullmatch(r"[A-Za-z][A-Za-z0-9_ ]*", value):
            return EqaTurn(question, "explore", target=value.strip().lower().replace(" ", "_"))
        raise EqaReplyError(f"bad explore target {value!r}")
    raise EqaReplyError("expected a line starting with ANSWER: or EXPLORE:")


def fmt_xy(x: float, y: float) -> str:
    return f"{x:.2f}, {y:.2f}"


def _occupied_xy(mem: EnvironmentMemory) -> np.ndarray:
    plan = mem.plan
    ix, iy = np.nonzero(plan.state == OCCUPIED)
    return np.stack([plan.origin[0] + (ix + 0.5) * plan.cell_size,
                     plan.origin[1] + (iy + 0.5) * plan.cell_size], axis=1)


def _cell_centers(mem: EnvironmentMemory):
    plan = mem.plan
    cx = plan.origin[0] + (np.arange(plan.shape[0]) + 0.5) * plan.cell_size
    cy = plan.origin[1] + (np.arange(plan.shape[1]) + 0.5) * plan.cell_size
    return np.meshgrid(cx, cy, indexing="ij")


def route_lengths(mem: EnvironmentMemory, robot_xy) -> tuple[np.ndarray, np.ndarray]:
    """Route length from the robot to every floor-plan cell, judged from memory alone.

    Cells closer than :data:`CLEARANCE` to an occupied cell or to the
    boundary are blocked; unknown cells are assumed passable.  Returns
    ``(lengths, blocked)`` with ``inf`` for cells that cannot be reached.
    """
    plan = mem.plan
    gx, gy = _cell_centers(mem)
    xmin, ymin, xmax, ymax = mem.bounds
    blocked = (gx < xmin + ROBOT_RADIUS) | (gx > xmax - ROBOT_RADIUS) | (gy < ymin + ROBOT_RADIUS) | (gy > ymax - ROBOT_RADIUS)
    occ_xy = _occupied_xy(mem)
    if len(occ_xy):
        d, _ = cKDTree(occ_xy).query(np.stack([gx.ravel(), gy.ravel()], axis=1), k=1)
        blocked |= (d < CLEARANCE).reshape(gx.shape)
    free = ~blocked
    lengths = np.full(plan.shape, np.inf)
    d2 = (gx - float(robot_xy[0])) ** 2 + (gy - float(robot_xy[1])) ** 2
    d2 = np.where(free, d2, np.inf)
    k = int(np.argmin(d2))
    if not d2.ravel()[k] <= START_SNAP ** 2:
        return lengths, blocked
    dist = dijkstra(grid_graph(free, plan.cell_size), directed=False, indices=k)
    lengths = dist.reshape(plan.shape) + math.sqrt(d2.ravel()[k])
    return lengths, blocked


def exploration_candidates(mem: EnvironmentMemory, robot_xy, spacing: float = 1.5) -> list[dict]:
    """Lattice of exploration points over the memory bounds.

    With image memory each point carries the number of unknown floor-plan
    cells around it, whether it is blocked by mapped obstacles, and the
    length of the shortest route to it through the mapped free space
    (``None`` when there is none).  Without image memory those fields are
    None.
    """
    xmin, ymin, xmax, ymax = mem.bounds
    nx = max(1, int(round((xmax - xmin) / spacing)))
    ny = max(1, int(round((ymax - ymin) / spacing)))
    xs = xmin + (np.arange(nx) + 0.5) * (xmax - xmin) / nx
    ys = ymin + (np.arange(ny) + 0.5) * (ymax - ymin) / ny
    image = mem.image_memory
    if image:
        plan = mem.plan
        unknown = plan.state == UNKNOWN
        gx, gy = _cell_centers(mem)
        lengths, blocked = route_lengths(mem, robot_xy)
    out = []
    k = 0
    for y in ys:
        for x in xs:
            c = {"name": f"p{k}", "xy": fmt_xy(x, y), "x": round(float(x), 4), "y": round(float(y), 4),
                 "unknown": None, "occupied": None, "route": None}
            k += 1
            if image:
                c["unknown"] = int((unknown & ((gx - x) ** 2 + (gy - y) ** 2 <= SCAN_RADIUS ** 2)).sum())
                ix, iy = plan.cell_of(x, y)
                ix, iy = min(max(ix, 0), plan.shape[0] - 1), min(max(iy, 0), plan.shape[1] - 1)
                c["occupied"] = bool(blocked[ix, iy])
                near = ((gx - x) ** 2 + (gy - y) ** 2 <= GOAL_RADIUS ** 2) & np.isfinite(lengths)
                if near.any():
                    c["route"] = round(float(lengths[near].min()), 2)
            out.append(c)
    return out


def _candidate_text(c: dict) -> str:
    if c["unknown"] is None:
        return f"{c['name']}, {c['x']:.2f}, {c['y']:.2f}"
    route = f"route {c['route']:.1f} m" if c["route"] is not None else "no known route"
    return (f"{c['name']}, {c['x']:.2f}, {c['y']:.2f}, unknown {c['unknown']}, "
            f"{'occupied' if c['occupied'] else 'free'}, {route}")


def eqa_request(question: str, mem: EnvironmentMemory, history: EqaHistory, robot_xy,
                observed: list, candidates: list[dict], force: bool, parse_error: str | None = None) -> BackendRequest:
    payload = {
        "question": question,
        "memory": memory_rows(mem) if mem.language_memory else None,
        "floor_plan": mem.plan.summary() if mem.image_memory else None,
        "observed": observed,
        "candidates": candidates,
        "visited": list(history.visited),
        "failures": list(history.failures),
        "robot": [round(float(robot_xy[0]), 4), round(float(robot_xy[1]), 4)],
        "force": bool(force),
    }
    mem_text = rows_text(payload["memory"]) if payload["memory"] is not None else "(not available)"
    mem_text += "\n" + plan_summary_text(payload["floor_plan"])
    note = ""
    if parse_error:
        payload["parse_error"] = parse_error
        note = f"Your previous reply could not be parsed ({parse_error})."
    messages = render_messages(
        EQA_TEMPLATE,
        question=question,
        memory=mem_text,
        observed=rows_text(observed),
        candidates="\n".join(_candidate_text(c) for c in candidates) or "(none)",
        visited=", ".join(history.visited) or "(none)",
        failures="; ".join(history.failures) or "(none)",
        force="No exploration budget is left: reply with ANSWER now." if force else "",
        parse_error=note,
    )
    return BackendRequest("eqa", payload, messages)


def eqa_step(question: str, mem: EnvironmentMemory, history: EqaHistory, backend: Backend,
             robot_xy=(0.0, 0.0), observed=(), candidates=None, force: bool = False,
             spacing: float = 1.5) -> EqaTurn:
    """One sufficiency judgment, with one retry when the reply does not parse."""
    if candidates is None:
        candidates = exploration_candidates(mem, robot_xy, spacing)
    observed = [list(r) for r in observed]
    req = eqa_request(question, mem, history, robot_xy, observed, candidates, force)
    try:
        return parse_eqa_reply(question, backend.complete(req))
    except EqaReplyError as exc:
        first = str(exc)
    req = eqa_request(question, mem, history, robot_xy, observed, candidates, force, parse_error=first)
    try:
        return parse_eqa_reply(question, backend.complete(req))
    except EqaReplyError as exc:
        raise PlanningError(f"unparseable reply after retry: {exc}") from exc


def observe(scene: WorldScene, robot: RobotState, mem: EnvironmentMemory, step: int):
    """Four-direction observation folded into memory; also returns what was seen."""
    seen: dict[int, list] = {}
    for frame in observe_four_directions(scene, robot):
        found = extract_object_observations(frame, mem.zeta)
        mem = integrate_frame(mem, frame, step=step, observations=found)
        for obs in found:
            seen[obs.object_id] = [obs.object_id, obs.category, *(round(float(v), 4) for v in obs.world_pos)]
    return mem, [seen[k] for k in sorted(seen)]


def _explore_target(turn: EqaTurn, candidates: list[dict], mem: EnvironmentMemory, robot: RobotState):
    """Resolve a target to ``(xy, label, goal_radius)``; None if it names nothing known."""
    t = turn.target
    if isinstance(t, tuple):
        label = fmt_xy(*t)
        for c in candidates:
            if c["xy"] == label:
                return (c["x"], c["y"]), c["name"], GOAL_RADIUS
        return t, label, GOAL_RADIUS
    for c in candidates:
        if c["name"] == t:
            return (c["x"], c["y"]), c["name"], GOAL_RADIUS
    entry = resolve_target(t, mem, robot.xy)
    if entry is None:
        return None
    # items are approached, not entered
    return entry.world_pos[:2], t, APPROACH


def _go(scene: WorldScene, robot: RobotState, xy, radius: float) -> tuple[bool, float]:
    """Drive along a planned route to within ``radius`` of ``xy``; returns (reached, distance)."""
    x, y = float(xy[0]), float(xy[1])
    xmin, ymin, xmax, ymax = scene.bounds
    if not (math.isfinite(x) and math.isfinite(y) and xmin <= x <= xmax and ymin <= y <= ymax):
        return False, 0.0
    gx, gy = scene.cell_centers()
    path = plan_path(scene, robot.xy, np.hypot(gx - x, gy - y) <= radius)
    if path is None:
        return False, 0.0
    res = follow_path(scene, robot, path)
    return res.reached, res.path_length


def run_eqa_episode(question: str, scene: WorldScene, robot: RobotState, mem: EnvironmentMemory,
                    backend: Backend, caps: EqaCaps | None = None, history: EqaHistory | None = None,
                    step: int = 0) -> EqaEpisode:
    """Answer one question, exploring as the backend directs.

    ``robot`` is moved in place along planned routes.  EC counts every
    exploration the backend asks for; UPC counts the ones whose target is
    unknown, outside the floor or has no route.  After ``max_explorations``
    the backend is asked for a forced answer.
    """
    caps = caps or EqaCaps()
    history = history if history is not None else EqaHistory()
    mem, observed = observe(scene, robot, mem, step)
    ec = upc = 0
    length = 0.0
    turns: list[EqaTurn] = []
    while True:
        force = ec >= caps.max_explorations
        cands = exploration_candidates(mem, robot.xy, caps.candidate_spacing)
        turn = eqa_step(question, mem, history, backend, robot.xy, observed, cands, force)
        turns.append(turn)
        if turn.verdict == "sufficient":
            return EqaEpisode(turn.answer, ec, upc, length, turns, mem, force)
        if force:
            # the backend ignored the budget; give up without an answer
            return EqaEpisode("", ec, upc, length, turns, mem, True)
        ec += 1
        step += 1
        resolved = _explore_target(turn, cands, mem, robot)
        if resolved is None:
            upc += 1
            history.failures.append(str(turn.target))
            continue
        xy, label, radius = resolved
        reached, dist = _go(scene, robot, xy, radius)
        length += dist
        if reached:
            if label not in history.visited:
                history.visited.append(label)
        else:
            upc += 1
            if label not in history.failures:
                history.failures.append(label)
            if dist == 0.0:
                continue
        mem, observed = observe(scene, robot, mem, step)
