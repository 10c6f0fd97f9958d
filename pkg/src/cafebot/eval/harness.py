"""The three-phase instruction pipeline and the question-answering evaluation."""

from __future__ import annotations

import random
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache

from ..mem.memory import EnvironmentMemory
from ..planner.backends import Backend, BackendError
from ..planner.core import PlannerRequest, PlanningError, plan
from ..planner.eqa_loop import EqaCaps, EqaHistory, run_eqa_episode
from ..planner.grammar import Plan
from ..simworld.fixtures import default_start
from ..simworld.robot import RobotState
from ..simworld.scene import WorldScene, scene_from_dict
from ..skills import execute
from ..vocab import normalize_answer
from .instructions import InstructionCase
from .metrics import PlanScore
from .report import EvalReport, build_report
from .tour import run_tour


@dataclass(frozen=True)
class Ablation:
    """Which halves of memory the planner sees."""

    no_mem: bool = False
    no_lang: bool = False
    no_image: bool = False

    @property
    def use_language(self) -> bool:
        return not (self.no_mem or self.no_lang)

    @property
    def use_image(self) -> bool:
        return not (self.no_mem or self.no_image)


@lru_cache(maxsize=8)
def _cached_tour(scene_json: str):
    import json

    scene = scene_from_dict(json.loads(scene_json))
    mem, robot, log = run_tour(scene)
    return mem, robot


def explored(scene: WorldScene) -> tuple[EnvironmentMemory, RobotState]:
    """Memory and robot after the exploration tour (cached per scene layout)."""
    mem, robot = _cached_tour(scene.dumps())
    return mem, robot.copy()


def _map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def run_instruction_case(case: InstructionCase, scene: WorldScene, backend: Backend,
                         ablation: Ablation = Ablation(), max_attempts: int = 1) -> dict:
    """Plan and execute one case.  Later steps still run after a failed one.

    With ``max_attempts`` > 1 a failed attempt is fed back to the planner and
    the world is reset before the next attempt.
    """
    mem, robot0 = explored(scene)
    failed: list[tuple[Plan, str]] = []
    record = None
    for attempt in range(1, max_attempts + 1):
        world = case.prepare(scene)
        robot = robot0.copy()
        req = PlannerRequest.build(case.text, mem, failed, ablation.use_language, ablation.use_image)
        error = None
        try:
            p = plan(req, backend)
        except (PlanningError, BackendError) as exc:
            p, error = Plan(()), str(exc)
        steps = []
        for action in p.steps:
            out = execute(action, world, robot, mem)
            steps.append({"action": action.render(), **out.to_json()})
        goals = case.goals_met(world)
        ok = error is None and len(p.steps) > 0 and all(s["success"] for s in steps) and all(goals)
        score = PlanScore.of(ok, p.steps, case.grounding_plan.steps)
        record = {
            "instruction": case.text,
            "plan": p.render(),
            "attempts": attempt,
            "error": error,
            "steps": steps,
            "subtask_success": goals,
            "score": score.to_json(),
        }
        if ok:
            break
        first_bad = next((s for s in steps if not s["success"]), None)
        if first_bad is not None:
            reason = f"{first_bad['action']} failed: {first_bad['reason']} {first_bad['detail']}".strip()
        elif error is not None:
            reason = error
        else:
            reason = "the request was not fulfilled"
        failed.append((p, reason))
    return record


def run_instruction_eval(cases, backend: Backend, scene: WorldScene, seed: int = 0,
                         ablation: Ablation = Ablation(), max_attempts: int = 1, jobs: int = 1,
                         config: dict | None = None) -> EvalReport:
    cases = list(cases)
    records = _map(lambda c: run_instruction_case(c, scene, backend, ablation, max_attempts), cases, jobs)
    for k, r in enumerate(records):
        r["index"] = k
    cfg = {"ablation": asdict(ablation), "max_attempts": max_attempts, "backend": getattr(backend, "name", "?")}
    cfg.update(config or {})
    return build_report("instruction", seed, cfg, records)


# -- question answering ------------------------------------------------------

def group_by_scene(items) -> "OrderedDict[str, list]":
    groups: OrderedDict[str, list] = OrderedDict()
    for it in items:
        groups.setdefault(it.scene_id, []).append(it)
    return groups


def eqa_subset(items, n_scenes: int = 6, seed: int = 0) -> list:
    """All questions of ``n_scenes`` randomly chosen scenes, in dataset order."""
    groups = group_by_scene(items)
    ids = list(groups)
    chosen = set(random.Random(seed).sample(ids, min(n_scenes, len(ids))))
    return [it for it in items if it.scene_id in chosen]


def _run_scene(items, backend: Backend, mode: str, caps: EqaCaps, ablation: Ablation) -> list[dict]:
    scene = scene_from_dict(items[0].scene)
    start = default_start(scene)

    def fresh():
        mem = EnvironmentMemory.empty(scene.bounds, language_memory=ablation.use_language,
                                      image_memory=ablation.use_image)
        return mem, RobotState.at(*start), EqaHistory()

    mem, robot, history = fresh()
    out = []
    step = 0
    for it in items:
        if mode == "single":
            mem, robot, history = fresh()
            step = 0
        err = None
        try:
            ep = run_eqa_episode(it.question, scene, robot, mem, backend, caps, history, step)
        except (PlanningError, BackendError) as exc:
            ep, err = None, str(exc)
        if ep is not None:
            mem = ep.mem
            step += ep.ec + 1
            pred, ec, upc, pl = ep.answer, ep.ec, ep.upc, ep.pl_cm
        else:
            pred, ec, upc, pl = "", 0, 0, 0.0
        out.append({
            "scene_id": it.scene_id,
            "template_id": it.template_id,
            "question": it.question,
            "expected": it.answer,
            "predicted": pred,
            "correct": normalize_answer(pred) == normalize_answer(it.answer),
            "ec": ec,
            "upc": upc,
            "pl_cm": pl,
            "error": err,
        })
    return out


def run_eqa_eval(items, backend: Backend, mode: str = "single", caps: EqaCaps | None = None,
                 ablation: Ablation = Ablation(), seed: int = 0, jobs: int = 1,
                 config: dict | None = None) -> EvalReport:
    """Answer every item; ``multi`` carries memory, robot and history across a scene's questions."""
    if mode not in ("single", "multi"):
        raise ValueError("mode must be 'single' or 'multi'")
    caps = caps or EqaCaps()
    groups = list(group_by_scene(items).values())
    per_scene = _map(lambda g: _run_scene(g, backend, mode, caps, ablation), groups, jobs)
    records = [r for recs in per_scene for r in recs]
    cfg = {"mode": mode, "caps": asdict(caps), "ablation": asdict(ablation), "backend": getattr(backend, "name", "?")}
    cfg.update(config or {})
    return build_report("eqa", seed, cfg, records)
