"""Planner requests and the plan call with one parse retry."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..mem.memory import EnvironmentMemory
from ..skills import catalog_text
from .backends import Backend, BackendRequest
from .grammar import Plan, PlanParseError, parse_plan
from .prompts import render_messages

PLAN_TEMPLATE = "plan_v1"


class PlanningError(RuntimeError):
    pass


def memory_rows(mem: EnvironmentMemory) -> list[list]:
    """Language memory as ``[id, category, x, y, z]`` rows, rounded to 0.1 mm."""
    return [[e.object_id, e.category, *(round(v, 4) for v in e.world_pos)] for e in mem.entries()]


def rows_text(rows) -> str:
    if not rows:
        return "(nothing)"
    return "\n".join(f"{r[0]}, {r[1]}, ({r[2]:.2f}, {r[3]:.2f}, {r[4]:.2f})" for r in rows)


def plan_summary_text(summary: dict | None) -> str:
    if summary is None:
        return "floor plan: not available"
    b = summary["bounds"]
    return (
        f"floor plan: bounds ({b[0]:.1f}, {b[1]:.1f})-({b[2]:.1f}, {b[3]:.1f}), "
        f"cell {summary['cell_size']:.2f} m, occupied {summary['occupied_fraction']:.3f}, "
        f"known {summary['known_fraction']:.3f}"
    )


def _rounded_summary(mem: EnvironmentMemory) -> dict:
    s = mem.plan.summary()
    return {k: (round(v, 6) if isinstance(v, float) else v) for k, v in s.items()}


@dataclass(frozen=True)
class PlannerRequest:
    """Everything a planner sees.  ``failed_plans`` is ordered oldest first.

    ``language_memory`` is None when the language half of memory is withheld;
    ``floor_plan`` (a summary, never raster bytes) is None when the image half is.
    """

    instruction: str
    catalog: str = field(default_factory=catalog_text)
    language_memory: tuple[tuple, ...] | None = None
    floor_plan: dict | None = None
    failed_plans: tuple[tuple[Plan, str], ...] = ()

    @classmethod
    def build(cls, instruction: str, mem: EnvironmentMemory | None, failed_plans=(),
              use_language: bool = True, use_image: bool = True) -> "PlannerRequest":
        lang = img = None
        if mem is not None and use_language and mem.language_memory:
            lang = tuple(tuple(r) for r in memory_rows(mem))
        if mem is not None and use_image and mem.image_memory:
            img = _rounded_summary(mem)
        return cls(instruction, catalog_text(), lang, img, tuple(failed_plans))

    def payload(self) -> dict:
        return {
            "instruction": self.instruction,
            "catalog": self.catalog,
            "memory": None if self.language_memory is None else [list(r) for r in self.language_memory],
            "floor_plan": self.floor_plan,
            "failed_plans": [{"plan": p.render(), "reason": r} for p, r in self.failed_plans],
        }

    def memory_text(self) -> str:
        if self.language_memory is None and self.floor_plan is None:
            return "(not available)"
        parts = []
        if self.language_memory is not None:
            parts.append(rows_text(self.language_memory))
        parts.append(plan_summary_text(self.floor_plan))
        return "\n".join(parts)

    def failures_text(self) -> str:
        if not self.failed_plans:
            return "(none)"
        blocks = []
        for k, (p, reason) in enumerate(self.failed_plans, start=1):
            blocks.append(f"attempt {k} failed: {reason}\n{p.render()}")
        return "\n\n".join(blocks)

    def to_backend(self, parse_error: str | None = None) -> BackendRequest:
        payload = self.payload()
        note = ""
        if parse_error:
            payload["parse_error"] = parse_error
            note = f"Your previous reply could not be parsed ({parse_error}). Reply with skill calls only."
        messages = render_messages(
            PLAN_TEMPLATE,
            catalog=self.catalog,
            memory=self.memory_text(),
            failures=self.failures_text(),
            instruction=self.instruction,
            parse_error=note,
        )
        return BackendRequest("plan", payload, messages)


def plan(req: PlannerRequest, backend: Backend) -> Plan:
    """Ask ``backend`` for a plan; on a parse error retry once with the error shown."""
    text = backend.complete(req.to_backend())
    try:
        return parse_plan(text)
    except PlanParseError as exc:
        first = str(exc)
    text = backend.complete(req.to_backend(parse_error=first))
    try:
        return parse_plan(text)
    except PlanParseError as exc:
        raise PlanningError(f"unparseable plan after retry: {exc}") from exc
