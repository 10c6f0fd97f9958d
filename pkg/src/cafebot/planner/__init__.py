"""Planning: plan grammar, planner backends, and the closed-loop question answerer."""

from .backends import (
    Backend,
    BackendError,
    BackendRequest,
    BackendSlots,
    RecordedBackend,
    RecordingBackend,
    RemoteBackend,
    ScriptedBackend,
    make_backend,
)
from .core import PlannerRequest, PlanningError, plan
from .eqa_loop import (
    EqaCaps,
    EqaEpisode,
    EqaHistory,
    EqaReplyError,
    EqaTurn,
    eqa_step,
    exploration_candidates,
    parse_eqa_reply,
    run_eqa_episode,
)
from .grammar import Plan, PlanParseError, parse_plan, render_plan
from .oracle import eqa_text, plan_text

__all__ = [
    "Backend",
    "BackendError",
    "BackendRequest",
    "BackendSlots",
    "EqaCaps",
    "EqaEpisode",
    "EqaHistory",
    "EqaReplyError",
    "EqaTurn",
    "Plan",
    "PlanParseError",
    "PlannerRequest",
    "PlanningError",
    "RecordedBackend",
    "RecordingBackend",
    "RemoteBackend",
    "ScriptedBackend",
    "eqa_step",
    "eqa_text",
    "exploration_candidates",
    "make_backend",
    "parse_eqa_reply",
    "parse_plan",
    "plan",
    "plan_text",
    "render_plan",
    "run_eqa_episode",
]
