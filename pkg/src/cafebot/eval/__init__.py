"""Evaluation: exploration tour, instruction generation, metrics, reports and harnesses."""

from .harness import Ablation, eqa_subset, explored, run_eqa_eval, run_instruction_eval
from .instructions import (
    GenerationError,
    Goal,
    InstructionCase,
    Subtask,
    dump_cases,
    generate_instructions,
    load_cases,
    validate_case,
)
from .metrics import InvalidCaseError, PlanScore, correct_steps, esr, lcs_length, ssl
from .report import EvalReport, build_report, recompute
from .tour import TourLog, run_tour

__all__ = [
    "Ablation",
    "EvalReport",
    "GenerationError",
    "Goal",
    "InstructionCase",
    "InvalidCaseError",
    "PlanScore",
    "Subtask",
    "TourLog",
    "build_report",
    "correct_steps",
    "dump_cases",
    "eqa_subset",
    "esr",
    "explored",
    "generate_instructions",
    "lcs_length",
    "load_cases",
    "recompute",
    "run_eqa_eval",
    "run_instruction_eval",
    "run_tour",
    "ssl",
    "validate_case",
]
