"""Executable success rate and step-length weighted success."""

from __future__ import annotations

from dataclasses import dataclass

from ..skills import SkillAction


class InvalidCaseError(ValueError):
    pass


def esr(n_e: int, n: int) -> float:
    """Fraction of successful executions."""
    if n <= 0 or not 0 <= n_e <= n:
        raise ValueError(f"need 0 <= n_e <= N and N > 0, got {n_e}/{n}")
    return n_e / n


def step_key(action: SkillAction) -> tuple:
    """Comparison key for steps: move_to targets compare by category only."""
    if action.kind == "move_to":
        return ("move_to", action.target_category() or action.args[0])
    return (action.kind, *action.args)


def lcs_length(a, b) -> int:
    """Length of the longest common subsequence of two sequences."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for k, y in enumerate(b, start=1):
            cur.append(prev[k - 1] + 1 if x == y else max(prev[k], cur[k - 1]))
        prev = cur
    return prev[-1]


def correct_steps(generated, grounding) -> int:
    return lcs_length([step_key(s) for s in generated], [step_key(s) for s in grounding])


@dataclass(frozen=True)
class PlanScore:
    s: int
    l_g: int
    l_p: int
    l_c: int

    def __post_init__(self):
        if self.s not in (0, 1):
            raise ValueError("s must be 0 or 1")
        if min(self.l_g, self.l_p, self.l_c) < 0:
            raise ValueError("step counts must be >= 0")
        if self.l_c > min(self.l_g, self.l_p):
            raise ValueError("l_c cannot exceed either plan length")

    @classmethod
    def of(cls, success: bool, generated, grounding) -> "PlanScore":
        return cls(int(bool(success)), len(grounding), len(generated), correct_steps(generated, grounding))

    def weighted(self) -> float:
        if self.l_g <= 0:
            raise InvalidCaseError("grounding plan has no steps")
        return self.s * self.l_c / max(self.l_g, self.l_p)

    def to_json(self) -> dict:
        return {"s": self.s, "l_g": self.l_g, "l_p": self.l_p, "l_c": self.l_c}


def ssl(scores) -> float:
    """Mean of ``s * l_c / max(l_g, l_p)`` over cases."""
    scores = list(scores)
    if not scores:
        raise ValueError("ssl of no cases")
    return sum(sc.weighted() for sc in scores) / len(scores)
