"""Line-oriented plan grammar.

One step per line::

    move_to(bar_table)     # trailing comments are allowed
    make_coffee()

Blank lines and ``#`` comment lines are ignored.  A leading list marker
(``1.``, ``2)``, ``-`` or ``*``) is tolerated since chat models like to
number their steps.  Arguments may be wrapped in single or double quotes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..skills import SkillAction, validate_action


class PlanParseError(ValueError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


@dataclass(frozen=True)
class Plan:
    steps: tuple[SkillAction, ...] = ()
    raw_text: str = field(default="", compare=False)

    def __len__(self) -> int:
        return len(self.steps)

    def render(self) -> str:
        return render_plan(self)


_LINE = re.compile(
    r"^(?:(?:\d+[.)]|[-*])\s+)?(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*\((?P<args>[^()]*)\)\s*(?:#.*)?$"
)


def _strip_quotes(s: str) -> str:
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "'\"":
        return s[1:-1].strip()
    return s


def parse_plan(text: str) -> Plan:
    """Parse plan text; raises :class:`PlanParseError` with a 1-based line number."""
    steps = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            raise PlanParseError(n, f"expected skill_name(arg, ...), got {line!r}")
        arg_text = m.group("args").strip()
        args = tuple(_strip_quotes(a.strip()) for a in arg_text.split(",")) if arg_text else ()
        if any(a == "" for a in args):
            raise PlanParseError(n, "empty argument")
        action = SkillAction(m.group("name"), args)
        err = validate_action(action)
        if err is not None:
            if err.startswith("unknown skill"):
                raise PlanParseError(n, f"unknown skill {action.kind}")
            raise PlanParseError(n, err)
        steps.append(action)
    return Plan(tuple(steps), text)


def render_plan(plan: Plan) -> str:
    return "\n".join(s.render() for s in plan.steps)
