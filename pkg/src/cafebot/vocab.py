"""Text vocabulary shared by generators and the rule-based planners.

Instruction phrases, question templates, and the affordance table live here
so that text produced by one side is parsed by the same table on the other.
"""

from __future__ import annotations

import re

from .simworld.scene import CATEGORIES


def display(category: str) -> str:
    return category.replace("_", " ")


def from_display(name: str) -> str | None:
    cat = name.strip().lower().replace(" ", "_")
    return cat if cat in CATEGORIES else None


# Categories that exist at most once in the instruction-eval cafe and can
# anchor a spatial reference ("the table near the kettle").
LANDMARKS: tuple[str, ...] = (
    "coffee_machine", "kettle", "towel", "mop", "floor_scrubber", "stain", "air_conditioner",
)

# kind -> phrasings.  ``{landmark}`` is a landmark display name.
SUBTASK_PHRASES: dict[str, tuple[str, ...]] = {
    "coffee": ("make me a cup of coffee", "I'd love a fresh coffee"),
    "milk": ("bring me a glass of milk", "I'd like some milk"),
    "water": ("pour some water", "could you pour me some water"),
    "bread": ("grab me some bread", "get me a piece of bread"),
    "ac_on": ("turn on the air conditioner",),
    "ac_off": ("turn off the air conditioner",),
    "ac_cooler": ("it's a bit too warm in here",),
    "ac_warmer": ("it's a bit too cold in here",),
    "mop": ("somebody spilled something on the floor", "please mop up the spill on the floor"),
    "wipe": ("the table near the {landmark} is dirty", "please clean the table next to the {landmark}"),
    "curtain_open": ("open the curtain near the {landmark}",),
    "curtain_close": ("close the curtain near the {landmark}", "draw the curtain by the {landmark}"),
    "light_on": ("turn on the light by the {landmark}", "switch the light on over by the {landmark}"),
    "light_off": ("turn off the light by the {landmark}",),
    "chair": ("the chair next to the {landmark} is out of place", "straighten the chair near the {landmark}"),
}

# kind -> category that a landmark-anchored subtask refers to
SPATIAL_TARGET: dict[str, str] = {
    "wipe": "table",
    "curtain_open": "curtain",
    "curtain_close": "curtain",
    "light_on": "light_switch",
    "light_off": "light_switch",
    "chair": "chair",
}

OPENERS = ("", "Hi there! ", "Excuse me, ", "Hey robot, ")
JOINERS = (", and ", ". Also, ", ", then ", "; after that, ")
CLOSERS = (".", ". Thanks!", ", please.")


def _phrase_regex(phrase: str) -> re.Pattern:
    lm = "|".join(re.escape(display(c)) for c in LANDMARKS)
    parts = phrase.split("{landmark}")
    body = f"(?P<landmark>{lm})".join(re.escape(p) for p in parts)
    return re.compile(body, re.IGNORECASE)


# Recognized by the planners but never generated.
SUBTASK_ALIASES: dict[str, tuple[str, ...]] = {
    "coffee": ("make a cup of coffee",),
    "wipe": ("the table is dirty",),
}

SUBTASK_PATTERNS: dict[str, tuple[re.Pattern, ...]] = {
    kind: tuple(_phrase_regex(p) for p in phrases + SUBTASK_ALIASES.get(kind, ()))
    for kind, phrases in SUBTASK_PHRASES.items()
}


def find_subtasks(text: str) -> list[tuple[str, str | None]]:
    """All vocabulary phrases in ``text`` as ``(kind, landmark category)``, in reading order."""
    hits = []
    for kind, pats in SUBTASK_PATTERNS.items():
        for pat in pats:
            for m in pat.finditer(text):
                lm = m.groupdict().get("landmark")
                hits.append((m.start(), -len(m.group(0)), kind, from_display(lm) if lm else None))
    hits.sort()
    out: list[tuple[str, str | None]] = []
    last_end = -1
    for start, neg_len, kind, lm in hits:
        if start < last_end:
            continue
        out.append((kind, lm))
        last_end = start - neg_len
    return out


# -- embodied QA -------------------------------------------------------------

QUESTION_TEMPLATES: dict[int, str] = {
    1: "What is the item on the same table as the {obj}?",
    2: "Are the {obj1} and the {obj2} on the same table?",
    3: "Is the {obj1} closer to the {obj2} than to the {obj3}?",
    4: "Is there any {obj} in the cafe?",
    5: "Is there anything in the cafe that I can use to {activity}?",
}
TEMPLATE_QTYPE: dict[int, str] = {1: "location", 2: "location", 3: "comparing", 4: "existence", 5: "existence"}
YES_NO_TEMPLATES = (2, 3, 4, 5)

AFFORDANCES: dict[str, frozenset[str]] = {
    "clean the floor": frozenset({"mop", "floor_scrubber"}),
    "make coffee": frozenset({"coffee_machine"}),
    "boil some water": frozenset({"kettle"}),
    "drink something": frozenset({"cup"}),
    "wipe a table": frozenset({"towel"}),
    "sit down": frozenset({"chair"}),
    "put my laptop down": frozenset({"table"}),
    "have a snack": frozenset({"bread"}),
    "cool down the room": frozenset({"air_conditioner"}),
    "block the sunlight": frozenset({"curtain"}),
    "turn on the lights": frozenset({"light_switch"}),
}

# Things that are never in the catalog; used for "no" existence questions.
DISTRACTORS: tuple[str, ...] = ("piano", "microwave", "bookshelf", "umbrella stand", "fish tank", "guitar")


def _template_regex(template: str) -> re.Pattern:
    out = re.escape(template)
    for slot in ("obj1", "obj2", "obj3", "obj", "activity"):
        out = out.replace(re.escape("{" + slot + "}"), f"(?P<{slot}>.+?)")
    return re.compile("^" + out + "$", re.IGNORECASE)


TEMPLATE_PATTERNS: dict[int, re.Pattern] = {t: _template_regex(s) for t, s in QUESTION_TEMPLATES.items()}


def parse_question(question: str) -> tuple[int, dict[str, str]] | None:
    """Match a question against the templates; returns ``(template_id, slots)``."""
    q = question.strip()
    for t, pat in TEMPLATE_PATTERNS.items():
        m = pat.match(q)
        if m:
            return t, {k: v.strip().lower() for k, v in m.groupdict().items()}
    return None


def normalize_answer(text: str) -> str:
    """Lowercase, drop punctuation, collapse whitespace, and map yes/no variants."""
    t = re.sub(r"[^\w\s]", " ", str(text).lower())
    t = " ".join(t.split())
    if t in ("yes", "y", "yeah", "yep", "true") or t.startswith("yes "):
        return "yes"
    if t in ("no", "n", "nope", "false") or t.startswith("no "):
        return "no"
    return t
