"""Versioned prompt templates shipped under ``cafebot/data/prompts``."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from string import Template

SEPARATOR = "=== user ==="


@lru_cache(maxsize=None)
def load_template(name: str) -> tuple[Template, Template]:
    """Return the (system, user) templates of ``<name>.txt``."""
    text = resources.files("cafebot").joinpath(f"data/prompts/{name}.txt").read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if not ln.startswith("# template:")]
    body = "\n".join(lines)
    system, user = body.split(SEPARATOR, 1)
    return Template(system.strip()), Template(user.strip())


def render_messages(name: str, **fields) -> list[dict]:
    system, user = load_template(name)
    return [
        {"role": "system", "content": system.substitute(**fields)},
        {"role": "user", "content": user.substitute(**fields).rstrip() + "\n"},
    ]
