"""Text backends behind the planner.

A backend turns a :class:`BackendRequest` into reply text.  The request
carries both the rendered chat messages (for remote models) and the
structured payload they were rendered from (for the scripted oracle and
for hashing).
"""

from __future__ import annotations

import hashlib
import json
import os
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

DEFAULT_TIMEOUT = 60.0


class BackendError(RuntimeError):
    pass


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class BackendRequest:
    task: str
    payload: dict
    messages: list = field(default_factory=list, compare=False)

    def key(self) -> str:
        """Stable hash of task and payload.  Payloads never hold raster bytes."""
        blob = canonical_json({"task": self.task, "payload": self.payload})
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Backend(Protocol):
    name: str

    def complete(self, request: BackendRequest) -> str: ...


class ScriptedBackend:
    """Deterministic rule-table backend; a pure function of the payload."""

    name = "scripted"

    def complete(self, request: BackendRequest) -> str:
        from . import oracle

        if request.task == "plan":
            return oracle.plan_text(request.payload)
        if request.task == "eqa":
            return oracle.eqa_text(request.payload)
        raise BackendError(f"scripted backend has no rules for task {request.task!r}")


class RemoteBackend:
    """Generic chat-completion client.

    Endpoint and key come from ``PLANNER_ENDPOINT`` and ``PLANNER_API_KEY``
    unless passed explicitly.
    """

    name = "remote"

    def __init__(self, endpoint: str | None = None, api_key: str | None = None,
                 model: str = "default", timeout: float = DEFAULT_TIMEOUT):
        self.endpoint = endpoint or os.environ.get("PLANNER_ENDPOINT")
        self.api_key = api_key if api_key is not None else os.environ.get("PLANNER_API_KEY")
        self.model = model
        self.timeout = timeout
        if not self.endpoint:
            raise BackendError("PLANNER_ENDPOINT is not set")

    def body(self, request: BackendRequest) -> dict:
        return {"model": self.model, "messages": list(request.messages), "temperature": 0}

    def complete(self, request: BackendRequest) -> str:
        data = json.dumps(self.body(request)).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(self.endpoint, data=data, headers=headers, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                doc = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise BackendError(f"transport error: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise BackendError(f"response is not JSON: {exc}") from exc
        try:
            content = doc["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError("response has no choices[0].message.content") from exc
        if not isinstance(content, str):
            raise BackendError("message content is not text")
        return content


class RecordedBackend:
    """Replays transcripts stored as ``<request hash>.json`` in a directory."""

    name = "recorded"

    def __init__(self, store: str | Path):
        self.store = Path(store)
        if not self.store.is_dir():
            raise BackendError(f"transcript store {self.store} is not a directory")

    def complete(self, request: BackendRequest) -> str:
        path = self.store / f"{request.key()}.json"
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise BackendError(f"no recorded response for request {request.key()[:12]}") from None
        except json.JSONDecodeError as exc:
            raise BackendError(f"corrupt transcript {path.name}: {exc}") from exc
        return str(doc["response"])


class RecordingBackend:
    """Wraps another backend and writes every exchange to a transcript store."""

    def __init__(self, inner: Backend, store: str | Path):
        self.inner = inner
        self.store = Path(store)
        self.store.mkdir(parents=True, exist_ok=True)
        self.name = f"recording({inner.name})"

    def complete(self, request: BackendRequest) -> str:
        text = self.inner.complete(request)
        doc = {"request": {"task": request.task, "payload": request.payload}, "response": text}
        path = self.store / f"{request.key()}.json"
        path.write_text(json.dumps(doc, sort_keys=True, indent=1), encoding="utf-8")
        return text


def make_backend(spec: str) -> Backend:
    """``scripted``, ``remote``, ``recorded:<dir>`` or ``record:<dir>`` (scripted, recorded to dir)."""
    if spec == "scripted":
        return ScriptedBackend()
    if spec == "remote":
        return RemoteBackend()
    if spec.startswith("recorded:"):
        return RecordedBackend(spec.split(":", 1)[1])
    if spec.startswith("record:"):
        return RecordingBackend(ScriptedBackend(), spec.split(":", 1)[1])
    raise BackendError(f"unknown backend {spec!r}")


@dataclass
class BackendSlots:
    """Backends per model role: summarization, planning and vision judgment."""

    planning: Backend
    vision: Backend | None = None
    summarization: Backend | None = None

    def for_eqa(self) -> Backend:
        return self.vision or self.planning
