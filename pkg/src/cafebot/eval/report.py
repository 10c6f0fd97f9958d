"""Evaluation reports: JSON documents with per-case records and recomputable aggregates."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .metrics import PlanScore, esr, ssl


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _round(obj, nd: int = 6):
    if isinstance(obj, float):
        return round(obj, nd)
    if isinstance(obj, dict):
        return {k: _round(v, nd) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, nd) for v in obj]
    return obj


@dataclass
class EvalReport:
    kind: str
    seed: int
    config: dict
    records: list[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    thresholds_missed: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return _round({
            "kind": self.kind,
            "seed": self.seed,
            "config": self.config,
            "config_hash": config_hash(self.config),
            "records": self.records,
            "aggregates": self.aggregates,
            "thresholds_missed": self.thresholds_missed,
        })

    def dumps(self) -> bytes:
        return (json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n").encode("utf-8")

    def summary(self) -> str:
        lines = [f"{self.kind} evaluation  seed={self.seed}  cases={len(self.records)}  config={config_hash(self.config)}"]
        for k in sorted(self.aggregates):
            v = self.aggregates[k]
            lines.append(f"  {k:<16} {v:.4f}" if isinstance(v, float) else f"  {k:<16} {v}")
        if self.thresholds_missed:
            lines.append("  thresholds missed: " + ", ".join(self.thresholds_missed))
        return "\n".join(lines) + "\n"

    def check_thresholds(self, thresholds: dict | None) -> list[str]:
        """Minimums for rate metrics; maximums for EC/UPC/PL (keys ending in ``_max``)."""
        missed = []
        for key, bound in sorted((thresholds or {}).items()):
            if key.endswith("_max"):
                name = key[:-4]
                if name in self.aggregates and self.aggregates[name] > bound:
                    missed.append(f"{name}>{bound}")
            elif key in self.aggregates and self.aggregates[key] < bound:
                missed.append(f"{key}<{bound}")
        self.thresholds_missed = missed
        return missed


def instruction_aggregates(records: list[dict]) -> dict:
    """ESR over instructions, ESR over sub-tasks (macro-averaged per instruction) and SSL."""
    n = len(records)
    if n == 0:
        return {"N": 0}
    scores = [PlanScore(**r["score"]) for r in records]
    n_e = sum(sc.s for sc in scores)
    sub = [sum(r["subtask_success"]) / len(r["subtask_success"]) for r in records]
    return {
        "N": n,
        "ESR_instruction": esr(n_e, n),
        "ESR_subtask": sum(sub) / n,
        "SSL": ssl(scores),
    }


def eqa_aggregates(records: list[dict]) -> dict:
    n = len(records)
    if n == 0:
        return {"N": 0}
    return {
        "N": n,
        "ACC": sum(r["correct"] for r in records) / n,
        "EC": sum(r["ec"] for r in records) / n,
        "UPC": sum(r["upc"] for r in records) / n,
        "PL": sum(r["pl_cm"] for r in records) / n,
    }


def recompute(report_doc: dict) -> dict:
    """Aggregates recomputed from a report document's records."""
    fn = instruction_aggregates if report_doc["kind"] == "instruction" else eqa_aggregates
    return _round(fn(report_doc["records"]))


def build_report(kind: str, seed: int, config: dict, records: list[dict]) -> EvalReport:
    """Round records first so stored aggregates equal a recomputation from stored records."""
    records = _round(records)
    fn = instruction_aggregates if kind == "instruction" else eqa_aggregates
    return EvalReport(kind, seed, config, records, _round(fn(records)))
