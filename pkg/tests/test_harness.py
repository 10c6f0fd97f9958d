import pytest

from cafebot import eqa
from cafebot.eval.harness import Ablation, eqa_subset, group_by_scene, run_eqa_eval, run_instruction_eval
from cafebot.eval.instructions import generate_instructions
from cafebot.eval.report import recompute
from cafebot.planner.backends import BackendError, ScriptedBackend
from cafebot.planner.eqa_loop import EqaCaps


class BrokenBackend:
    name = "broken"

    def complete(self, request):
        raise BackendError("connection refused")


@pytest.fixture(scope="module")
def cases(cafe, explored_cafe):
    mem, robot = explored_cafe
    return generate_instructions(3, "short", 6, cafe, robot, mem)


@pytest.fixture(scope="module")
def report(cafe, cases):
    return run_instruction_eval(cases, ScriptedBackend(), cafe, seed=3)


@pytest.fixture(scope="module")
def eqa_items():
    items = eqa.generate_dataset(2, 1)
    return items


def _chain(agg):
    return agg["SSL"] <= agg["ESR_instruction"] <= agg["ESR_subtask"]


class TestInstructionEval:
    def test_scripted_solves_all(self, report):
        assert report.aggregates["ESR_instruction"] == 1.0
        assert report.aggregates["N"] == 6

    def test_recompute(self, report):
        doc = report.to_json()
        assert recompute(doc) == doc["aggregates"]

    def test_chain(self, report):
        assert _chain(report.aggregates)

    def test_deterministic(self, cafe, cases, report):
        again = run_instruction_eval(cases, ScriptedBackend(), cafe, seed=3)
        assert again.dumps() == report.dumps()

    def test_parallel_lanes_match(self, cafe, cases, report):
        par = run_instruction_eval(cases, ScriptedBackend(), cafe, seed=3, jobs=3)
        assert par.dumps() == report.dumps()

    def test_ablation_hurts(self, cafe, cases, report):
        ab = run_instruction_eval(cases, ScriptedBackend(), cafe, seed=3, ablation=Ablation(no_mem=True))
        assert ab.aggregates["ESR_instruction"] < report.aggregates["ESR_instruction"]
        assert _chain(ab.aggregates)
        assert recompute(ab.to_json()) == ab.to_json()["aggregates"]

    def test_backend_failure_recorded(self, cafe, cases):
        rep = run_instruction_eval(cases[:2], BrokenBackend(), cafe)
        assert rep.aggregates["ESR_instruction"] == 0.0
        assert all("connection refused" in r["error"] for r in rep.records)

    def test_records_carry_steps(self, report):
        r = report.records[0]
        assert r["steps"] and all(s["success"] for s in r["steps"])
        assert r["index"] == 0

    def test_thresholds(self, report):
        assert report.check_thresholds({"ESR_instruction": 0.9}) == []
        assert report.check_thresholds({"SSL": 1.5, "N_max": 2}) == ["N>2", "SSL<1.5"]

    def test_summary(self, report):
        text = report.summary()
        assert text.startswith("instruction evaluation")
        assert "ESR_instruction" in text


class TestEqaEval:
    def test_group_and_subset(self, eqa_items):
        groups = group_by_scene(eqa_items)
        assert len(groups) == 2 and all(len(g) == 5 for g in groups.values())
        sub = eqa_subset(eqa_items, 1, seed=0)
        assert len(sub) == 5 and len({it.scene_id for it in sub}) == 1

    def test_single_and_multi(self, eqa_items):
        caps = EqaCaps(6)
        single = run_eqa_eval(eqa_items, ScriptedBackend(), "single", caps)
        multi = run_eqa_eval(eqa_items, ScriptedBackend(), "multi", caps)
        for rep in (single, multi):
            doc = rep.to_json()
            assert recompute(doc) == doc["aggregates"]
            assert doc["aggregates"]["N"] == 10
        assert multi.aggregates["EC"] <= single.aggregates["EC"]

    def test_deterministic(self, eqa_items):
        a = run_eqa_eval(eqa_items[:5], ScriptedBackend(), "multi", EqaCaps(4))
        b = run_eqa_eval(eqa_items[:5], ScriptedBackend(), "multi", EqaCaps(4))
        assert a.dumps() == b.dumps()

    def test_backend_failure(self, eqa_items):
        rep = run_eqa_eval(eqa_items[:2], BrokenBackend(), "single", EqaCaps(2))
        assert rep.aggregates["ACC"] == 0.0
        assert all(r["error"] for r in rep.records)

    def test_bad_mode(self, eqa_items):
        with pytest.raises(ValueError):
            run_eqa_eval(eqa_items, ScriptedBackend(), "double")
