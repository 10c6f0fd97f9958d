import pytest

from cafebot.mem import EnvironmentMemory
from cafebot.planner import PlanningError, ScriptedBackend
from cafebot.planner.eqa_loop import (
    EqaCaps,
    EqaHistory,
    EqaReplyError,
    EqaTurn,
    eqa_step,
    exploration_candidates,
    observe,
    parse_eqa_reply,
    run_eqa_episode,
)
from cafebot.simworld import RobotState, WorldScene, make_object


class Scripted:
    """Backend replaying fixed replies, recording the payloads it saw."""

    name = "fake"

    def __init__(self, *replies, then=None):
        self.replies = list(replies)
        self.then = then
        self.payloads = []

    def complete(self, request):
        self.payloads.append(request.payload)
        if self.replies:
            return self.replies.pop(0)
        return self.then


@pytest.fixture
def walled():
    """A curtain wall splits the floor; the kettle is only visible from the east side."""
    return WorldScene((0, 0, 8, 4), [
        make_object(1, "curtain", (4.0, 1.5, 1.2), (0.05, 1.5, 1.2)),
        make_object(2, "table", (6.5, 1.0, 0.375), (0.45, 0.45, 0.375)),
        make_object(3, "kettle", (6.5, 1.0, 0.87), (0.1, 0.1, 0.12), surface_of=2),
        make_object(4, "table", (1.5, 3.0, 0.375), (0.45, 0.45, 0.375)),
        make_object(5, "cup", (1.5, 3.0, 0.8), (0.05, 0.05, 0.05), surface_of=4),
    ])


def fresh(scene, image=True):
    return EnvironmentMemory.empty(scene.bounds, image_memory=image)


Q_KETTLE = "Is there any kettle in the cafe?"
Q_CUP = "Is there any cup in the cafe?"


class TestParseReply:
    @pytest.mark.parametrize("text,verdict,value", [
        ("ANSWER: Yes", "sufficient", "Yes"),
        ("thinking...\nanswer:  cup and bread ", "sufficient", "cup and bread"),
        ("EXPLORE: 1.50, 2.25", "explore", (1.5, 2.25)),
        ("EXPLORE: (3, 4, 0.5)", "explore", (3.0, 4.0)),
        ("EXPLORE: Coffee Machine", "explore", "coffee_machine"),
    ])
    def test_accepted(self, text, verdict, value):
        t = parse_eqa_reply("q", text)
        assert t.verdict == verdict
        assert (t.answer if verdict == "sufficient" else t.target) == value

    @pytest.mark.parametrize("text", ["", "Yes", "ANSWER:", "EXPLORE: ???"])
    def test_rejected(self, text):
        with pytest.raises(EqaReplyError):
            parse_eqa_reply("q", text)

    def test_turn_validation(self):
        with pytest.raises(ValueError):
            EqaTurn("q", "sufficient")
        with pytest.raises(ValueError):
            EqaTurn("q", "explore", answer="x")
        with pytest.raises(ValueError):
            EqaTurn("q", "maybe", answer="x")


class TestCandidates:
    def test_lattice_and_fields(self, walled):
        mem, _ = observe(walled, RobotState.at(1.0, 1.0), fresh(walled), 0)
        cands = exploration_candidates(mem, (1.0, 1.0), 1.5)
        assert [c["name"] for c in cands] == [f"p{k}" for k in range(len(cands))]
        assert len(cands) == 5 * 3
        assert all(isinstance(c["unknown"], int) for c in cands)
        east = [c for c in cands if c["x"] > 4.5]
        assert max(c["unknown"] for c in east) > max(c["unknown"] for c in cands if c["x"] < 2.5)

    def test_no_image_memory_leaves_fields_empty(self, walled):
        cands = exploration_candidates(fresh(walled, image=False), (1.0, 1.0))
        assert all(c["unknown"] is None and c["route"] is None for c in cands)


class TestStep:
    def test_retry_then_fail(self, walled):
        with pytest.raises(PlanningError):
            eqa_step("q", fresh(walled), EqaHistory(), Scripted("hm", "still no"))

    def test_retry_sees_error(self, walled):
        b = Scripted("hm", "ANSWER: No")
        assert eqa_step("q", fresh(walled), EqaHistory(), b).answer == "No"
        assert "parse_error" in b.payloads[1]


class TestEpisode:
    def test_answerable_at_start(self, walled):
        robot = RobotState.at(1.0, 1.5, 1.57)
        ep = run_eqa_episode(Q_CUP, walled, robot, fresh(walled), ScriptedBackend())
        assert (ep.answer, ep.ec, ep.upc, ep.path_length) == ("Yes", 0, 0, 0.0)

    def test_one_exploration_then_sufficient(self, walled):
        b = Scripted("EXPLORE: 5.50, 3.50", then="ANSWER: Yes")
        robot = RobotState.at(3.0, 3.5, 3.14)
        ep = run_eqa_episode(Q_KETTLE, walled, robot, fresh(walled), b)
        assert (ep.ec, ep.upc) == (1, 0)
        assert ep.answer == "Yes"
        assert not any(r[1] == "kettle" for r in b.payloads[0]["observed"])
        assert any(r[1] == "kettle" for r in b.payloads[1]["observed"])

    def test_scripted_oracle_finds_hidden_kettle(self, walled):
        robot = RobotState.at(3.0, 3.5, 3.14)
        ep = run_eqa_episode(Q_KETTLE, walled, robot, fresh(walled), ScriptedBackend(), EqaCaps(20))
        assert ep.answer == "Yes"
        assert ep.ec >= 1 and ep.path_length > 0

    def test_unreachable_target_counts_upc(self, walled):
        hist = EqaHistory()
        b = Scripted("EXPLORE: 6.00, 1.00", then="ANSWER: No")
        ep = run_eqa_episode(Q_KETTLE, walled, RobotState.at(1.0, 1.0), fresh(walled), b, history=hist)
        assert (ep.ec, ep.upc) == (1, 1)
        assert hist.failures == ["6.00, 1.00"]
        assert b.payloads[1]["failures"] == ["6.00, 1.00"]

    def test_unknown_item_target(self, walled):
        hist = EqaHistory()
        b = Scripted("EXPLORE: mop", then="ANSWER: No")
        ep = run_eqa_episode(Q_KETTLE, walled, RobotState.at(1.0, 1.0), fresh(walled), b, history=hist)
        assert (ep.ec, ep.upc) == (1, 1) and hist.failures == ["mop"]

    def test_budget_forces_answer(self, walled):
        b = Scripted(*["EXPLORE: 1.00, 3.50", "EXPLORE: 1.00, 1.00"] * 5, then="ANSWER: No")
        ep = run_eqa_episode(Q_KETTLE, walled, RobotState.at(1.0, 1.0), fresh(walled), b, EqaCaps(max_explorations=3))
        assert ep.ec == 3 and ep.forced
        assert b.payloads[-1]["force"] is True

    def test_adversarial_backend_terminates(self, walled):
        b = Scripted(then="EXPLORE: 1.00, 3.50")
        ep = run_eqa_episode(Q_KETTLE, walled, RobotState.at(1.0, 1.0), fresh(walled), b, EqaCaps(max_explorations=4))
        assert ep.answer == "" and ep.ec == 4 and ep.forced
        assert len(ep.turns) == 5

    def test_zero_budget(self, walled):
        ep = run_eqa_episode(Q_KETTLE, walled, RobotState.at(1.0, 1.0), fresh(walled), ScriptedBackend(),
                             EqaCaps(max_explorations=0))
        assert ep.ec == 0 and ep.answer == "No"

    def test_history_carried(self, walled):
        hist = EqaHistory()
        robot = RobotState.at(3.0, 3.5, 3.14)
        ep1 = run_eqa_episode(Q_KETTLE, walled, robot, fresh(walled), ScriptedBackend(), EqaCaps(20), hist)
        ep2 = run_eqa_episode(Q_KETTLE, walled, robot, ep1.mem, ScriptedBackend(), history=hist)
        assert ep2.ec == 0 and ep2.answer == "Yes"
        assert hist.visited
