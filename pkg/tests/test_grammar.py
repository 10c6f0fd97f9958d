import pytest
from hypothesis import given
from hypothesis import strategies as st

from cafebot.planner.grammar import Plan, PlanParseError, parse_plan, render_plan
from cafebot.skills import CATALOG, SkillAction
from cafebot.simworld.scene import CATEGORIES


def action_strategy():
    def build(spec, cat, oid, pick):
        if spec.name == "move_to":
            return SkillAction("move_to", (cat if oid is None else f"{cat}_{oid}",))
        return SkillAction(spec.name, tuple(c[pick % len(c)] for _, c in spec.params))

    return st.builds(build, st.sampled_from(CATALOG), st.sampled_from(CATEGORIES),
                     st.one_of(st.none(), st.integers(1, 99)), st.integers(0, 3))


class TestParse:
    def test_basic(self):
        p = parse_plan("move_to(bar_table)\nmake_coffee()")
        assert [s.render() for s in p.steps] == ["move_to(bar_table)", "make_coffee()"]

    def test_empty_text_is_empty_plan(self):
        assert parse_plan("") == Plan(())
        assert parse_plan("\n  \n# nothing to do\n") == Plan(())

    def test_unknown_skill_line_number(self):
        with pytest.raises(PlanParseError) as ei:
            parse_plan("fly_to(moon)")
        assert ei.value.line == 1 and "unknown skill" in ei.value.reason

    def test_error_line_counts_blank_lines(self):
        with pytest.raises(PlanParseError) as ei:
            parse_plan("make_coffee()\n\n# c\nmake coffee")
        assert ei.value.line == 4

    def test_bad_argument(self):
        with pytest.raises(PlanParseError):
            parse_plan("control_ac(warm)")
        with pytest.raises(PlanParseError):
            parse_plan("move_to(cup, )")

    def test_tolerated_decorations(self):
        p = parse_plan('1. move_to("cup_3")  # go\n2) make_coffee()\n- pour_water ( )\n* take_towel()')
        assert render_plan(p) == "move_to(cup_3)\nmake_coffee()\npour_water()\ntake_towel()"

    def test_raw_text_not_part_of_equality(self):
        assert parse_plan("make_coffee()") == parse_plan("  make_coffee()  # x")

    @given(st.lists(action_strategy(), max_size=8))
    def test_round_trip(self, actions):
        plan = Plan(tuple(actions))
        assert parse_plan(render_plan(plan)) == plan
