import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cafebot import eqa
from cafebot.simworld import WorldScene, make_object
from cafebot.simworld.scene import validate_scene
from cafebot.vocab import QUESTION_TEMPLATES, parse_question


@pytest.fixture(scope="module")
def dataset():
    return eqa.generate_dataset()


@pytest.fixture
def small():
    return WorldScene((0, 0, 8, 6), [
        make_object(7, "table", (2.0, 2.0, 0.375), (0.45, 0.45, 0.375)),
        make_object(8, "table", (5.0, 2.0, 0.375), (0.45, 0.45, 0.375)),
        make_object(1, "cup", (2.0, 2.0, 0.8), (0.05, 0.05, 0.05), surface_of=7),
        make_object(2, "kettle", (2.2, 2.1, 0.87), (0.1, 0.1, 0.12), surface_of=7),
        make_object(3, "bread", (5.0, 2.0, 0.79), (0.1, 0.06, 0.04), surface_of=8),
        make_object(4, "mop", (2.0, 5.0, 0.6), (0.1, 0.1, 0.6)),
    ])


class TestRandomizeScene:
    def test_same_seed_identical(self):
        assert eqa.randomize_scene(5).dumps() == eqa.randomize_scene(5).dumps()

    def test_seventy_distinct_layouts(self):
        layouts = {eqa.randomize_scene(s).dumps() for s in range(70)}
        assert len(layouts) == 70

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_always_valid(self, seed):
        validate_scene(eqa.randomize_scene(seed))

    def test_degenerate_catalog(self):
        scene = eqa.randomize_scene(3, catalog=("table",))
        validate_scene(scene)
        assert {o.category for o in scene.objects} <= {"table"}
        ok = eqa.instantiable_templates(scene)
        assert not ok[1] and not ok[2]


class TestAnswerOracle:
    def test_same_table(self, small):
        assert eqa.answer_oracle(small, "location", {"template_id": 2, "objects": [1, 2]}) == "Yes"
        assert eqa.answer_oracle(small, "location", {"template_id": 2, "objects": [1, 3]}) == "No"

    def test_closer(self, small):
        # cup-kettle 0.24 m vs cup-bread 3 m
        assert eqa.answer_oracle(small, "comparing", {"template_id": 3, "objects": [1, 2, 3]}) == "Yes"
        assert eqa.answer_oracle(small, "comparing", {"template_id": 3, "objects": [1, 3, 2]}) == "No"

    def test_hand_distances(self):
        scene = WorldScene((0, 0, 8, 6), [
            make_object(1, "cup", (1.0, 1.0, 0.5), (0.05,) * 3),
            make_object(2, "kettle", (2.0, 1.0, 0.5), (0.05,) * 3),
            make_object(3, "bread", (4.0, 1.0, 0.5), (0.05,) * 3),
        ])
        assert eqa.answer_oracle(scene, "comparing", {"template_id": 3, "objects": [1, 2, 3]}) == "Yes"

    def test_existence(self, small):
        assert eqa.answer_oracle(small, "existence", {"template_id": 4, "category": "piano"}) == "No"
        assert eqa.answer_oracle(small, "existence", {"template_id": 4, "category": "mop"}) == "Yes"
        assert eqa.answer_oracle(small, "existence", {"template_id": 5, "activity": "clean the floor"}) == "Yes"
        assert eqa.answer_oracle(small, "existence", {"template_id": 5, "activity": "make coffee"}) == "No"

    def test_table_mates(self, small):
        assert eqa.answer_oracle(small, "location", {"template_id": 1, "objects": [2]}) == "cup"
        assert eqa.answer_oracle(small, "location", {"template_id": 1, "objects": [3]}) == "nothing"

    @pytest.mark.parametrize("qtype,bindings", [
        ("existence", {"template_id": 2, "objects": [1, 2]}),
        ("location", {"template_id": 2, "objects": [1]}),
        ("location", {"template_id": 2, "objects": [1, 99]}),
        ("existence", {"template_id": 5, "activity": "fly"}),
    ])
    def test_errors(self, small, qtype, bindings):
        with pytest.raises(eqa.OracleError):
            eqa.answer_oracle(small, qtype, bindings)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10**5))
    def test_same_table_symmetric_and_closer_antisymmetric(self, seed):
        scene = eqa.randomize_scene(seed)
        for q, b in eqa.question_options(scene, 2):
            a, c = b["objects"]
            rev = eqa.answer_oracle(scene, "location", {"template_id": 2, "objects": [c, a]})
            assert eqa.answer_oracle(scene, "location", b) == rev
        for q, b in eqa.question_options(scene, 3)[:30]:
            a, x, y = b["objects"]
            fwd = eqa.answer_oracle(scene, "comparing", b)
            rev = eqa.answer_oracle(scene, "comparing", {"template_id": 3, "objects": [a, y, x]})
            assert {fwd, rev} == {"Yes", "No"}


class TestOptions:
    def test_questions_parse_back(self, small):
        for tid in QUESTION_TEMPLATES:
            for q, b in eqa.question_options(small, tid):
                parsed = parse_question(q)
                assert parsed is not None and parsed[0] == tid

    def test_only_unique_categories(self):
        scene = WorldScene((0, 0, 8, 6), [
            make_object(7, "table", (2.0, 2.0, 0.375), (0.45, 0.45, 0.375)),
            make_object(1, "cup", (2.0, 2.0, 0.8), (0.05,) * 3, surface_of=7),
            make_object(2, "cup", (2.2, 2.0, 0.8), (0.05,) * 3, surface_of=7),
            make_object(3, "kettle", (1.8, 2.0, 0.87), (0.1, 0.1, 0.12), surface_of=7),
        ])
        assert all(1 not in b["objects"] and 2 not in b["objects"] for _, b in eqa.question_options(scene, 2))

    def test_near_ties_rejected(self):
        scene = WorldScene((0, 0, 8, 6), [
            make_object(1, "cup", (4.0, 3.0, 0.5), (0.05,) * 3),
            make_object(2, "kettle", (5.0, 3.0, 0.5), (0.05,) * 3),
            make_object(3, "bread", (3.0, 3.02, 0.5), (0.05,) * 3),
        ])
        assert not any(b["objects"][0] == 1 for _, b in eqa.question_options(scene, 3))

    def test_scene_questions_distinct(self):
        scene = next(sc for sc in map(eqa.randomize_scene, range(100))
                     if all(eqa.instantiable_templates(sc, 3).values()))
        items = eqa.scene_questions(scene, "s", 3, random.Random(0))
        assert len(items) == 15
        for tid in QUESTION_TEMPLATES:
            qs = [it.question for it in items if it.template_id == tid]
            assert len(set(qs)) == 3


class TestDataset:
    def test_size_and_layout(self, dataset):
        assert len(dataset) == 1050
        assert len({it.scene_id for it in dataset}) == 70
        for tid in QUESTION_TEMPLATES:
            assert sum(it.template_id == tid for it in dataset) == 210

    def test_balance(self, dataset):
        for tid in (2, 3, 4, 5):
            ans = [it.answer for it in dataset if it.template_id == tid]
            assert 0.4 <= ans.count("Yes") / len(ans) <= 0.6

    def test_replay(self, dataset):
        assert all(it.replay() == it.answer for it in dataset)

    def test_round_trip(self, dataset):
        data = eqa.write_dataset(dataset)
        assert eqa.write_dataset(eqa.read_dataset(data)) == data

    def test_deterministic(self, dataset):
        assert eqa.write_dataset(eqa.generate_dataset()) == eqa.write_dataset(dataset)

    def test_balance_error_reported(self, monkeypatch):
        monkeypatch.setattr(eqa, "BALANCE_RANGE", (0.99, 1.0))
        with pytest.raises(eqa.DatasetBalanceError):
            eqa.generate_dataset(seeds=2)
