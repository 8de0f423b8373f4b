import random

import pytest

from stableqa.datasets import gen_family_graph, load_gscan
from stableqa.facts import FactSet
from stableqa.harness import reason
from stableqa.modules import extract_answer
from stableqa.simulators import Family, family_from_facts, family_relation, gscan_target, replay_gscan, stepgame_label


@pytest.mark.parametrize(
    "triples,b,expected",
    [
        ([("left", "A", "B")], "B", "left"),
        ([("left", "A", "B"), ("top", "B", "C")], "C", "top_left"),
        ([("left", "A", "B"), ("right", "B", "C")], "C", "overlap"),
        ([("down_right", "C", "B"), ("top", "A", "C")], "B", "right"),
    ],
)
def test_stepgame_label(triples, b, expected):
    assert stepgame_label(triples, "A", b) == expected


def test_stepgame_label_needs_a_path():
    assert stepgame_label([("left", "A", "B"), ("top", "C", "D")], "A", "D") is None


@pytest.fixture
def small_family():
    family = Family()
    family.add("Raquel", "female")
    family.add("Glenn", "male")
    family.marry("Raquel", "Glenn")
    family.add("Casey", "male", parents=("Raquel", "Glenn"))
    family.add("Lila", "female", parents=("Raquel", "Glenn"))
    family.add("Vernon", "male", parents=("Lila",))
    return family


@pytest.mark.parametrize(
    "a,b,expected",
    [
        ("Casey", "Raquel", "mother"),
        ("Raquel", "Casey", "son"),
        ("Casey", "Lila", "sister"),
        ("Vernon", "Glenn", "grandfather"),
        ("Vernon", "Casey", "uncle"),
        ("Casey", "Vernon", "nephew"),
        ("Glenn", "Raquel", "wife"),
    ],
)
def test_family_relation(small_family, a, b, expected):
    assert family_relation(small_family, a, b) == expected


def test_family_from_statements():
    family = family_from_facts([("sister", "Watt", "Celestine")], {"Watt": "male", "Celestine": "female"})
    assert family_relation(family, "Watt", "Celestine") == "sister"
    assert family_relation(family, "Celestine", "Watt") == "brother"
    assert family_from_facts([("grandmother", "Raquel", "Karen")], {}) is None


def test_generated_statements_rebuild_the_family():
    for seed in range(50):
        family, (a, b), relation = gen_family_graph(seed)
        rebuilt = family_from_facts(family.statements(random.Random(seed)), family.gender)
        assert family_relation(rebuilt, a, b) == relation, seed


def kinship_answer(family, a, b, rng):
    facts = FactSet()
    for i, text in enumerate(family.facts(rng)):
        facts.add(text, source="gender" if text.startswith(("male(", "female(")) else "context", sentence=i)
    facts.add(f'query("{a}", "{b}")', source="side")
    result, _ = reason("clutrr_s", facts)
    return extract_answer("clutrr_s", result).value


def test_kinship_module_agrees_with_search():
    rng = random.Random(0)
    for seed in range(5):
        family, (a, b), relation = gen_family_graph(seed)
        assert kinship_answer(family, a, b, rng) == relation.replace("_", "-"), seed


@pytest.mark.slow
def test_kinship_module_agrees_with_search_on_many_families():
    rng = random.Random(1)
    for seed in range(300):
        family, (a, b), relation = gen_family_graph(seed)
        assert kinship_answer(family, a, b, rng) == relation.replace("_", "-"), seed


@pytest.fixture(scope="module")
def gscan_examples(fixtures_dir):
    path = fixtures_dir / "gscan" / "dataset.txt"
    return load_gscan(path, "A") + load_gscan(path, "C")


def test_every_gscan_gold_replays(gscan_examples):
    for instance in gscan_examples:
        replay = replay_gscan(instance.grid, instance.query, instance.gold.split(","))
        assert replay.ok, (instance.query, replay.reason)


def test_replay_catches_wrong_plans(gscan_examples):
    first = gscan_examples[0]
    assert first.query == "walk to a red square"
    assert not replay_gscan(first.grid, first.query, ["walk"]).ok
    assert not replay_gscan(first.grid, first.query, ["walk", "walk", "walk"]).ok
    assert not replay_gscan(first.grid, first.query, ["jump"]).ok


def test_hesitant_walks_need_stays(gscan_examples):
    instance = next(i for i in gscan_examples if i.query == "walk to a blue square hesitantly")
    actions = [a.strip() for a in instance.gold.split(",")]
    assert replay_gscan(instance.grid, instance.query, actions).ok
    assert replay_gscan(instance.grid, instance.query, [a for a in actions if a != "stay"]).reason == "a step without a following stay"


def test_size_words_pick_among_matches(fixtures_dir):
    path = fixtures_dir / "gscan" / "dataset.txt"
    examples = {i.query: i for i in load_gscan(path)}
    grid = examples["walk to a big red square"].grid
    assert gscan_target(grid, ["big", "red", "square"]) == 0
    assert gscan_target(grid, ["small", "red", "square"]) == 1
    assert gscan_target(grid, ["red", "square"]) is None
