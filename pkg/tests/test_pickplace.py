import time

import pytest

from stableqa.datasets import load_pickplace
from stableqa.pickplace import baseline_input, check_plan, from_instance, gen_pickplace, read_pairs, read_plan, world_of


@pytest.fixture(scope="module")
def fixture_instances(fixtures_dir):
    return load_pickplace(fixtures_dir / "pickplace" / "instances.jsonl")


def test_fixture_plans_are_optimal(fixture_instances):
    for instance in fixture_instances:
        assert check_plan(instance, instance.plan) == (True, ""), instance.index
        world = world_of(instance)
        shortest = world.shortest(frozenset(read_pairs(instance.initial)), read_pairs(instance.goal))
        assert len(shortest) == instance.optimal


def test_plan_checks(fixture_instances):
    instance = fixture_instances[0]
    assert check_plan(instance, instance.plan[:-1]) == (False, "plan does not reach the goal")
    assert check_plan(instance, ["Move the blue block onto the red block."])[1] == "plan makes an illegal move"
    assert check_plan(instance, ["Stack everything."]) == (False, "unreadable plan step")
    longer = instance.plan[:1] + ["Move the yellow block onto the red block.", "Move the yellow block onto the green block."] + instance.plan[1:]
    ok, reason = check_plan(instance, longer)
    assert not ok


def test_numbered_plan_lines():
    assert read_plan(["1. Move the red block onto the table.", "Move the blue block onto the red block."]) == [
        ("red block", "table"),
        ("blue block", "red block"),
    ]


def test_bowls_keep_blocks_off_the_table(fixture_instances):
    instance = fixture_instances[1]
    world = world_of(instance)
    state = frozenset(read_pairs(instance.initial))
    assert world.valid(state)
    assert all(place != "table" for _, place in world.moves(state))


def test_generic_instance_round_trip(fixture_instances):
    instance = fixture_instances[1]
    again = from_instance(instance.to_instance())
    assert again.initial == instance.initial
    assert again.goal == instance.goal
    assert sorted(again.bowls) == sorted(instance.bowls)
    assert again.optimal == instance.optimal


def test_baseline_input(fixture_instances):
    text = baseline_input(fixture_instances[0])
    assert text.startswith("# Initial State:\nThe blue block is on the table.")
    assert "\n\n# Goal State:\n" in text


def test_generator_is_deterministic_and_optimal():
    first = gen_pickplace(seed=4, count=2)
    assert [i.plan for i in first] == [i.plan for i in gen_pickplace(seed=4, count=2)]
    assert not first[0].bowls and first[1].bowls
    for instance in first:
        assert 3 <= instance.optimal <= 10
        assert check_plan(instance, instance.plan) == (True, "")


def test_generator_needs_a_count():
    with pytest.raises(ValueError):
        gen_pickplace(seed=0, count=0)


def test_moves_are_exactly_the_valid_ones(fixture_instances):
    for instance in fixture_instances:
        world = world_of(instance)
        state = frozenset(read_pairs(instance.initial))
        for move in read_plan(instance.plan) + [None]:
            support = dict(state)
            legal = {
                (block, place)
                for block in world.blocks
                for place in world.places
                if place not in (block, support[block])
                and world.clear(state, block)
                and world.clear(state, place)
                and world.valid(world.apply(state, (block, place)))
            }
            assert set(world.moves(state)) == legal
            if move is not None:
                state = world.apply(state, move)


@pytest.mark.slow
def test_forty_instances_generate_quickly():
    started = time.perf_counter()
    instances = gen_pickplace(seed=1, count=40)
    assert len(instances) == 40
    assert time.perf_counter() - started < 60
