import random

import pytest

from stableqa.constants import TASKS
from stableqa.engine import Function, atom, ground, parse_program, solve
from stableqa.errors import AmbiguousAnswerError, UnknownModuleError, UnknownTaskError
from stableqa.facts import FactSet
from stableqa.harness import reason
from stableqa.modules import (
    closure,
    compose,
    extract_answer,
    get_module,
    get_profile,
    matches,
    module_versions,
    registry,
    timestamp,
    validate_modules,
)
from stableqa.types import Answer, KnowledgeModule


def facts_of(*atoms, source="context"):
    facts = FactSet()
    for i, a in enumerate(atoms):
        facts.add(a, source=source, sentence=i)
    return facts


def test_registry_knows_every_profile_module():
    names = set(registry())
    for task in TASKS:
        assert get_profile(task).module in names


def test_closure_puts_dependencies_first():
    assert [m.name for m in closure("gscan")] == ["dec", "action", "location", "gscan"]
    assert [m.name for m in closure("babi_task_12")] == ["dec", "action", "babi_task_1", "babi_task_12"]


def test_unknown_module_and_task():
    with pytest.raises(UnknownModuleError):
        get_module("babi_task_21")
    with pytest.raises(UnknownTaskError):
        get_profile("babi_21")


def test_missing_dependency_is_reported():
    modules = {"glue": KnowledgeModule(name="glue", path="glue.lp", text="a.", deps=["nowhere"])}
    with pytest.raises(UnknownModuleError):
        closure("glue", modules)


def test_module_versions_are_short_digests():
    versions = module_versions("stepgame")
    assert set(versions) == {"location", "stepgame"}
    assert all(len(v) == 12 for v in versions.values())


def test_sentence_index_timestamps():
    facts = facts_of("go(mary, kitchen)", "go(mary, garden)")
    facts.add("whereAgent(mary)", source="query")
    atoms, maxtime = timestamp(get_profile("babi_1"), facts, sentences=3)
    rendered = {str(a) for a in atoms}
    assert {"go(mary,kitchen,0)", "go(mary,garden,1)", "whereAgent(mary)"} <= rendered
    assert maxtime == 3


def test_states_are_stamped_after_events():
    facts = facts_of("go(fred, park)", "isIn(fred, school)")
    atoms, maxtime = timestamp(get_profile("babi_10"), facts, sentences=2)
    rendered = {str(a) for a in atoms}
    assert {"go(fred,park,0)", "isIn(fred,school,3)"} <= rendered
    assert maxtime == 4


def test_parser_supplied_timestamps():
    facts = facts_of("go(julie, office, 0)", "go(julie, school, 3)")
    atoms, maxtime = timestamp(get_profile("babi_14"), facts)
    assert {str(a) for a in atoms} == {"go(julie,office,0)", "go(julie,school,3)"}
    assert maxtime == 4


def test_compose_warns_about_unknown_predicates():
    facts = facts_of('top_right("C", "D")', 'floats("C")')
    facts.add('query("C", "D")', source="query")
    composition = compose("stepgame", facts)
    assert len(composition.warnings) == 1
    assert 'floats("C")' in composition.warnings[0]
    assert 'top_right("C","D").' in composition.text


def test_stepgame_answer_reads_back_normalized():
    facts = facts_of('top_right("C", "D")')
    facts.add('query("C", "D")', source="query")
    result, _ = reason("stepgame", facts)
    answer = extract_answer("stepgame", result)
    assert answer.value == "upper-right"
    assert answer.labels == ["top_right"]


def test_two_answers_raise():
    facts = facts_of("go(mary, kitchen)", "go(john, garden)")
    facts.add("whereAgent(mary)", source="query")
    facts.add("whereAgent(john)", source="query")
    result, _ = reason("babi_1", facts, sentences=2)
    with pytest.raises(AmbiguousAnswerError) as err:
        extract_answer("babi_1", result)
    assert sorted(err.value.labels) == ["garden", "kitchen"]


def test_no_answer_abstains():
    facts = facts_of("go(mary, kitchen)")
    facts.add("whereAgent(john)", source="query")
    result, _ = reason("babi_1", facts, sentences=1)
    answer = extract_answer("babi_1", result)
    assert answer.abstained
    assert answer.text == "unknown"


def test_path_finding_plan():
    facts = facts_of("east(office, hallway)", "north(kitchen, office)")
    facts.add("initial_loc(hallway)", source="query")
    facts.add("goal(kitchen)", source="query")
    result, composition = reason("babi_19", facts)
    answer = extract_answer("babi_19", result)
    assert answer.value == ["e", "n"]
    assert composition.horizon is not None


@pytest.mark.parametrize(
    "task,value,gold,expected",
    [
        ("babi_8", ["apple", "football"], "football,apple", True),
        ("babi_8", "nothing", "nothing", True),
        ("babi_8", ["apple"], "football,apple", False),
        ("babi_19", ["s", "w"], "s,w", True),
        ("babi_19", ["w", "s"], "s,w", False),
        ("gscan", ["turn left", "walk"], "turn left, walk", True),
        ("babi_1", "Kitchen", "kitchen", True),
        ("clutrr", "mother-in-law", "mother-in-law", True),
    ],
)
def test_matches(task, value, gold, expected):
    answer = Answer(kind=get_profile(task).answer, value=value)
    assert matches(task, answer, gold) is expected


def test_abstained_answers_never_match():
    assert not matches("babi_1", Answer(kind="single-label", value="unknown", abstained=True), "unknown")


def test_validate_small_registry():
    modules = {name: get_module(name) for name in ("dec", "action", "babi_task_1", "babi_task_15")}
    report = validate_modules(modules)
    assert report.ok, report.errors


def test_validate_planning_modules():
    modules = {name: get_module(name) for name in ("dec", "action", "pickplace")}
    report = validate_modules(modules)
    assert report.ok, report.errors


def test_validate_reports_silent_glue():
    modules = {"glue": KnowledgeModule(name="glue", path="glue.lp", text="answer(X) :- q(X).", smoke="p(1).")}
    report = validate_modules(modules)
    assert not report.ok
    assert "never fires" in report.errors[0]
    assert any("q/1" in w for w in report.warnings)


def test_validate_reports_parse_errors():
    modules = {"broken": KnowledgeModule(name="broken", path="broken.lp", text="answer(X :- q.")}
    report = validate_modules(modules)
    assert report.errors and report.errors[0].startswith("broken:")


@pytest.mark.slow
def test_validate_every_module():
    report = validate_modules()
    assert report.ok, report.errors


OFFSETS = {
    "overlap": (0, 0),
    "top": (0, 1),
    "down": (0, -1),
    "left": (-1, 0),
    "right": (1, 0),
    "top_left": (-1, 1),
    "top_right": (1, 1),
    "down_left": (-1, -1),
    "down_right": (1, -1),
}


def least(text):
    (model,) = solve(ground(parse_program(text)), max_models=0).answer_sets
    return model


@pytest.mark.slow
@pytest.mark.parametrize("relation", sorted(OFFSETS))
def test_location_relations_have_inverses(relation):
    rng = random.Random(relation)
    dx, dy = OFFSETS[relation]
    inverse = next(r for r, offset in OFFSETS.items() if offset == (-dx, -dy))
    pairs = [(f"a{i}_{rng.randint(0, 999)}", f"b{i}_{rng.randint(0, 999)}") for i in range(50)]
    facts = "".join(f"is({a}, {relation}, {b}). location({b}, 0, 0).\n" for a, b in pairs)
    model = least(get_module("location").text + facts)
    for a, b in pairs:
        assert atom("is", a, relation, b) in model.atoms
        assert atom("is", b, inverse, a) in model.atoms
        assert atom("location", a, dx, dy) in model.atoms
    derived = {(str(x.args[0]), str(x.args[2])) for x in model.select("is") if x.args[1] == Function(inverse)}
    expected = {(b, a) for a, b in pairs}
    if inverse == relation:
        expected |= set(pairs)
    assert derived == expected


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_locations_persist_until_the_next_move(seed):
    rng = random.Random(seed)
    agents, rooms = ["mary", "john", "sandra"], ["kitchen", "garden", "office", "hallway"]
    moves = [(rng.choice(agents), rng.choice(rooms)) for _ in range(rng.randint(3, 8))]
    horizon = len(moves)
    facts = "".join(f"go({a}, {r}, {t}).\n" for t, (a, r) in enumerate(moves)) + f"maxtime({horizon}).\n"
    program = "".join(m.text for m in closure("babi_task_1") if m.name != "babi_task_1") + facts
    model = least(program)
    for agent in agents:
        for t in range(1, horizon + 1):
            earlier = [r for when, (a, r) in enumerate(moves) if a == agent and when < t]
            where = {str(x.args[0].args[1]) for x in model.select("holds_at") if x.args[1] == t and x.args[0].name == "at" and str(x.args[0].args[0]) == agent}
            assert where == set(earlier[-1:]), (agent, t, moves)
