import pytest

from stableqa.datasets import (
    gen_clutrr,
    gen_family_graph,
    gen_stepgame,
    grid_to_facts,
    load_babi,
    load_clutrr,
    load_gscan,
    load_instances,
    load_pickplace,
    load_stepgame,
    parse_situation,
    write_clutrr,
    write_stepgame,
)
from stableqa.errors import DatasetFormatError
from stableqa.modules import get_profile
from stableqa.oracle import oracle_parse
from stableqa.simulators import stepgame_label
from stableqa.types import Instance


def test_babi_episodes(fixtures_dir):
    instances = load_babi(fixtures_dir / "babi", 1)
    assert len(instances) == 20
    first = instances[0]
    assert first.task == "babi_1"
    assert first.story == ["Mary moved to the bathroom.", "John went to the hallway."]
    assert first.query == "Where is Mary?"
    assert first.gold == "bathroom"
    assert first.supporting == [0]
    # Questions are not part of the story of later questions.
    assert len(instances[1].story) == 4


def test_babi_task_range(fixtures_dir):
    with pytest.raises(DatasetFormatError):
        load_babi(fixtures_dir / "babi", 21)


def test_babi_question_without_answer(tmp_path):
    path = tmp_path / "qa1_single-supporting-fact_test.txt"
    path.write_text("1 Mary moved to the bathroom.\n2 Where is Mary?\n", encoding="utf8")
    with pytest.raises(DatasetFormatError) as err:
        load_babi(path, 1)
    assert err.value.line == 2


def test_stepgame_directory(fixtures_dir):
    assert len(load_stepgame(fixtures_dir / "stepgame", k=1)) == 10
    everything = load_stepgame(fixtures_dir / "stepgame")
    assert len(everything) == 24
    assert {i.meta["k"] for i in everything} == {1, 2, 3}


def test_instance_meta_keeps_numbers():
    (instance,) = gen_stepgame(seed=0, k=2, count=1)
    assert instance.meta["k"] == 2
    assert isinstance(instance.meta["k"], int)
    assert Instance(task="pickplace", story=["x"], query="q", gold="g", source="s", meta={"optimal": 4}).meta["optimal"] == 4


def test_stepgame_k_range(fixtures_dir):
    with pytest.raises(DatasetFormatError):
        load_stepgame(fixtures_dir / "stepgame", k=11)


def test_stepgame_missing_field(tmp_path):
    path = tmp_path / "qa1_test.json"
    path.write_text('{"0": {"story": ["C is to the left of K."], "label": "left"}}', encoding="utf8")
    with pytest.raises(DatasetFormatError):
        load_stepgame(path)


def test_generated_stepgame_is_deterministic():
    a = gen_stepgame(seed=3, k=4, count=5)
    b = gen_stepgame(seed=3, k=4, count=5)
    assert [i.story for i in a] == [i.story for i in b]
    assert [i.gold for i in a] == [i.gold for i in b]
    assert all(i.gold != "overlap" for i in a)


def test_generated_stepgame_labels_follow_the_story():
    surface = get_profile("stepgame").surface
    for instance in gen_stepgame(seed=11, k=3, count=10):
        triples = []
        for sentence in instance.story:
            parsed = oracle_parse("stepgame", sentence, role="context")
            assert len(parsed) == 1, sentence
            value = parsed.atoms()[0]
            triples.append((value.name, value.args[0].value, value.args[1].value))
        query = oracle_parse("stepgame", instance.query, role="query").atoms()[0]
        label = stepgame_label(triples, query.args[0].value, query.args[1].value)
        assert surface(label) == instance.gold


def test_write_stepgame_reads_back(tmp_path):
    instances = gen_stepgame(seed=1, k=2, count=3)
    write_stepgame(instances, tmp_path / "qa2_test.json")
    again = load_stepgame(tmp_path, k=2)
    assert [i.story for i in again] == [i.story for i in instances]
    assert [i.gold for i in again] == [i.gold for i in instances]


def test_clutrr_rows(fixtures_dir):
    instances = load_clutrr(fixtures_dir / "clutrr" / "clutrr.csv")
    first = instances[0]
    assert first.query == "How is [Celestine] related to [Watt]?"
    assert first.query_pair == ("Watt", "Celestine")
    assert first.gold == "sister"
    assert first.meta["category"] == "task_1.2"


def test_clutrr_missing_column(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text("story,target\nx,sister\n", encoding="utf8")
    with pytest.raises(DatasetFormatError):
        load_clutrr(path)


def test_clutrr_unreadable_query(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text('story,query,target\n[A] is [B]\'s son.,"(Watt",son\n', encoding="utf8")
    with pytest.raises(DatasetFormatError) as err:
        load_clutrr(path)
    assert err.value.line == 2


def test_family_graph_relation_is_named():
    family, (a, b), relation = gen_family_graph(seed=5)
    assert a in family.members() and b in family.members()
    assert relation


def test_generated_clutrr_round_trip(tmp_path):
    instances = gen_clutrr(seed=2, count=4)
    assert [i.gold for i in instances] == [i.gold for i in gen_clutrr(seed=2, count=4)]
    path = tmp_path / "clutrr_s.csv"
    write_clutrr(instances, path)
    again = load_clutrr(path, task="clutrr_s")
    assert [(i.query_pair, i.gold) for i in again] == [(i.query_pair, i.gold) for i in instances]
    assert all(i.story[0].startswith("[") for i in again)


def test_gscan_splits(fixtures_dir):
    path = fixtures_dir / "gscan" / "dataset.txt"
    test = load_gscan(path)
    assert len(test) == 27
    assert test[0].query == "walk to a red square"
    assert test[0].gold == "walk, walk"
    assert len(load_gscan(path, "C")) == 2
    assert load_gscan(path, "D") == []
    assert len(load_gscan(path, limit=3)) == 3
    with pytest.raises(DatasetFormatError):
        load_gscan(path, "Z")


def test_situation_to_facts():
    grid = parse_situation(
        {
            "grid_size": 4,
            "agent_position": {"row": "0", "column": "1"},
            "agent_direction": 1,
            "placed_objects": {"0": {"object": {"shape": "circle", "color": "red", "size": 2}, "position": {"row": "3", "column": "2"}}},
        }
    )
    assert grid.agent == (0, 1)
    assert grid.direction == "south"
    facts = grid_to_facts(grid)
    assert {"gridSize(4)", "pos(agent,(0,1))", "dir(agent,south)", "pos(o0,(3,2))", "size(o0,2)"} <= facts.atom_set()
    assert all(f.source == "side" for f in facts)


def test_pickplace_fixture(fixtures_dir):
    instances = load_pickplace(fixtures_dir / "pickplace" / "instances.jsonl")
    assert len(instances) == 4
    assert instances[1].bowls
    assert not instances[0].bowls


def test_load_instances_dispatch(fixtures_dir):
    assert len(load_instances("babi_5", fixtures_dir / "babi", limit=4)) == 4
    assert len(load_instances("stepgame", seed=0, k=2, limit=3)) == 3
    assert load_instances("pickplace", fixtures_dir / "pickplace" / "instances.jsonl")[0].task == "pickplace"
    with pytest.raises(DatasetFormatError):
        load_instances("mnist")
