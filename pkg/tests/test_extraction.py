from stableqa.completion import OracleBackend, ReplayBackend
from stableqa.datasets import load_clutrr, load_gscan
from stableqa.extraction import context_requests, extract_facts, query_requests, side_facts, story_text
from stableqa.facts import FactSet
from stableqa.modules import get_profile
from stableqa.types import Instance


def babi(story, query="Where is Mary?", task="babi_1"):
    return Instance(task=task, story=story, query=query, gold="x", source="test")


def test_per_sentence_requests_skip_blank_lines():
    instance = babi(["Mary went to the kitchen.", " ", "Mary went to the garden."])
    requests = context_requests(get_profile("babi_1"), instance)
    assert [(r.text, r.sentence) for r in requests] == [("Mary went to the kitchen.", 0), ("Mary went to the garden.", 2)]


def test_strategy_override():
    instance = babi(["Mary went to the kitchen.", "Mary went to the garden."])
    requests = context_requests(get_profile("babi_1"), instance, strategy="whole-story")
    assert len(requests) == 1
    assert requests[0].text == "Mary went to the kitchen.\nMary went to the garden."


def test_story_text_per_task():
    assert story_text("babi_17", ["A.", "B."]) == "Sentence 1: A.\nSentence 2: B."
    assert story_text("clutrr", ["A.", "B."]) == "A.  B."


def test_positional_query_lists_objects():
    context = FactSet()
    context.add("obj(1, triangle)", sentence=0)
    context.add("above(1, 2)", sentence=1)
    instance = babi(["The triangle is above the pink rectangle."], query="Is the triangle above the pink rectangle?", task="babi_17")
    (request,) = query_requests(get_profile("babi_17"), instance, context)
    assert request.text == "Objects: obj(1,triangle).\nSentence: Is the triangle above the pink rectangle?"


def test_extract_babi_facts():
    instance = babi(["Mary went to the kitchen.", "Mary smiled.", "Mary went to the garden."])
    facts = extract_facts(instance, OracleBackend(), concurrency=1)
    assert facts.atom_set("context") == {"go(mary,kitchen)", "go(mary,garden)"}
    assert facts.atom_set("query") == {"whereAgent(mary)"}
    assert facts.unmatched == [(1, "Mary smiled.")]
    assert sorted(f.sentence for f in facts.select("context")) == [0, 2]


def test_concurrent_extraction_keeps_request_order():
    story = [f"Mary went to the {room}." for room in ("kitchen", "garden", "office", "hallway", "bedroom")]
    facts = extract_facts(babi(story), OracleBackend(), concurrency=4)
    assert [f.sentence for f in facts.select("context")] == [0, 1, 2, 3, 4]


def test_whole_story_atoms_take_their_position():
    backend = ReplayBackend(lambda template, text: "go(mary, kitchen).\ngo(mary, garden)." if template == "babi_11_context" else None, fallback=OracleBackend())
    instance = babi(["Mary went to the kitchen.", "Then she went to the garden."], task="babi_11")
    facts = extract_facts(instance, backend)
    assert [(f.atom, f.sentence) for f in facts.select("context")] == [("go(mary,kitchen)", 0), ("go(mary,garden)", 1)]


def test_whole_story_keeps_a_repeated_move():
    response = "go(daniel, office).\ngo(daniel, kitchen).\ngo(daniel, office)."
    backend = ReplayBackend(lambda template, text: response if template == "babi_11_context" else None, fallback=OracleBackend())
    story = ["Daniel went to the office.", "Then he went to the kitchen.", "Then he travelled to the office."]
    facts = extract_facts(babi(story, query="Where is Daniel?", task="babi_11"), backend)
    assert [(f.atom, f.sentence) for f in facts.select("context")] == [
        ("go(daniel,office)", 0),
        ("go(daniel,kitchen)", 1),
        ("go(daniel,office)", 2),
    ]


def test_clutrr_gets_side_query(fixtures_dir):
    instance = load_clutrr(fixtures_dir / "clutrr" / "clutrr.csv")[0]
    facts = extract_facts(instance, OracleBackend())
    assert 'query("Watt","Celestine")' in facts.atom_set("side")
    assert 'sister("Watt","Celestine")' in facts.atom_set("context")
    assert 'female("Celestine")' in facts.atom_set("gender")


def test_gscan_side_facts(fixtures_dir):
    instance = load_gscan(fixtures_dir / "gscan" / "dataset.txt", limit=1)[0]
    facts = side_facts(instance)
    assert "gridSize(4)" in facts.atom_set()
    assert facts.select("side").atom_set() == facts.atom_set()
    parsed = extract_facts(instance, OracleBackend())
    assert {"query(walk)", "queryDesc(red)", "queryDesc(square)"} <= parsed.atom_set("query")
