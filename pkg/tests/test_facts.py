import pytest

from stableqa.engine import String, atom
from stableqa.facts import FactSet, label, normalize_fact, parse_response, scan_atoms


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("go(Max, bathroom)", "go(max, bathroom)"),
        ("is(Sumit, living room)", "is(sumit, living_room)"),
        ('mother("Watt", "Celestine")', 'mother("Watt", "Celestine")'),
        ('feature("red block", block)', 'feature("red block", block)'),
        ("query(what, westOf, office)", "query(what, westOf, office)"),
    ],
)
def test_normalize_fact(raw, expected):
    assert normalize_fact(raw) == expected


def test_parse_response_ignores_prose():
    facts = parse_response("Semantic parse: go(Mary, kitchen). Then pickup(Mary, apple).\nDone.")
    assert facts.atom_set() == {"go(mary,kitchen)", "pickup(mary,apple)"}


def test_parse_response_keeps_spans_and_source():
    facts = parse_response('top_right("H", "M").', source="query", sentence=3)
    fact = next(iter(facts))
    assert fact.source == "query"
    assert fact.sentence == 3
    assert fact.span == 'top_right("H", "M")'


def test_unbalanced_atom_is_skipped():
    assert len(parse_response("go(Mary, kitchen")) == 0


def test_scan_atoms_skips_embedded_functors():
    found = [span for span, _ in scan_atoms("Xgo(a). go(b).")]
    assert found == ["go(b)"]


def test_tuples_parse_as_one_argument():
    facts = parse_response("obj(2, (pink, rectangle)).")
    value = facts.atoms()[0]
    assert value.name == "obj"
    assert len(value.args) == 2


def test_fact_set_keeps_one_atom_per_sentence():
    facts = FactSet()
    facts.add("go(mary, kitchen)", sentence=0)
    facts.add("go(mary, kitchen)", sentence=0)
    facts.add("go(mary, kitchen)", sentence=4)
    assert len(facts) == 2
    assert facts.render() == "go(mary,kitchen)."
    assert "go(mary,kitchen)" in facts


def test_fact_set_select_and_extend():
    facts = FactSet()
    facts.add("whereAgent(mary)", source="query")
    other = FactSet()
    other.add("go(mary, garden)", sentence=1)
    other.mark_unmatched(2, "Mary smiled.")
    facts.extend(other)
    assert facts.select("query").atom_set() == {"whereAgent(mary)"}
    assert facts.atom_set("context") == {"go(mary,garden)"}
    assert facts.unmatched == [(2, "Mary smiled.")]


def test_fact_set_round_trips_through_records():
    facts = FactSet()
    facts.add('sister("Watt", "Celestine")', sentence=1, span="[Celestine] is [Watt]'s sister.")
    again = FactSet(facts.to_records())
    assert again.atom_set() == facts.atom_set()
    assert again.atoms()[0] == facts.atoms()[0]


def test_label():
    assert label(String("Celestine")) == "Celestine"
    assert label(atom("kitchen")) == "kitchen"
    assert label(3) == "3"
