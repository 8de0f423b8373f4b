import pytest

from stableqa.engine import (
    ParseError,
    SafetyError,
    UnsupportedConstructError,
    atom,
    parse_atom,
    parse_program,
)
from stableqa.engine.terms import Choice, Disjunction, String, WeakConstraint


def test_empty_program():
    program = parse_program("")
    assert len(program) == 0
    assert program.facts() == []


def test_lowercase_fact():
    program = parse_program("go(max, bathroom).")
    assert program.facts() == [atom("go", "max", "bathroom")]


def test_capitalised_argument_is_a_variable():
    with pytest.raises(SafetyError) as err:
        parse_program("go(Max, bathroom).")
    assert err.value.variable == "Max"
    assert err.value.rule_index == 1


def test_pool_expands_into_facts():
    program = parse_program("offset(overlap,0,0; top,0,1).")
    assert set(program.facts()) == {atom("offset", "overlap", 0, 0), atom("offset", "top", 0, 1)}


def test_argument_pool_in_single_position():
    program = parse_program("direction(east; west; north; south).")
    assert len(program.facts()) == 4


def test_comments_are_stripped():
    text = "%* a block\ncomment *%\np. % trailing\n%*****%\nq."
    assert parse_program(text).facts() == [atom("p"), atom("q")]


def test_quoted_strings_are_kept():
    fact = parse_program('top_right("C", "D").').facts()[0]
    assert fact.args == (String("C"), String("D"))


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_program("p(1).\nq(2", name="broken.lp")
    assert err.value.line == 2
    assert "broken.lp:2" in str(err.value)


@pytest.mark.parametrize(
    "text",
    [
        "#show p/1.",
        "s(S) :- S = #sum{X: p(X)}, p(1).",
        "p(@f(1)).",
        "p(X) :- q(Y), X = Y / 2.",
    ],
)
def test_unsupported_constructs_are_named(text):
    with pytest.raises(UnsupportedConstructError):
        parse_program(text)


def test_unsafe_variable_in_negation():
    with pytest.raises(SafetyError) as err:
        parse_program("p(1).\nq(X) :- p(1), not r(X).")
    assert err.value.variable == "X"
    assert err.value.rule_index == 2


def test_assignment_makes_variable_safe():
    program = parse_program("p(1). q(Y) :- p(X), Y = X + 1.")
    assert len(program) == 2


def test_choice_and_disjunction_heads():
    program = parse_program("{maxtime(M): M=0..10} = 1.\na; b :- c.\n c.")
    kinds = [type(s.head) for s in program.statements]
    assert Choice in kinds
    assert Disjunction in kinds


def test_weak_constraint_default_level():
    program = parse_program("p(1). :~ p(M). [M]")
    weak = [s for s in program.statements if isinstance(s, WeakConstraint)]
    assert len(weak) == 1
    assert weak[0].level.evaluate({}) == 0


def test_const_definitions_are_recorded():
    program = parse_program("#const grippers=1.\ncap(grippers).")
    assert ("grippers", 1) in program.consts


def test_parse_atom_handles_strong_negation_and_tuples():
    assert parse_atom("-holds_at(f,3)").name == "-holds_at"
    assert parse_atom("pos(agent,(2,3))") == atom("pos", "agent", (2, 3))
    with pytest.raises(ParseError):
        parse_atom("p(X)")
