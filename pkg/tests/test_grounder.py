import pytest

from stableqa.engine import (
    ConstantRedefinitionError,
    GroundingLimitError,
    UnsupportedConstructError,
    atom,
    ground,
    ground_naive,
    least_model,
    parse_atom,
    parse_program,
    solve,
)

from .programs import random_rule_program, random_stratified_program

LOCATION_RULE = """
location(A, Xa, Ya) :- location(B, Xb, Yb), is(A, R, B), offset(R, Dx, Dy), Xa=Xb+Dx, Ya=Yb+Dy.
is("C", top_right, "D").
location("D", 0, 0).
offset(top_right, 1, 1).
"""


def families(grounded):
    return {s.atoms for s in solve(grounded, max_models=0).answer_sets}


def test_interval_expands():
    grounded = ground(parse_program("p(1..3)."))
    assert set(grounded.atoms) == {atom("p", 1), atom("p", 2), atom("p", 3)}


def test_empty_interval_is_not_an_error():
    grounded = ground(parse_program("p(3..1)."))
    assert len(grounded) == 0


def test_location_rule_binds_through_arithmetic():
    grounded = ground(parse_program(LOCATION_RULE))
    assert parse_atom('location("C",1,1)') in grounded.atoms


def test_subtraction_equation_binds_unknown_side():
    text = "n(0). nums(-3..3). m(Xa) :- n(Xb), nums(Xa), Xa-Xb=2."
    grounded = ground(parse_program(text))
    assert atom("m", 2) in grounded.atoms
    assert atom("m", 1) not in grounded.atoms


def test_choice_with_equality_bound():
    grounded = ground(parse_program("{maxtime(M): M=0..10} = 1."))
    choices = [r for r in grounded.rules if r.choice]
    assert len(choices) == 1
    assert len(choices[0].head) == 11
    assert len(solve(grounded, max_models=0).answer_sets) == 11


def test_unsatisfiable_bodies_are_dropped():
    grounded = ground(parse_program("p(1). q(X) :- p(X), r(X). s :- not p(1)."))
    assert all(not r.pos and not r.neg for r in grounded.rules)
    assert set(grounded.atoms) == {atom("p", 1)}


def test_rule_cap_names_the_rule():
    with pytest.raises(GroundingLimitError) as err:
        ground(parse_program("d(1..50). pair(X, Y) :- d(X), d(Y)."), cap=100)
    assert err.value.cap == 100


def test_const_override_and_redefinition():
    program = parse_program("#const n=3. p(1..n).")
    assert len(ground(program)) == 3
    assert len(ground(program, bindings={"n": 5})) == 5
    clash = parse_program("#const n=3. #const n=4. p(n).")
    with pytest.raises(ConstantRedefinitionError):
        ground(clash)
    assert atom("p", 7) in ground(clash, bindings={"n": 7}).atoms


def test_count_assignment():
    text = "carry(a, x). carry(a, y). carry(b, x). agent(a; b). n(A, N) :- agent(A), N = #count{I: carry(A, I)}."
    grounded = ground(parse_program(text))
    assert atom("n", "a", 2) in grounded.atoms
    assert atom("n", "b", 1) in grounded.atoms


def test_conditional_literal_over_completed_predicate():
    text = "item(x; y). have(x). have(y). all :- have(I): item(I). some_missing :- not have(z)."
    grounded = ground(parse_program(text))
    assert atom("all") in grounded.atoms
    assert atom("some_missing") in grounded.atoms


def test_keep_prunes_unrelated_rules():
    text = "{a; b}. c :- a. answer(yes) :- b. unrelated(X) :- c, X = 1..5."
    full = ground(parse_program(text))
    pruned = ground(parse_program(text), keep=["answer"])
    assert len(pruned) < len(full)
    projected = {frozenset(a for a in m if a.name == "answer") for m in families(full)}
    assert {frozenset(a for a in m if a.name == "answer") for m in families(pruned)} == projected


def test_pretty_prints_ground_rules():
    text = ground(parse_program("a :- not b. b :- not a.")).pretty()
    assert "a :- not b." in text
    assert "b :- not a." in text


@pytest.mark.parametrize("seed", range(40))
def test_grounding_matches_naive_instantiation(seed):
    program = parse_program(random_rule_program(seed))
    assert families(ground(program)) == families(ground_naive(program))


@pytest.mark.parametrize("seed", range(40))
def test_least_model_agrees_with_solver(seed):
    program = parse_program(random_stratified_program(seed))
    result = solve(ground(program), max_models=0)
    assert len(result.answer_sets) == 1
    assert result.answer_sets[0].atoms == least_model(program)


def test_least_model_rejects_choice():
    with pytest.raises(UnsupportedConstructError):
        least_model(parse_program("{a}."))


def test_choice_condition_defined_in_the_same_component():
    text = "{h(E, T): ev(E)}1 :- tp(T). tp(0..1). ev(a). ev(b) :- h(a, 0)."
    found = families(ground(parse_program(text)))
    assert len(found) == 5
    assert any(atom("h", "b", 1) in m for m in found)
    assert not any(atom("h", "b", 0) in m for m in found)


@pytest.mark.slow
def test_least_model_agrees_with_solver_acceptance():
    for seed in range(200):
        program = parse_program(random_stratified_program(seed))
        result = solve(ground(program), max_models=0)
        assert [s.atoms for s in result.answer_sets] == [least_model(program)], seed
