import itertools as it
import shutil

import pytest

from stableqa.engine import (
    OPTIMUM_FOUND,
    SAT,
    UNSAT,
    SolveTimeout,
    atom,
    check_stability,
    ground,
    parse_atom,
    parse_program,
    solve,
    solve_external,
)
from stableqa.engine.external import parse_output, split_atoms

from .programs import random_disjunctive_program, random_normal_program, random_weak_program

STEPGAME = """
offset(overlap,0,0; top,0,1; down,0,-1; left,-1,0; right,1,0;
       top_left,-1,1; top_right,1,1; down_left,-1,-1; down_right,1,-1).
is(A, top_right, B) :- top_right(A, B).
location(A, Xa, Ya) :- location(B, Xb, Yb), is(A, R, B), offset(R, Dx, Dy), Xa=Xb+Dx, Ya=Yb+Dy.
location(B, 0, 0) :- query(A, B).
answer(R) :- query(A, B), location(A, X, Y), offset(R, Dx, Dy),
    Dx=-1: X<0; Dx=0: X=0; Dx=1: X>0;
    Dy=-1: Y<0; Dy=0: Y=0; Dy=1: Y>0.
top_right("C", "D").
query("C", "D").
"""

needs_clingo = pytest.mark.skipif(shutil.which("clingo") is None, reason="clingo is not installed")


def grounded(text):
    return ground(parse_program(text))


def brute_force(program):
    """Every stable candidate, found by testing all subsets of the non-fact atoms."""
    facts = {program.symbol(f) for f in program.facts}
    free = [a for a in program.atoms if a not in facts and not a.name.startswith("#")]
    found = set()
    for size in range(len(free) + 1):
        for subset in it.combinations(free, size):
            candidate = facts | set(subset)
            if check_stability(program, candidate):
                found.add(frozenset(candidate))
    return found


def test_even_loop_has_two_answer_sets(models):
    assert models("a :- not b. b :- not a.") == {frozenset({"a"}), frozenset({"b"})}


def test_facts_only_program(models):
    assert models("p(1). p(2). q(a).") == {frozenset({"p(1)", "p(2)", "q(a)"})}


def test_odd_loop_is_unsatisfiable():
    result = solve(grounded("a :- not a."))
    assert result.status == UNSAT
    assert result.answer_sets == []


def test_positive_loop_is_unfounded(models):
    assert models("{c}. a :- b. b :- a. a :- c.") == {frozenset(), frozenset({"a", "b", "c"})}


def test_stepgame_single_hop():
    result = solve(grounded(STEPGAME))
    assert result.status == SAT
    assert result.answer_sets[0].select("answer") == [atom("answer", "top_right")]


def test_check_stability_examples():
    program = grounded("a :- not b.")
    assert check_stability(program, {atom("a")})
    assert not check_stability(program, {atom("a"), atom("b")})
    assert not check_stability(grounded("a."), set())


def test_check_stability_rejects_unknown_atoms():
    assert not check_stability(grounded("a."), {atom("a"), atom("zzz")})


def test_disjunction_requires_minimality(models):
    assert models("a; b.") == {frozenset({"a"}), frozenset({"b"})}
    assert models("a; b. a :- b. b :- a.") == {frozenset({"a", "b"})}


def test_head_cycle_through_derived_atom(models):
    text = "p. a; b :- p. c :- a. c :- b. a :- c, b. b :- c, a."
    assert models(text) == {frozenset({"p", "a", "b", "c"})}
    assert check_stability(grounded(text), {atom("p"), atom("a"), atom("b"), atom("c")})


@pytest.mark.parametrize("seed", range(40))
def test_disjunctive_programs_match_brute_force(seed):
    program = grounded(random_disjunctive_program(seed))
    result = solve(program, max_models=0)
    assert {s.atoms for s in result.answer_sets} == brute_force(program)


def test_choice_bounds(models):
    found = models("1 {p(1..3)} 2.")
    assert all(1 <= len(m) <= 2 for m in found)
    assert len(found) == 6


def test_strong_negation_clash_reports_witness():
    result = solve(grounded("p. -p."))
    assert result.status == UNSAT
    assert set(result.witness) == {parse_atom("p"), parse_atom("-p")}


def test_strong_negation_is_a_separate_atom(models):
    assert models("-p. q :- -p.") == {frozenset({"-p", "q"})}


def test_lexicographic_optimization():
    text = "{a; b; c}. :- not a, not b. :~ a. [2@0] :~ b. [1@0] :~ c. [1@1]"
    result = solve(grounded(text))
    assert result.status == OPTIMUM_FOUND
    assert result.cost == {1: 0, 0: 1}
    assert result.answer_sets[0].atoms == {atom("b")}


def test_weak_tuples_count_once(models):
    text = "{a; b}. :- not a, not b. :~ a. [1, a] :~ b. [1, b]"
    assert models(text) == {frozenset({"a"}), frozenset({"b"})}
    shared = "{a; b}. :- not a, not b. :~ a. [1] :~ b. [1]"
    assert len(models(shared)) == 3


def test_optimize_off_enumerates_everything():
    text = "{a; b}. :~ a. [1@0]"
    result = solve(grounded(text), max_models=0, optimize=False)
    assert result.status == SAT
    assert len(result.answer_sets) == 4
    assert all(s.cost is not None for s in result.answer_sets)


def test_assumptions_restrict_models():
    program = grounded("a :- not b. b :- not a.")
    result = solve(program, max_models=0, assumptions=[(atom("b"), True)])
    assert [s.atoms for s in result.answer_sets] == [frozenset({atom("b")})]
    assert solve(program, assumptions=[(atom("missing"), True)]).status == UNSAT


def test_timeout_raises():
    program = grounded("{p(1..14)}. :- #count{X: p(X)} = 7.")
    with pytest.raises(SolveTimeout):
        solve(program, max_models=0, timeout=1e-9)


def test_timeout_carries_a_stable_incumbent():
    program = grounded("{p(1..16)}. :- #count{X: p(X)} < 3. :~ p(X). [X@0, X]")
    with pytest.raises(SolveTimeout) as caught:
        solve(program, max_models=0, timeout=1e-9)
    incumbent = caught.value.incumbent
    if incumbent is not None:
        assert check_stability(program, incumbent.atoms)
        assert incumbent.cost == caught.value.best_cost


def test_count_aggregate_in_body(models):
    found = models("{p(1..3)}. ok :- #count{X: p(X)} >= 2. :- not ok.")
    assert all(sum(1 for a in m if a.startswith("p(")) >= 2 for m in found)
    assert len(found) == 4


@pytest.mark.parametrize("seed", range(60))
def test_matches_brute_force(seed):
    program = grounded(random_normal_program(seed, atoms=8, rules=14))
    result = solve(program, max_models=0)
    assert {s.atoms for s in result.answer_sets} == brute_force(program)


@pytest.mark.slow
def test_matches_brute_force_acceptance():
    for seed in range(500):
        program = grounded(random_normal_program(seed, atoms=15, rules=25))
        result = solve(program, max_models=0)
        assert {s.atoms for s in result.answer_sets} == brute_force(program), seed


@pytest.mark.parametrize("seed", range(30))
def test_answer_sets_are_stable_and_consistent(seed):
    program = grounded(random_normal_program(seed, atoms=12, rules=22))
    for answer in solve(program, max_models=0).answer_sets:
        assert check_stability(program, answer.atoms)
        assert not any(a.name.startswith("-") and a.positive in answer.atoms for a in answer.atoms)


@pytest.mark.parametrize("seed", range(30))
def test_optimum_dominates_every_model(seed):
    program = grounded(random_weak_program(seed))
    if not program.has_weak:
        pytest.skip("all soft constraints were decided while grounding")
    everything = solve(program, max_models=0, optimize=False)
    best = solve(program, max_models=0)
    if everything.status == UNSAT:
        assert best.status == UNSAT
        return
    levels = program.levels
    as_tuple = lambda cost: tuple(cost[level] for level in levels)
    optimum = min(as_tuple(s.cost) for s in everything.answer_sets)
    assert as_tuple(best.cost) == optimum
    expected = {s.atoms for s in everything.answer_sets if as_tuple(s.cost) == optimum}
    assert {s.atoms for s in best.answer_sets} == expected


def test_split_atoms_respects_quotes_and_nesting():
    line = 'location("C",1,1) holds_at(at(max,"the hall"),2) -p'
    assert split_atoms(line) == ['location("C",1,1)', 'holds_at(at(max,"the hall"),2)', "-p"]


def test_parse_output_reads_optimal_models():
    stdout = "\n".join(
        [
            "clingo version 5.6.2",
            "Solving...",
            "Answer: 1",
            "a c",
            "Optimization: 1 3",
            "Answer: 2",
            "b",
            "Optimization: 0 2",
            "OPTIMUM FOUND",
        ]
    )
    result = parse_output(stdout, [1, 0], optimizing=True, max_models=1)
    assert result.status == OPTIMUM_FOUND
    assert result.cost == {1: 0, 0: 2}
    assert result.answer_sets[0].atoms == {atom("b")}


def test_parse_output_unsat():
    assert parse_output("Solving...\nUNSATISFIABLE\n", [], optimizing=False).status == UNSAT


@needs_clingo
def test_external_matches_internal_on_simple_programs():
    for text in ["p(1). p(2).", "a :- not b. b :- not a."]:
        external = solve_external(text, max_models=0)
        internal = solve(grounded(text), max_models=0)
        assert {s.atoms for s in external.answer_sets} == {s.atoms for s in internal.answer_sets}


@needs_clingo
@pytest.mark.parametrize("seed", range(20))
def test_external_differential(seed):
    text = random_normal_program(seed, atoms=10, rules=18)
    external = solve_external(text, max_models=0)
    internal = solve(grounded(text), max_models=0)
    assert {s.atoms for s in external.answer_sets} == {s.atoms for s in internal.answer_sets}


@needs_clingo
@pytest.mark.parametrize("seed", range(10))
def test_external_optimum_cost(seed):
    text = random_weak_program(seed)
    external = solve_external(text)
    internal = solve(grounded(text))
    assert external.status == internal.status
    assert external.cost == internal.cost
