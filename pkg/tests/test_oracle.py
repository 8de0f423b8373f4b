import random

import pytest

from stableqa.errors import UnknownTaskError
from stableqa.oracle import STEPGAME_PHRASES, infer_role, lexicon, oracle_parse, oracle_response, stepgame_phrase


@pytest.mark.parametrize(
    "sentence,expected",
    [
        ("V is at A's 9 o'clock.", 'left("V","A")'),
        ("H is below J at 4 o'clock.", 'down_right("H","J")'),
        ("If H is the center of a clock face, B is located between 10 and 11.", 'top_left("B","H")'),
        ("J and Y are horizontal and J is to the right of Y.", 'right("J","Y")'),
        ("What is the relation of the agent Y to the agent J?", 'query("Y","J")'),
    ],
)
def test_stepgame_sentences(sentence, expected):
    assert oracle_parse("stepgame", sentence).atom_set() == {expected}


def test_clock_side_must_agree():
    facts = oracle_parse("stepgame", "H is above J at 4 o'clock.")
    assert len(facts) == 0
    assert facts.unmatched


def test_every_phrase_reads_back():
    rng = random.Random(7)
    for relation in STEPGAME_PHRASES:
        for _ in range(20):
            sentence = stepgame_phrase(rng, relation, "K", "P")
            assert oracle_parse("stepgame", sentence).atom_set() == {f'{relation}("K","P")'}, sentence


@pytest.mark.parametrize(
    "task,sentence,expected",
    [
        ("babi_1", "Mary journeyed to the bathroom.", "go(mary,bathroom)"),
        ("babi_1", "Where is Mary?", "whereAgent(mary)"),
        ("babi_2", "Daniel picked up the football there.", "pickup(daniel,football)"),
        ("babi_5", "Fred handed the milk to Bill.", "gave(fred,milk,bill)"),
        ("babi_6", "Sandra is no longer in the office.", "go(sandra,unknown)"),
        ("babi_10", "Julie is either in the school or the park.", "isEither(julie,school,park)"),
        ("babi_14", "This afternoon Fred went to the park.", "go(fred,park,2)"),
        ("babi_18", "The box of chocolates fits inside the chest.", "smaller(box_of_chocolates,chest)"),
        ("babi_19", "The kitchen is north of the garden.", "north(kitchen,garden)"),
        ("babi_20", "Why did Sumit go to the garden?", "query(why,sumit,go,garden)"),
    ],
)
def test_babi_sentences(task, sentence, expected):
    assert expected in oracle_parse(task, sentence)


def test_coreference_follows_the_last_named_agent():
    story = "Mary went to the kitchen.\nThen she moved to the garden.\nJohn went to the office.\nAfter that he went to the hallway."
    facts = oracle_parse("babi_11", story, role="context")
    assert [f.atom for f in facts] == ["go(mary,kitchen)", "go(mary,garden)", "go(john,office)", "go(john,hallway)"]
    assert [f.sentence for f in facts] == [0, 1, 2, 3]


def test_shapes_get_numbers_in_order_of_mention():
    story = "Sentence 1: The triangle is above the pink rectangle.\nSentence 2: The blue square is to the left of the triangle."
    facts = oracle_parse("babi_17", story, role="context")
    assert "above(1,2)" in facts
    assert "leftOf(3,1)" in facts


def test_clutrr_pool_story():
    story = "[Watt] and [Celestine] asked their mother, if they could go play in the pool. [Celestine] is [Watt]'s sister."
    facts = oracle_parse("clutrr", story, role="context")
    assert facts.atom_set() == {'sister("Watt","Celestine")'}
    assert len(facts.unmatched) == 1
    genders = oracle_parse("clutrr", story, role="gender")
    assert genders.atom_set() == {'male("Watt")', 'female("Celestine")'}


def test_relation_words_decide_gender_before_names():
    genders = oracle_parse("clutrr_s", "[Casey] is [Raquel]'s sister.", role="gender")
    assert 'female("Casey")' in genders


def test_lexicon_has_both_genders():
    names = lexicon()
    assert names["Watt"] == "male"
    assert names["Celestine"] == "female"


@pytest.mark.parametrize(
    "command,expected",
    [
        ("walk to a red square", {"query(walk)", "queryDesc(red)", "queryDesc(square)"}),
        ("pull a circle hesitantly", {"query(pull)", "queryDesc(circle)", "while(hesitantly)"}),
        ("push a big cylinder while zigzagging", {"query(push)", "queryDesc(big)", "queryDesc(cylinder)", "while(zigzagging)"}),
    ],
)
def test_gscan_commands(command, expected):
    assert oracle_parse("gscan", command).atom_set() == expected


def test_pickplace_sentences():
    assert oracle_response("pickplace_initial", "The red block is on the table.") == 'on("red block","table",0).'
    assert oracle_response("pickplace_goal", "The red block is on the blue bowl.") == 'on("red block","blue bowl").'
    assert oracle_response("pickplace_goal", "Nothing is on the blue bowl.") == ""


def test_unmatched_sentences_are_reported():
    facts = oracle_parse("babi_1", "Mary smiled at the kitchen.")
    assert len(facts) == 0
    assert facts.unmatched == [(None, "Mary smiled at the kitchen.")]


def test_roles():
    assert infer_role("babi_1", "Where is Mary?") == "query"
    assert infer_role("babi_1", "Mary went home.") == "context"
    assert infer_role("gscan", "walk to a circle") == "query"


def test_task_without_role_template():
    with pytest.raises(UnknownTaskError):
        oracle_parse("gscan", "walk to a circle", role="context")
