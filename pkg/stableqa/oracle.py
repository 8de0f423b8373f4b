"""Deterministic template parser for benchmark sentences.

Grammars are keyed by the prompt template they stand in for: the oracle answers
exactly the requests a completion model would get, and the example pairs of each
template double as its test corpus.
"""
import re
import string
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import srsly

from .constants import NAMES_PATH
from .engine import render
from .engine.terms import Function
from .errors import UnknownTaskError
from .facts import FactSet, label, normalize_fact, scan_atoms
from .engine import parse_atom
from .modules import get_profile
from .utils import split_sentences

Parsed = List[Tuple[str, Optional[List[str]]]]
GRAMMARS: Dict[str, Callable[[str], Parsed]] = {}


def grammar(*names: str, whole_story: bool = False):
    """Register a grammar for templates. Per-sentence grammars return atoms or None."""

    def register(fn):
        run = fn if whole_story else _single(fn)
        for name in names:
            GRAMMARS[name] = run
        return fn

    return register


def _single(fn):
    def run(text: str) -> Parsed:
        text = " ".join(text.split())
        return [(text, fn(text))]

    return run


Rule = Tuple["re.Pattern", Callable[[Dict[str, str]], List[str]]]


def _first(rules: List[Rule], text: str) -> Optional[List[str]]:
    for pattern, build in rules:
        m = pattern.match(text)
        if m:
            return build(m.groupdict())
    return None


def _rule(pattern: str, *atoms: str) -> Rule:
    return re.compile(pattern), lambda g: [a.format(**g) for a in atoms]


def _const(phrase: str) -> str:
    return "_".join(phrase.lower().split())


# -- bAbI ---------------------------------------------------------------------------------

_AGENT = r"(?P<a>[A-Z][a-z]+)"
_GO = r"(?:went back|went|journeyed|travelled|traveled|moved|ran)"
_PICK = r"(?:grabbed|picked up|got|took)"
_DROP = r"(?:dropped|left|put down|discarded)"
_GIVE = r"(?:gave|handed|passed)"
_SIDES = {"east": "eastOf", "west": "westOf", "north": "northOf", "south": "southOf"}
_TIMES = {"yesterday": 0, "morning": 1, "afternoon": 2, "evening": 3}

_ACTIONS = [
    _rule(rf"^{_AGENT} {_GO} to the (?P<l>\w+)\.$", "go({a}, {l})"),
    _rule(rf"^{_AGENT} {_PICK} the (?P<i>\w+)(?: there)?\.$", "pickup({a}, {i})"),
    _rule(rf"^{_AGENT} {_DROP} the (?P<i>\w+)(?: there)?\.$", "drop({a}, {i})"),
    _rule(rf"^{_AGENT} {_GIVE} the (?P<i>\w+) to (?P<b>[A-Z][a-z]+)\.$", "gave({a}, {i}, {b})"),
]
_PRESENCE = [
    _rule(rf"^{_AGENT} is in the (?P<l>\w+)\.$", "go({a}, {l})"),
    _rule(rf"^{_AGENT} is (?:no longer|not) in the (?P<l>\w+)\.$", "go({a}, unknown)"),
]
_MOODS = [_rule(rf"^{_AGENT} is (?P<q>hungry|thirsty|tired|bored)\.$", "is({a}, {q})")]


@grammar("babi_123_context", "babi_5_context", "babi_7_context")
def _actions(text: str) -> Optional[List[str]]:
    return _first(_ACTIONS, text)


@grammar("babi_6_context")
def _presence(text: str) -> Optional[List[str]]:
    return _first(_ACTIONS + _PRESENCE, text)


@grammar("babi_20_context")
def _motives(text: str) -> Optional[List[str]]:
    return _first(_ACTIONS + _MOODS, text)


@grammar("babi_10_context")
def _indefinite(text: str) -> Optional[List[str]]:
    return _first(
        [
            _rule(rf"^{_AGENT} is either in the (?P<l1>\w+) or the (?P<l2>\w+)\.$", "isEither({a}, {l1}, {l2})"),
            _rule(rf"^{_AGENT} is in the (?P<l>\w+)\.$", "isIn({a}, {l})"),
            _ACTIONS[0],
        ],
        text,
    )


@grammar("babi_12_context")
def _conjunction(text: str) -> Optional[List[str]]:
    pair = _rule(rf"^{_AGENT} and (?P<b>[A-Z][a-z]+) {_GO} to the (?P<l>\w+)\.$", "go({a}, {b}, {l})")
    return _first([pair] + _ACTIONS, text)


@grammar("babi_14_context")
def _timed(text: str) -> Optional[List[str]]:
    when = r"(?:this )?(?P<t>yesterday|morning|afternoon|evening)"
    for pattern in (
        rf"^{_AGENT} {_GO} to the (?P<l>\w+) {when}\.$",
        rf"^(?i:{when}),? {_AGENT} {_GO} to the (?P<l>\w+)\.$",
    ):
        m = re.match(pattern, text)
        if m:
            return [f"go({m['a']}, {m['l']}, {_TIMES[m['t'].lower()]})"]
    return None


@grammar("babi_4_context")
def _cardinal_is(text: str) -> Optional[List[str]]:
    m = re.match(r"^The (?P<a>\w+) is (?P<d>east|west|north|south) of the (?P<b>\w+)\.$", text)
    return [f"is({m['a']}, {_SIDES[m['d']]}, {m['b']})"] if m else None


@grammar("babi_19_context")
def _cardinal(text: str) -> Optional[List[str]]:
    m = re.match(r"^The (?P<a>\w+) is (?P<d>east|west|north|south) of the (?P<b>\w+)\.$", text)
    return [f"{m['d']}({m['a']}, {m['b']})"] if m else None


@grammar("babi_15_context")
def _species(text: str) -> Optional[List[str]]:
    return _first(
        [
            _rule(r"^(?P<s>[A-Z][a-z]+) (?:are|is) afraid of (?P<o>\w+)\.$", "species_afraid({s}, {o})"),
            _rule(rf"^{_AGENT} is an? (?P<s>\w+)\.$", "is({a}, {s})"),
        ],
        text,
    )


@grammar("babi_16_context")
def _animals(text: str) -> Optional[List[str]]:
    return _first(
        [
            _rule(rf"^{_AGENT} is an? (?P<s>\w+)\.$", "isAnimal({a}, {s})"),
            _rule(rf"^{_AGENT} is (?P<c>\w+)\.$", "isColor({a}, {c})"),
        ],
        text,
    )


@grammar("babi_18_context")
def _sizes(text: str) -> Optional[List[str]]:
    m = re.match(r"^The (?P<a>[a-z ]+?) (?P<v>fits inside|is bigger than) the (?P<b>[a-z ]+)\.$", text)
    if not m:
        return None
    pred = "smaller" if m["v"] == "fits inside" else "bigger"
    return [f"{pred}({_const(m['a'])}, {_const(m['b'])})"]


_PRONOUN = re.compile(
    rf"^(?:After that|Afterwards|Then|Following that),? (?P<p>he|she|they) {_GO} to the (?P<l>\w+)\.$"
)
_PAIR_GO = re.compile(rf"^{_AGENT} and (?P<b>[A-Z][a-z]+) {_GO} to the (?P<l>\w+)\.$")
_ONE_GO = re.compile(rf"^{_AGENT} {_GO} to the (?P<l>\w+)\.$")


def _lines(text: str) -> List[str]:
    return [s for line in text.splitlines() for s in split_sentences(line)]


@grammar("babi_11_context", "babi_13_context", whole_story=True)
def _coreference(text: str) -> Parsed:
    """Moves in story order; "he"/"she" and "they" refer to the last named person or pair."""
    person, pair = None, None
    out: Parsed = []
    for sentence in _lines(text):
        m = _PAIR_GO.match(sentence)
        if m:
            pair = (m["a"], m["b"])
            out.append((sentence, [f"go({m['a']}, {m['b']}, {m['l']})"]))
            continue
        m = _ONE_GO.match(sentence)
        if m:
            person = m["a"]
            out.append((sentence, [f"go({m['a']}, {m['l']})"]))
            continue
        m = _PRONOUN.match(sentence)
        if m and m["p"] == "they" and pair:
            out.append((sentence, [f"go({pair[0]}, {pair[1]}, {m['l']})"]))
        elif m and m["p"] != "they" and person:
            out.append((sentence, [f"go({person}, {m['l']})"]))
        else:
            out.append((sentence, None))
    return out


_SHAPE_REL = {"above": "above", "below": "below", "to the left of": "leftOf", "to the right of": "rightOf"}
_SHAPE = re.compile(r"^The (?P<a>[a-z ]+?) is (?P<r>above|below|to the left of|to the right of) the (?P<b>[a-z ]+)[.?]$")


@grammar("babi_17_context", whole_story=True)
def _shapes(text: str) -> Parsed:
    """Objects are numbered in order of first mention."""
    ids: Dict[str, int] = {}
    out: Parsed = []
    for line in text.splitlines():
        sentence = re.sub(r"^Sentence \d+:\s*", "", line.strip())
        if not sentence:
            continue
        m = _SHAPE.match(sentence)
        if not m:
            out.append((sentence, None))
            continue
        atoms = []
        for phrase in (m["a"], m["b"]):
            if phrase not in ids:
                ids[phrase] = len(ids) + 1
                atoms.append(f"obj({ids[phrase]}, ({', '.join(phrase.split())}))")
        atoms.append(f"{_SHAPE_REL[m['r']]}({ids[m['a']]}, {ids[m['b']]})")
        out.append((sentence, atoms))
    return out


@grammar("babi_17_query")
def _shape_query(text: str) -> Optional[List[str]]:
    objects, _, sentence = text.rpartition("Sentence:")
    ids = {}
    for _, value in scan_atoms(objects):
        if value.name == "obj" and len(value.args) == 2:
            desc = value.args[1]
            words = [label(w) for w in desc.args] if isinstance(desc, Function) and desc.name == "" else [label(desc)]
            ids[" ".join(words)] = value.args[0]
    m = re.match(r"^Is the (?P<a>[a-z ]+?) (?P<r>above|below|to the left of|to the right of) the (?P<b>[a-z ]+)\?$", sentence.strip())
    if not m or m["a"] not in ids or m["b"] not in ids:
        return None
    return [f"{_SHAPE_REL[m['r']]}_nondirect({ids[m['a']]}, {ids[m['b']]})"]


_BABI_QUERIES = {
    "where-agent": [_rule(rf"^Where is {_AGENT}\?$", "whereAgent({a})")],
    "babi_2_query": [_rule(r"^Where is the (?P<i>\w+)\?$", "loc({i})")],
    "babi_3_query": [_rule(r"^Where was the (?P<i>\w+) before the (?P<l>\w+)\?$", "before({i}, {l})")],
    "babi_14_query": [_rule(rf"^Where was {_AGENT} before the (?P<l>\w+)\?$", "before({a}, {l})")],
    "babi_5_query": [
        _rule(rf"^What did {_AGENT} give to (?P<b>[A-Z][a-z]+)\?$", "whatWasGiven({a}, {b})"),
        _rule(r"^Who received the (?P<i>\w+)\?$", "received({i})"),
        _rule(rf"^Who did {_AGENT} give the (?P<i>\w+) to\?$", "whoWasGiven({a}, {i})"),
        _rule(r"^Who gave the (?P<i>\w+) to (?P<b>[A-Z][a-z]+)\?$", "whoGave({i}, {b})"),
        _rule(r"^Who gave the (?P<i>\w+)\?$", "whoGave({i})"),
    ],
    "babi_6_query": [_rule(rf"^Is {_AGENT} in the (?P<l>\w+)\?$", "isIn({a}, {l})")],
    "babi_7_query": [_rule(rf"^How many objects is {_AGENT} carrying\?$", "howMany({a})")],
    "babi_8_query": [_rule(rf"^What is {_AGENT} carrying\?$", "carrying({a})")],
    "babi_10_query": [_rule(rf"^Is {_AGENT} in the (?P<l>\w+)\?$", "isInQ({a}, {l})")],
    "babi_15_query": [_rule(r"^What is (?P<a>[A-Za-z]+) afraid of\?$", "agent_afraid({a})")],
    "babi_16_query": [_rule(rf"^What color is {_AGENT}\?$", "isColor({a})")],
    "babi_19_query": [
        _rule(r"^How do you go from the (?P<a>\w+) to the (?P<b>\w+)\?$", "initial_loc({a})", "goal({b})")
    ],
    "babi_20_query": [
        _rule(r"^Where will (?P<a>[A-Za-z]+) go\?$", "query(where, {a}, go)"),
        _rule(r"^Why did (?P<a>[A-Za-z]+) go to the (?P<l>\w+)\?$", "query(why, {a}, go, {l})"),
        _rule(r"^Why did (?P<a>[A-Za-z]+) get the (?P<o>\w+)\?$", "query(why, {a}, get, {o})"),
    ],
}


def _query_grammar(rules: List[Rule]):
    return lambda text: _first(rules, text)


for _name, _rules in _BABI_QUERIES.items():
    if _name == "where-agent":
        grammar("babi_1_query", "babi_11_query", "babi_12_query", "babi_13_query")(_query_grammar(_rules))
    else:
        grammar(_name)(_query_grammar(_rules))


@grammar("babi_4_query")
def _cardinal_query(text: str) -> Optional[List[str]]:
    m = re.match(r"^What is (?P<d>east|west|north|south) of the (?P<b>\w+)\?$", text)
    if m:
        return [f"query(what, {_SIDES[m['d']]}, {m['b']})"]
    m = re.match(r"^What is the (?P<a>\w+) (?P<d>east|west|north|south) of\?$", text)
    if m:
        return [f"query({m['a']}, {_SIDES[m['d']]}, what)"]
    return None


@grammar("babi_18_query")
def _size_query(text: str) -> Optional[List[str]]:
    m = re.match(r"^Does the (?P<a>[a-z ]+?) fit in the (?P<b>[a-z ]+)\?$", text)
    if m:
        return [f"doesFit({_const(m['a'])}, {_const(m['b'])})"]
    m = re.match(r"^Is the (?P<a>[a-z ]+?) bigger than the (?P<b>[a-z ]+)\?$", text)
    if m:
        return [f"isBigger({_const(m['a'])}, {_const(m['b'])})"]
    return None


# -- StepGame -----------------------------------------------------------------------------

STEPGAME_QUERY = "What is the relation of the agent {A} to the agent {B}?"

STEPGAME_PHRASES: Dict[str, List[str]] = {
    "top": [
        "{A} is above {B}.",
        "{A} is on top of {B}.",
        "{A} is over {B}.",
        "{A} is north of {B}.",
        "{A} is directly north of {B}.",
        "{B} is over there with {A} above.",
        "{A} and {B} are parallel, and {A} is on top of {B}.",
        "{A} and {B} are vertical and {A} is above {B}.",
    ],
    "down": [
        "{A} is below {B}.",
        "{A} is under {B}.",
        "{A} is south of {B}.",
        "{A} is directly south of {B}.",
        "{B} is over there with {A} below.",
        "{A} and {B} are parallel, and {A} is below {B}.",
        "{A} and {B} are vertical and {A} is below {B}.",
    ],
    "left": [
        "{A} is to the left of {B}.",
        "{A} is on the left side of {B}.",
        "{A} is west of {B}.",
        "{A} is directly west of {B}.",
        "{A} and {B} are horizontal and {A} is to the left of {B}.",
        "{A} and {B} are side by side with {A} on the left.",
    ],
    "right": [
        "{A} is to the right of {B}.",
        "{A} is on the right side of {B}.",
        "{A} is east of {B}.",
        "{A} is directly east of {B}.",
        "{A} and {B} are horizontal and {A} is to the right of {B}.",
        "{A} and {B} are side by side with {A} on the right.",
    ],
    "top_left": [
        "{A} is to the top left of {B}.",
        "{A} is north west of {B}.",
        "{A} is directly north west of {B}.",
        "{A} is on the left side of and above {B}.",
        "{A} is positioned in the front left corner of {B}.",
        "{A} is diagonally above {B} to the left at a 45 degree angle.",
        "{A} is slightly off center to the top left and {B} is slightly off center to the bottom right.",
        "The objects {A} and {B} are over there. The object {A} is above and slightly to the left of the object {B}.",
    ],
    "top_right": [
        "{A} is to the top right of {B}.",
        "{A} is north east of {B}.",
        "{A} is directly north east of {B}.",
        "{A} is on the right side of and above {B}.",
        "{A} is positioned in the front right corner of {B}.",
        "{A} is diagonally above {B} to the right at a 45 degree angle.",
        "{A} is slightly off center to the top right and {B} is slightly off center to the bottom left.",
        "The objects {A} and {B} are over there. The object {A} is above and slightly to the right of the object {B}.",
    ],
    "down_left": [
        "{A} is to the bottom left of {B}.",
        "{A} is south west of {B}.",
        "{A} is directly south west of {B}.",
        "{A} is on the left side of and below {B}.",
        "{A} is positioned in the back left corner of {B}.",
        "{A} is diagonally below {B} to the left at a 45 degree angle.",
        "{A} is slightly off center to the bottom left and {B} is slightly off center to the top right.",
        "The objects {A} and {B} are over there. The object {A} is lower and slightly to the left of the object {B}.",
    ],
    "down_right": [
        "{A} is to the bottom right of {B}.",
        "{A} is south east of {B}.",
        "{A} is directly south east of {B}.",
        "{A} is on the right side of and below {B}.",
        "{A} is positioned in the back right corner of {B}.",
        "{A} is diagonally below {B} to the right at a 45 degree angle.",
        "{A} is slightly off center to the bottom right and {B} is slightly off center to the top left.",
        "The objects {A} and {B} are over there. The object {A} is lower and slightly to the right of the object {B}.",
    ],
}

# 12 is top, 1 and 2 top_right, 3 right, 4 and 5 down_right, 6 down, 7 and 8
# down_left, 9 left, 10 and 11 top_left.
CLOCK = {
    12: "top", 1: "top_right", 2: "top_right", 3: "right", 4: "down_right", 5: "down_right",
    6: "down", 7: "down_left", 8: "down_left", 9: "left", 10: "top_left", 11: "top_left",
}
CLOCK_PHRASES = [
    "{A} is at {B}'s {n} o'clock.",
    "{B} is there and {A} is at the {n} position of a clock face.",
    "{A} is {side} {B} at {n} o'clock.",
]
BETWEEN_PHRASE = "If {B} is the center of a clock face, {A} is located between {n} and {m}."
SIDE = {
    "top": "above", "top_left": "above", "top_right": "above",
    "down": "below", "down_left": "below", "down_right": "below",
    "left": "to the left of", "right": "to the right of",
}
_SLOTS = {
    "A": "[A-Z]",
    "B": "[A-Z]",
    "n": r"\d{1,2}",
    "m": r"\d{1,2}",
    "side": "above|below|to the left of|to the right of",
}


def _compile(template: str) -> "re.Pattern":
    pattern, seen = "", set()
    for literal, field, _, _ in string.Formatter().parse(template):
        pattern += re.escape(literal)
        if field is None:
            continue
        if field in seen:
            pattern += f"(?P={field})"
        else:
            seen.add(field)
            pattern += f"(?P<{field}>{_SLOTS[field]})"
    return re.compile(f"^{pattern}$")


@lru_cache(maxsize=None)
def _stepgame_patterns() -> List[Tuple["re.Pattern", Optional[str]]]:
    """Compiled phrases with their relation; None means the clock position decides."""
    compiled = [(_compile(t), rel) for rel, templates in STEPGAME_PHRASES.items() for t in templates]
    compiled += [(_compile(t), None) for t in CLOCK_PHRASES + [BETWEEN_PHRASE]]
    return compiled


def stepgame_phrase(rng, relation: str, a: str, b: str) -> str:
    """A sentence stating ``relation(a, b)``, drawn from the same inventory the oracle reads."""
    options = [(t, {}) for t in STEPGAME_PHRASES[relation]]
    for n, rel in CLOCK.items():
        if rel == relation:
            options += [(t, {"n": n, "side": SIDE[relation]}) for t in CLOCK_PHRASES]
            if CLOCK.get(n + 1) == rel and n != 12:
                options.append((BETWEEN_PHRASE, {"n": n, "m": n + 1}))
    template, extra = options[rng.randrange(len(options))]
    return template.format(A=a, B=b, **extra)


@grammar("stepgame")
def _stepgame(text: str) -> Optional[List[str]]:
    m = _compile(STEPGAME_QUERY).match(text)
    if m:
        return [f'query("{m["A"]}", "{m["B"]}")']
    for pattern, relation in _stepgame_patterns():
        m = pattern.match(text)
        if not m:
            continue
        if relation is None:
            hours = [int(h) for h in (m.groupdict().get("n"), m.groupdict().get("m")) if h]
            positions = {CLOCK.get(h) for h in hours}
            if len(positions) != 1 or None in positions:
                continue
            relation = positions.pop()
            side = m.groupdict().get("side")
            if side and side != SIDE[relation]:
                continue
        return [f'{relation}("{m["A"]}", "{m["B"]}")']
    return None


# -- CLUTRR -------------------------------------------------------------------------------

MALE_RELATIONS = {
    "father", "son", "brother", "husband", "grandfather", "grandson", "uncle", "nephew",
    "son_in_law", "father_in_law",
}
FEMALE_RELATIONS = {
    "mother", "daughter", "sister", "wife", "grandmother", "granddaughter", "aunt", "niece",
    "daughter_in_law", "mother_in_law",
}
_NAME = r"\[(?P<{}>[^\]]+)\]"
_KIN = r"(?P<r>[a-z]+(?:-in-law)?)"
_KINSHIP = [
    (re.compile(rf"^{_NAME.format('x')} is {_NAME.format('y')}'s {_KIN}\.$"), "reverse"),
    (re.compile(rf"^{_NAME.format('x')} is (?:the|a|an) {_KIN} of {_NAME.format('y')}\.$"), "reverse"),
    (re.compile(rf"^{_NAME.format('y')} has (?:a|an) {_KIN} (?:named|called) {_NAME.format('x')}\.$"), "reverse"),
]


@lru_cache(maxsize=None)
def lexicon() -> Dict[str, str]:
    """Name to gender, from the bundled name lists."""
    names = srsly.read_yaml(NAMES_PATH)
    return {**{n: "male" for n in names["male"]}, **{n: "female" for n in names["female"]}}


def _kinship(sentence: str) -> Optional[Tuple[str, str, str]]:
    """(relation, anchor, relative): ``relative`` is the ``relation`` of ``anchor``."""
    for pattern, _ in _KINSHIP:
        m = pattern.match(sentence)
        if m:
            relation = m["r"].replace("-", "_")
            if relation in MALE_RELATIONS | FEMALE_RELATIONS:
                return relation, m["y"], m["x"]
    return None


@grammar("clutrr_relation", "clutrr_s_relation", whole_story=True)
def _family(text: str) -> Parsed:
    out: Parsed = []
    for sentence in split_sentences(text):
        found = _kinship(sentence)
        out.append((sentence, [f'{found[0]}("{found[1]}", "{found[2]}")'] if found else None))
    return out


@grammar("clutrr_gender", "clutrr_s_gender", whole_story=True)
def _genders(text: str) -> Parsed:
    """Everyone in order of first mention; relation words decide before the name list."""
    known: Dict[str, str] = {}
    for sentence in split_sentences(text):
        found = _kinship(sentence)
        if found and found[2] not in known:
            known[found[2]] = "male" if found[0] in MALE_RELATIONS else "female"
    atoms = []
    missing = []
    for name in dict.fromkeys(re.findall(r"\[([^\]]+)\]", text)):
        gender = known.get(name) or lexicon().get(name)
        if gender:
            atoms.append(f'{gender}("{name}")')
        else:
            missing.append(name)
    out: Parsed = [(text, atoms)]
    out += [(name, None) for name in missing]
    return out


# -- gSCAN and Pick&Place -----------------------------------------------------------------


@grammar("gscan")
def _command(text: str) -> Optional[List[str]]:
    words = text.strip().rstrip(".").split()
    if not words or words[0] not in ("walk", "push", "pull"):
        return None
    verb, rest, adverb = words[0], words[1:], None
    if rest[-2:] in (["while", "spinning"], ["while", "zigzagging"]):
        adverb, rest = rest[-1], rest[:-2]
    elif rest and rest[-1] in ("cautiously", "hesitantly"):
        adverb, rest = rest[-1], rest[:-1]
    if rest[:1] == ["to"]:
        rest = rest[1:]
    if rest[:1] in (["a"], ["an"], ["the"]):
        rest = rest[1:]
    if not rest:
        return None
    atoms = [f"query({verb})"] + [f"queryDesc({w})" for w in rest]
    return atoms + ([f"while({adverb})"] if adverb else [])


_ON = re.compile(r"^The (?P<s>\w+ block) is on the (?P<d>\w+ (?:block|bowl)|table)\.$")
_NOTHING = re.compile(r"^Nothing is on the \w+ (?:block|bowl)\.$")


@grammar("pickplace_initial")
def _initial(text: str) -> Optional[List[str]]:
    if _NOTHING.match(text):
        return []
    m = _ON.match(text)
    return [f'on("{m["s"]}", "{m["d"]}", 0)'] if m else None


@grammar("pickplace_goal")
def _goal(text: str) -> Optional[List[str]]:
    if _NOTHING.match(text):
        return []
    m = _ON.match(text)
    return [f'on("{m["s"]}", "{m["d"]}")'] if m else None


# -- entry points -------------------------------------------------------------------------


def run_grammar(name: str, text: str) -> Parsed:
    if name not in GRAMMARS:
        raise UnknownTaskError(name, what="oracle grammar")
    return GRAMMARS[name](text)


def oracle_atoms(name: str, text: str) -> List[Function]:
    """Every atom the template's grammar reads out of ``text``; unmatched parts add nothing."""
    return [parse_atom(normalize_fact(a)) for _, atoms in run_grammar(name, text) for a in atoms or []]


def oracle_response(name: str, text: str) -> str:
    """What a perfect completion model would answer to the template filled with ``text``."""
    return "\n".join(f"{render(a)}." for a in oracle_atoms(name, text))


def infer_role(task: str, sentence: str) -> str:
    prompts = get_profile(task).prompts
    if prompts.context is None or sentence.rstrip().endswith("?"):
        return "query"
    return "context"


def oracle_parse(task: str, sentence: str, role: Optional[str] = None, index: Optional[int] = None) -> FactSet:
    """Parse one sentence (or a whole story, for whole-story templates) without a model.

    ``role`` picks the context, query or gender template of the task and defaults to
    query for questions. Sentences no pattern matches are listed in ``unmatched``.
    """
    role = role or infer_role(task, sentence)
    name = getattr(get_profile(task).prompts, role, None)
    if name is None:
        raise UnknownTaskError(task, what=f"{role} template")
    results = run_grammar(name, sentence)
    facts = FactSet()
    for i, (text, atoms) in enumerate(results):
        position = index if len(results) == 1 else i
        if atoms is None:
            facts.mark_unmatched(position, text)
            continue
        for a in atoms:
            facts.add(parse_atom(normalize_fact(a)), source=role, sentence=position, span=text)
    return facts
