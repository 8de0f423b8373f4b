"""Fact sets: the atoms a parser hands to the reasoner, with provenance."""
import re
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .engine import LogicError, parse_atom, render
from .engine.terms import Function, String
from .types import Fact, FactSource

_FUNCTOR = re.compile(r"-?[a-z_][A-Za-z0-9_]*\(")
_QUOTED = re.compile(r'"(?:[^"\\]|\\.)*"')
_WORD_RUN = re.compile(r"(?<![A-Za-z0-9_\"])([A-Za-z][A-Za-z0-9_]*(?:[ \t]+[A-Za-z][A-Za-z0-9_]*)+)(?=\s*[,)])")
_BARE = re.compile(r"(?<![A-Za-z0-9_\"])([A-Za-z_][A-Za-z0-9_]*)(?![A-Za-z0-9_]*\s*\()")


class FactSet:
    """Ordered set of ground atoms; the same atom from two sentences stays twice."""

    def __init__(self, facts: Iterable[Fact] = ()) -> None:
        self._facts: Dict[Tuple[str, str, Optional[int]], Fact] = {}
        self._parsed: Dict[str, Function] = {}
        self.unmatched: List[Tuple[Optional[int], str]] = []
        for fact in facts:
            self._put(fact)

    def _put(self, fact: Fact) -> None:
        key = (fact.atom, fact.source, fact.sentence)
        if key not in self._facts:
            self._facts[key] = fact

    def add(self, atom, source: FactSource = "context", sentence: Optional[int] = None, span: str = "") -> None:
        if isinstance(atom, str):
            parsed = parse_atom(atom)
        else:
            parsed = atom
        text = render(parsed)
        self._parsed[text] = parsed
        self._put(Fact(atom=text, source=source, sentence=sentence, span=span))

    def extend(self, other: "FactSet") -> "FactSet":
        for fact in other:
            self._put(fact)
        self._parsed.update(other._parsed)
        self.unmatched.extend(other.unmatched)
        return self

    def mark_unmatched(self, sentence: Optional[int], text: str) -> None:
        self.unmatched.append((sentence, text))

    def __iter__(self) -> Iterator[Fact]:
        return iter(self._facts.values())

    def __len__(self) -> int:
        return len(self._facts)

    def __contains__(self, atom) -> bool:
        text = atom if isinstance(atom, str) else render(atom)
        return any(f.atom == text for f in self)

    def __repr__(self) -> str:
        return f"FactSet({self.atom_set()})"

    def function(self, fact: Fact) -> Function:
        if fact.atom not in self._parsed:
            self._parsed[fact.atom] = parse_atom(fact.atom)
        return self._parsed[fact.atom]

    def atoms(self, source: Optional[FactSource] = None) -> List[Function]:
        return [self.function(f) for f in self if source is None or f.source == source]

    def atom_set(self, source: Optional[FactSource] = None) -> set:
        return {f.atom for f in self if source is None or f.source == source}

    def select(self, source: FactSource) -> "FactSet":
        return FactSet(f for f in self if f.source == source)

    def render(self) -> str:
        """The atoms as a "Semantic Parse:" answer would list them."""
        seen = dict.fromkeys(f.atom for f in self)
        return "\n".join(f"{atom}." for atom in seen)

    def to_records(self) -> List[Fact]:
        return list(self)


def normalize_fact(text: str) -> str:
    """Turn a parser's spelling of an atom into a ground atom of the rule language.

    Bare capitalized constants become lowercase (``Max`` to ``max``) and multi-word bare
    constants are joined with underscores. Quoted strings are kept exactly.
    """
    out = []
    last = 0
    for match in _QUOTED.finditer(text):
        out.append(_normalize_bare(text[last:match.start()]))
        out.append(match.group(0))
        last = match.end()
    out.append(_normalize_bare(text[last:]))
    return "".join(out).strip()


def _normalize_bare(segment: str) -> str:
    segment = _WORD_RUN.sub(lambda m: "_".join(m.group(1).split()), segment)

    def lower(m):
        word = m.group(1)
        return word.lower() if word[0].isupper() else word

    return _BARE.sub(lower, segment)


def _balanced_end(text: str, start: int) -> int:
    """Index just past the parenthesis closing the one opened before ``start``; -1 if none."""
    depth = 1
    i = start
    in_string = False
    while i < len(text):
        ch = text[i]
        if in_string:
            if ch == "\\":
                i += 1
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return i + 1
        i += 1
    return -1


def scan_atoms(text: str) -> Iterator[Tuple[str, Function]]:
    """Maximal ``pred(args)`` substrings of ``text`` that read as ground atoms."""
    pos = 0
    while True:
        match = _FUNCTOR.search(text, pos)
        if match is None:
            return
        if match.start() > 0 and (text[match.start() - 1].isalnum() or text[match.start() - 1] == "_"):
            pos = match.end()
            continue
        end = _balanced_end(text, match.end())
        if end < 0:
            pos = match.end()
            continue
        span = text[match.start():end]
        try:
            parsed = parse_atom(normalize_fact(span))
        except LogicError:
            pos = match.end()
            continue
        yield span, parsed
        pos = end


def parse_response(text: str, source: FactSource = "context", sentence: Optional[int] = None) -> FactSet:
    """Read every atom out of a completion, ignoring the prose around it."""
    facts = FactSet()
    for span, parsed in scan_atoms(text or ""):
        facts.add(parsed, source=source, sentence=sentence, span=span)
    return facts


def label(value) -> str:
    """Surface text of an answer argument."""
    if isinstance(value, String):
        return value.value
    if isinstance(value, Function) and not value.args:
        return value.name
    return render(value)
