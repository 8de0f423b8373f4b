"""Ground programs: atom table, ground rules, count aggregates and weak constraints."""
from __future__ import annotations

from collections import defaultdict
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

from .errors import GroundingLimitError
from .terms import Function, render

# statuses returned by the encodings; atom ids are always positive
TRUE = -2
FALSE = -1

DEFAULT_RULE_CAP = 10_000_000


class GroundRule(NamedTuple):
    """``head :- pos, not neg``. Empty head is a constraint; ``choice`` marks ``{head} :- body``."""

    head: Tuple[int, ...]
    pos: Tuple[int, ...]
    neg: Tuple[int, ...]
    choice: bool = False


class GroundAggregate(NamedTuple):
    """``atom`` holds iff ``lower <= |true elements| <= upper`` (upper None means unbounded)."""

    atom: int
    elements: Tuple[int, ...]
    lower: int
    upper: Optional[int]


class GroundWeak(NamedTuple):
    pos: Tuple[int, ...]
    neg: Tuple[int, ...]
    weight: int
    level: int
    terms: tuple


def is_hidden(atom: Function) -> bool:
    return atom.name.startswith("#")


class GroundProgram:
    """Variable-free program over dense atom ids 1..n. Immutable once built."""

    def __init__(
        self,
        symbols: Sequence[Function],
        rules: Sequence[GroundRule],
        aggregates: Sequence[GroundAggregate],
        weak: Sequence[GroundWeak],
        facts: Iterable[int] = (),
        consistency: Sequence[Tuple[int, int]] = (),
        witness: Optional[Tuple[Function, Function]] = None,
        stats: Optional[Dict[str, float]] = None,
        name: str = "<program>",
    ) -> None:
        self.symbols: Tuple[Optional[Function], ...] = (None,) + tuple(symbols)
        self.table: Dict[Function, int] = {s: i for i, s in enumerate(self.symbols) if i}
        self.rules = tuple(rules)
        self.aggregates = tuple(aggregates)
        self.weak = tuple(weak)
        self.facts = frozenset(facts)
        self.consistency = tuple(consistency)
        self.witness = witness
        self.stats = dict(stats or {})
        self.name = name
        self.hidden = frozenset(i for i, s in enumerate(self.symbols) if i and is_hidden(s))

    def __len__(self) -> int:
        return len(self.symbols) - 1

    @property
    def atoms(self) -> List[Function]:
        return [s for s in self.symbols[1:]]

    def id_of(self, atom: Function) -> Optional[int]:
        return self.table.get(atom)

    def symbol(self, atom_id: int) -> Function:
        return self.symbols[atom_id]

    def visible(self, ids: Iterable[int]) -> FrozenSet[Function]:
        return frozenset(self.symbols[i] for i in ids if i not in self.hidden)

    @property
    def has_weak(self) -> bool:
        return bool(self.weak)

    @property
    def levels(self) -> List[int]:
        return sorted({w.level for w in self.weak}, reverse=True)

    def relevant(self, keep: Iterable[str]) -> "GroundProgram":
        """Drop rules that cannot influence atoms of the ``keep`` predicates.

        Constraints and weak constraints always stay, together with everything they
        read, so answer sets restricted to the remaining atoms are unchanged.
        """
        keep = set(keep)
        depends: Dict[int, Set[int]] = defaultdict(set)
        for rule in self.rules:
            for h in rule.head:
                depends[h].update(rule.pos)
                depends[h].update(rule.neg)
                depends[h].update(rule.head)
        for agg in self.aggregates:
            depends[agg.atom].update(agg.elements)
        stack = [i for i, s in enumerate(self.symbols) if i and s.name.lstrip("-") in keep]
        for rule in self.rules:
            if not rule.head:
                stack.extend(rule.pos)
                stack.extend(rule.neg)
        for w in self.weak:
            stack.extend(w.pos)
            stack.extend(w.neg)
        reached: Set[int] = set()
        while stack:
            atom = stack.pop()
            if atom in reached:
                continue
            reached.add(atom)
            stack.extend(depends.get(atom, ()))
        order = sorted(reached)
        mapping = {old: new for new, old in enumerate(order, start=1)}
        m = lambda ids: tuple(mapping[i] for i in ids)
        rules = [
            GroundRule(m(r.head), m(r.pos), m(r.neg), r.choice)
            for r in self.rules
            if not r.head or any(h in reached for h in r.head)
        ]
        stats = dict(self.stats, atoms=len(order), rules=len(rules))
        return GroundProgram(
            [self.symbols[i] for i in order],
            rules,
            [GroundAggregate(mapping[a.atom], m(a.elements), a.lower, a.upper) for a in self.aggregates if a.atom in reached],
            [GroundWeak(m(w.pos), m(w.neg), w.weight, w.level, w.terms) for w in self.weak],
            facts=(mapping[f] for f in self.facts if f in reached),
            consistency=[(mapping[p], mapping[n]) for p, n in self.consistency if p in reached and n in reached],
            witness=self.witness,
            stats=stats,
            name=self.name,
        )

    def pretty(self) -> str:
        """Render the ground program in the source syntax, hidden atoms included."""
        name = lambda i: render(self.symbols[i])
        lines = []
        for rule in self.rules:
            body = [name(p) for p in rule.pos] + [f"not {name(n)}" for n in rule.neg]
            if rule.choice:
                head = "{" + "; ".join(name(h) for h in rule.head) + "}"
            else:
                head = "; ".join(name(h) for h in rule.head)
            if body:
                lines.append(f"{head} :- {', '.join(body)}." if head else f":- {', '.join(body)}.")
            else:
                lines.append(f"{head}." if head else ":- .")
        for agg in self.aggregates:
            upper = "" if agg.upper is None else f" <= {agg.upper}"
            elements = "; ".join(name(e) for e in agg.elements)
            lines.append(f"% {name(agg.atom)} == {agg.lower} <= #count{{{elements}}}{upper}")
        for weak in self.weak:
            body = [name(p) for p in weak.pos] + [f"not {name(n)}" for n in weak.neg]
            terms = "".join(f", {render(t)}" for t in weak.terms)
            lines.append(f":~ {', '.join(body)}. [{weak.weight}@{weak.level}{terms}]")
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"GroundProgram({self.name!r}, atoms={len(self)}, rules={len(self.rules)})"


Residual = Tuple[Tuple[int, ...], Tuple[int, ...]]


class Builder:
    """Mutable assembly area for a ground program, shared by both instantiators.

    Holds the atom table and the encodings for count aggregates and conditional
    literals. ``finish`` simplifies and renumbers the result.
    """

    def __init__(self, cap: int = DEFAULT_RULE_CAP, name: str = "<program>") -> None:
        self.cap = cap
        self.name = name
        self.symbols: List[Optional[Function]] = [None]
        self.table: Dict[Function, int] = {}
        self.rules: List[GroundRule] = []
        self.aggregates: Dict[int, GroundAggregate] = {}
        self.weak: List[GroundWeak] = []
        self.certain: Set[int] = set()
        self.possible: Set[int] = set()
        self._rule_keys: Set[GroundRule] = set()
        self._hidden = 0

    def intern(self, atom: Function) -> int:
        found = self.table.get(atom)
        if found is None:
            found = len(self.symbols)
            self.symbols.append(atom)
            self.table[atom] = found
        return found

    def hidden(self, kind: str) -> int:
        self._hidden += 1
        atom_id = self.intern(Function(f"#{kind}", (self._hidden,)))
        self.possible.add(atom_id)
        return atom_id

    def add_rule(self, head: Sequence[int], pos: Sequence[int], neg: Sequence[int], choice: bool = False, origin: object = None) -> None:
        rule = GroundRule(tuple(head), tuple(dict.fromkeys(pos)), tuple(dict.fromkeys(neg)), choice)
        if rule in self._rule_keys:
            return
        if len(self.rules) >= self.cap:
            raise GroundingLimitError(repr(origin) if origin is not None else "<ground rule>", self.cap)
        self._rule_keys.add(rule)
        self.rules.append(rule)
        if len(rule.head) == 1 and not choice and not rule.pos and not rule.neg:
            self.certain.add(rule.head[0])

    def add_weak(self, pos: Sequence[int], neg: Sequence[int], weight: int, level: int, terms: tuple) -> None:
        self.weak.append(GroundWeak(tuple(dict.fromkeys(pos)), tuple(dict.fromkeys(neg)), weight, level, terms))

    # -- encodings -----------------------------------------------------------------------

    def encode_count(self, keys: Dict[object, List[Residual]], lower: Optional[int], upper: Optional[int]):
        """Encode ``lower <= #count{keys} <= upper``; returns TRUE, FALSE or a hidden atom id.

        Each key maps to the residual conditions under which it is counted; an empty
        residual means the key is certainly counted.
        """
        certain = 0
        uncertain: List[List[Residual]] = []
        for alternatives in keys.values():
            if not alternatives:
                continue
            if any(not pos and not neg for pos, neg in alternatives):
                certain += 1
            else:
                uncertain.append(alternatives)
        lo = None if lower is None else lower - certain
        hi = None if upper is None else upper - certain
        n = len(uncertain)
        if (lo is None or lo <= 0) and (hi is None or n <= hi):
            return TRUE
        if (hi is not None and hi < 0) or (lo is not None and n < lo):
            return FALSE
        elements = []
        for alternatives in uncertain:
            if len(alternatives) == 1 and len(alternatives[0][0]) == 1 and not alternatives[0][1]:
                elements.append(alternatives[0][0][0])
                continue
            tup = self.hidden("tup")
            for pos, neg in alternatives:
                self.add_rule((tup,), pos, neg)
            elements.append(tup)
        atom = self.hidden("agg")
        self.aggregates[atom] = GroundAggregate(atom, tuple(elements), max(lo or 0, 0), hi)
        return atom

    def encode_conditional(self, instances: Sequence[Tuple[Residual, object]]):
        """Encode ``head : condition`` over its instances.

        ``instances`` pairs a condition residual with the head status: TRUE, FALSE,
        ``("pos", id)`` or ``("neg", id)``. Returns the extra (pos, neg) body literals
        or FALSE when the conditional can never hold.
        """
        pos: List[int] = []
        neg: List[int] = []
        for (cond_pos, cond_neg), head in instances:
            if head == TRUE:
                continue
            if not cond_pos and not cond_neg:
                if head == FALSE:
                    return FALSE
                kind, atom = head
                (pos if kind == "pos" else neg).append(atom)
                continue
            violated = self.hidden("cond")
            if head == FALSE:
                self.add_rule((violated,), cond_pos, cond_neg)
            else:
                kind, atom = head
                if kind == "pos":
                    self.add_rule((violated,), cond_pos, tuple(cond_neg) + (atom,))
                else:
                    self.add_rule((violated,), tuple(cond_pos) + (atom,), cond_neg)
            neg.append(violated)
        return tuple(pos), tuple(neg)

    def add_consistency(self) -> List[Tuple[int, int]]:
        """Constraints ``:- p, -p`` for every complementary pair in the table."""
        pairs = []
        for atom, atom_id in list(self.table.items()):
            if atom.name.startswith("-") and not is_hidden(atom):
                positive = self.table.get(atom.positive)
                if positive is not None:
                    pairs.append((positive, atom_id))
                    self.add_rule((), (positive, atom_id), ())
        return pairs

    # -- finishing -----------------------------------------------------------------------

    def finish(self, simplify: bool = True, stats: Optional[dict] = None) -> GroundProgram:
        pairs = self.add_consistency()
        rules = self.rules
        aggregates = list(self.aggregates.values())
        weak = self.weak
        certain: Set[int] = set()
        if simplify:
            certain, possible = well_founded(len(self.symbols), rules, aggregates)
            rules, aggregates, weak = reduce(rules, aggregates, weak, certain, possible)
        witness = None
        for p, n in pairs:
            if p in certain and n in certain:
                witness = (self.symbols[p], self.symbols[n])
                break
        return renumber(self.symbols, rules, aggregates, weak, certain, pairs, witness, stats or {}, self.name)


def well_founded(size: int, rules: Sequence[GroundRule], aggregates: Sequence[GroundAggregate]):
    """Alternate certain/possible fixpoints until the certain set stops growing.

    Certain atoms are true in every answer set; atoms outside the possible set are
    false in every answer set.
    """
    aggs = {a.atom: a for a in aggregates}
    pos_watch: Dict[int, List[int]] = defaultdict(list)
    for index, rule in enumerate(rules):
        for p in rule.pos:
            pos_watch[p].append(index)
    agg_watch: Dict[int, List[int]] = defaultdict(list)
    for agg in aggregates:
        for e in agg.elements:
            agg_watch[e].append(agg.atom)

    def fixpoint(blocked, normal_only: bool, other: Set[int]) -> Set[int]:
        derived: Set[int] = set()
        missing = [len(r.pos) for r in rules]
        agg_count: Dict[int, int] = defaultdict(int)
        queue: List[int] = []

        def derive(atom: int) -> None:
            if atom not in derived:
                derived.add(atom)
                queue.append(atom)

        def fire(index: int) -> None:
            rule = rules[index]
            if not rule.head or blocked(rule):
                return
            if normal_only:
                if len(rule.head) == 1 and not rule.choice:
                    derive(rule.head[0])
            else:
                for h in rule.head:
                    derive(h)

        def check_agg(atom: int) -> None:
            agg = aggs[atom]
            if agg_count[atom] < agg.lower:
                return
            if normal_only:
                # upper bound must hold however the undecided elements turn out
                if agg.upper is not None and sum(1 for e in agg.elements if e in other) > agg.upper:
                    return
            elif agg.upper is not None:
                if sum(1 for e in agg.elements if e in other) > agg.upper:
                    return
            derive(atom)

        for index, rule in enumerate(rules):
            if missing[index] == 0:
                fire(index)
        for atom in aggs:
            check_agg(atom)
        while queue:
            atom = queue.pop()
            for index in pos_watch.get(atom, ()):
                missing[index] -= 1
                if missing[index] == 0:
                    fire(index)
            for agg_atom in agg_watch.get(atom, ()):
                agg_count[agg_atom] += 1
                check_agg(agg_atom)
        return derived

    certain: Set[int] = set()
    while True:
        # possible: ignore negation except on certain atoms; aggregates need enough possible
        # elements and no more certain ones than the upper bound
        possible = fixpoint(lambda r: any(n in certain for n in r.neg), False, certain)
        grown = fixpoint(lambda r: any(n in possible for n in r.neg), True, possible)
        if grown <= certain:
            return certain, possible
        certain = grown | certain


def reduce(rules, aggregates, weak, certain: Set[int], possible: Set[int]):
    out_rules: List[GroundRule] = []
    seen: Set[GroundRule] = set()

    def body(pos, neg):
        if any(p not in possible for p in pos) or any(n in certain for n in neg):
            return None
        return (
            tuple(p for p in pos if p not in certain),
            tuple(n for n in neg if n in possible),
        )

    for rule in rules:
        simplified = body(rule.pos, rule.neg)
        if simplified is None:
            continue
        pos, neg = simplified
        head = tuple(h for h in rule.head if h in possible)
        if rule.choice:
            head = tuple(h for h in head if h not in certain)
            if not head:
                continue
        elif rule.head:
            if any(h in certain for h in head):
                continue
            if not head:
                head = ()
        new = GroundRule(head, pos, neg, rule.choice)
        if new not in seen:
            seen.add(new)
            out_rules.append(new)
    out_aggs = []
    for agg in aggregates:
        if agg.atom in certain or agg.atom not in possible:
            continue
        counted = sum(1 for e in agg.elements if e in certain)
        elements = tuple(e for e in agg.elements if e in possible and e not in certain)
        upper = None if agg.upper is None else agg.upper - counted
        out_aggs.append(GroundAggregate(agg.atom, elements, max(agg.lower - counted, 0), upper))
    out_weak = []
    for w in weak:
        simplified = body(w.pos, w.neg)
        if simplified is not None:
            out_weak.append(GroundWeak(simplified[0], simplified[1], w.weight, w.level, w.terms))
    return out_rules, out_aggs, out_weak


def renumber(symbols, rules, aggregates, weak, certain, pairs, witness, stats, name) -> GroundProgram:
    used: Set[int] = set(certain)
    for rule in rules:
        used.update(rule.head)
        used.update(rule.pos)
        used.update(rule.neg)
    for agg in aggregates:
        used.add(agg.atom)
        used.update(agg.elements)
    for w in weak:
        used.update(w.pos)
        used.update(w.neg)
    order = sorted(used)
    mapping = {old: new for new, old in enumerate(order, start=1)}
    m = lambda ids: tuple(mapping[i] for i in ids)
    new_rules = [GroundRule((mapping[c],), (), (), False) for c in sorted(certain)]
    new_rules += [GroundRule(m(r.head), m(r.pos), m(r.neg), r.choice) for r in rules]
    new_aggs = [GroundAggregate(mapping[a.atom], m(a.elements), a.lower, a.upper) for a in aggregates]
    new_weak = [GroundWeak(m(w.pos), m(w.neg), w.weight, w.level, w.terms) for w in weak]
    new_pairs = [(mapping[p], mapping[n]) for p, n in pairs if p in mapping and n in mapping]
    stats = dict(stats)
    stats.update(atoms=len(order), rules=len(new_rules), aggregates=len(new_aggs), weak=len(new_weak))
    return GroundProgram(
        [symbols[i] for i in order],
        new_rules,
        new_aggs,
        new_weak,
        facts=(mapping[c] for c in certain),
        consistency=new_pairs,
        witness=witness,
        stats=stats,
        name=name,
    )
