"""Reference evaluators: full Herbrand instantiation and a stratified least-model oracle."""
from __future__ import annotations

import itertools as it
from collections import defaultdict
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Set

from .analysis import global_variables
from .errors import GroundingError, GroundingLimitError, UnsupportedConstructError
from .ground import DEFAULT_RULE_CAP, FALSE, TRUE, Builder, GroundProgram
from .grounder import components, resolve_constants
from .terms import (
    Aggregate,
    Atom,
    BinOp,
    Binding,
    Choice,
    Comparison,
    Conditional,
    Const,
    Disjunction,
    Fn,
    Function,
    Interval,
    Literal,
    Program,
    Rule,
    Term,
    Undefined,
    UnaryOp,
    Var,
    WeakConstraint,
)

MAX_UNIVERSE = 200


def _constants(term: Term, out: Set) -> None:
    if isinstance(term, Const):
        value = term.value
        out.add(value)
        if isinstance(value, Function):
            for arg in value.args:
                _constants(Const(arg), out)
    elif isinstance(term, Fn):
        for arg in term.args:
            _constants(arg, out)
    elif isinstance(term, Interval):
        try:
            out.update(term.expand({}))
        except (Undefined, KeyError):
            pass
        _constants(term.lo, out)
        _constants(term.hi, out)
    elif isinstance(term, BinOp):
        _constants(term.left, out)
        _constants(term.right, out)
    elif isinstance(term, UnaryOp):
        _constants(term.arg, out)


def _statement_terms(statement) -> Iterator[Term]:
    def literal_terms(lit):
        if isinstance(lit, Literal):
            yield from lit.atom.args
        elif isinstance(lit, Comparison):
            yield lit.left
            yield lit.right

    for atom in statement.head_atoms():
        yield from atom.args
    head = statement.head
    if isinstance(head, Choice):
        for element in head.elements:
            for c in element.condition:
                yield from literal_terms(c)
        for _, t in head.guards:
            yield t
    for item in statement.body:
        if isinstance(item, Conditional):
            yield from literal_terms(item.head)
            for c in item.condition:
                yield from literal_terms(c)
        elif isinstance(item, Aggregate):
            for _, t in item.guards:
                yield t
            for element in item.elements:
                yield from element.terms
                for c in element.condition:
                    yield from literal_terms(c)
        else:
            yield from literal_terms(item)


class NaiveGrounder:
    """Instantiate every variable over the universe of values named in the program.

    All atoms are left undecided so the solver does every bit of the work.
    """

    def __init__(self, program: Program, cap: int) -> None:
        self.program = program
        self.builder = Builder(cap, program.name)
        universe: Set = set()
        for statement in program.statements:
            for term in _statement_terms(statement):
                _constants(term, universe)
        self.universe = sorted(universe, key=lambda v: (type(v).__name__, repr(v)))

    def assignments(self, names: List[str], b: Binding) -> Iterator[Binding]:
        names = [n for n in names if n not in b]
        for values in it.product(self.universe, repeat=len(names)):
            extended = dict(b)
            extended.update(zip(names, values))
            yield extended

    def literal_status(self, literal, b: Binding):
        """TRUE/FALSE for comparisons, ("pos"|"neg", id) for atoms."""
        if isinstance(literal, Comparison):
            return TRUE if literal.holds(b) else FALSE
        atom = literal.atom.ground(b)
        return ("neg" if literal.negated else "pos", self.builder.intern(atom))

    def condition(self, condition, b: Binding) -> Iterator[tuple]:
        local = sorted(set().union(*(c.variables() for c in condition)) - b.keys()) if condition else []
        for extended in self.assignments(local, b):
            pos, neg = [], []
            ok = True
            for c in condition:
                try:
                    s = self.literal_status(c, extended)
                except Undefined:
                    ok = False
                    break
                if s == FALSE:
                    ok = False
                    break
                if s != TRUE:
                    (pos if s[0] == "pos" else neg).append(s[1])
            if ok:
                yield extended, (tuple(pos), tuple(neg))

    def bounds(self, guards, b: Binding):
        lower = upper = None
        for op, term in guards:
            value = term.evaluate(b)
            if not isinstance(value, int):
                raise Undefined(value)
            if op in (">=", "="):
                lower = value if lower is None else max(lower, value)
            if op == ">":
                lower = value + 1 if lower is None else max(lower, value + 1)
            if op in ("<=", "="):
                upper = value if upper is None else min(upper, value)
            if op == "<":
                upper = value - 1 if upper is None else min(upper, value - 1)
        return lower, upper

    def count(self, aggregate: Aggregate, b: Binding):
        keys: Dict[object, list] = defaultdict(list)
        for element in aggregate.elements:
            for extended, residual in self.condition(element.condition, b):
                try:
                    if element.literal is not None:
                        key = ("#literal", repr(element.literal.substitute({k: Const(v) for k, v in extended.items()})))
                    else:
                        key = tuple(t.evaluate(extended) for t in element.terms)
                except Undefined:
                    continue
                keys[key].append(residual)
        lower, upper = self.bounds(aggregate.guards, b)
        return self.builder.encode_count(keys, lower, upper)

    def body(self, statement, b: Binding):
        pos: List[int] = []
        neg: List[int] = []
        for item in statement.body:
            if isinstance(item, (Literal, Comparison)):
                s = self.literal_status(item, b)
                if s == FALSE:
                    return None
                if s != TRUE:
                    (pos if s[0] == "pos" else neg).append(s[1])
            elif isinstance(item, Aggregate):
                encoded = self.count(item, b)
                if item.negated:
                    encoded = FALSE if encoded == TRUE else TRUE if encoded == FALSE else ("neg", encoded)
                if encoded == FALSE:
                    return None
                if encoded != TRUE:
                    if isinstance(encoded, tuple):
                        neg.append(encoded[1])
                    else:
                        pos.append(encoded)
            elif isinstance(item, Conditional):
                instances = []
                for extended, residual in self.condition(item.condition, b):
                    try:
                        instances.append((residual, self.literal_status(item.head, extended)))
                    except Undefined:
                        continue
                encoded = self.builder.encode_conditional(instances)
                if encoded == FALSE:
                    return None
                pos.extend(encoded[0])
                neg.extend(encoded[1])
        return tuple(pos), tuple(neg)

    def statement(self, statement) -> None:
        names = sorted(global_variables(statement))
        for b in self.assignments(names, {}):
            try:
                body = self.body(statement, b)
                if body is None:
                    continue
                self.emit(statement, b, *body)
            except Undefined:
                continue

    def emit(self, statement, b: Binding, pos, neg) -> None:
        builder = self.builder
        if isinstance(statement, WeakConstraint):
            weight = statement.weight.evaluate(b)
            level = statement.level.evaluate(b)
            if isinstance(weight, int) and isinstance(level, int):
                builder.add_weak(pos, neg, weight, level, tuple(t.evaluate(b) for t in statement.terms))
            return
        head = statement.head
        if head is None:
            builder.add_rule((), pos, neg, origin=statement)
        elif isinstance(head, Atom):
            for atom in head.expand(b):
                builder.add_rule((builder.intern(atom),), pos, neg, origin=statement)
        elif isinstance(head, Disjunction):
            for combo in it.product(*(a.expand(b) for a in head.atoms)):
                builder.add_rule(tuple(builder.intern(a) for a in combo), pos, neg, origin=statement)
        else:
            keys: Dict[object, list] = defaultdict(list)
            for element in head.elements:
                for extended, (cond_pos, cond_neg) in self.condition(element.condition, b):
                    for atom in element.atom.expand(extended):
                        atom_id = builder.intern(atom)
                        builder.add_rule((atom_id,), pos + cond_pos, neg + cond_neg, choice=True, origin=statement)
                        keys[atom].append(((atom_id,) + cond_pos, cond_neg))
            if head.guards:
                lower, upper = self.bounds(head.guards, b)
                encoded = builder.encode_count(keys, lower, upper)
                if encoded == FALSE:
                    builder.add_rule((), pos, neg, origin=statement)
                elif encoded != TRUE:
                    builder.add_rule((), pos, neg + (encoded,), origin=statement)

    def run(self) -> GroundProgram:
        for statement in self.program.statements:
            self.statement(statement)
        return self.builder.finish(simplify=False, stats={"universe": len(self.universe)})


def ground_naive(
    program: Program,
    bindings: Optional[Mapping[str, object]] = None,
    cap: int = DEFAULT_RULE_CAP,
) -> GroundProgram:
    """Instantiate over the full cross product of program values, without simplification.

    Only meant for small programs whose derivable values already appear in the text.
    """
    grounder = NaiveGrounder(resolve_constants(program, bindings), cap)
    if len(grounder.universe) > MAX_UNIVERSE:
        raise GroundingLimitError(f"universe of {len(grounder.universe)} values", MAX_UNIVERSE)
    return grounder.run()


def least_model(program: Program, bindings: Optional[Mapping[str, object]] = None) -> FrozenSet[Function]:
    """Iterated least fixpoint of a stratified normal program, computed naively.

    Raises UnsupportedConstructError for choices, disjunctions, counts, conditionals
    and weak constraints, and GroundingError when negation is not stratified.
    """
    program = resolve_constants(program, bindings)
    for statement in program.statements:
        if isinstance(statement, WeakConstraint) or isinstance(statement.head, (Choice, Disjunction)):
            raise UnsupportedConstructError("non-normal rule in least_model")
        if any(isinstance(item, (Aggregate, Conditional)) for item in statement.body):
            raise UnsupportedConstructError("aggregate or conditional in least_model")
    strata = components(program)
    stratum_of = {sig: i for i, comp in enumerate(strata) for sig in comp}
    for statement in program.statements:
        if statement.head is None:
            continue
        level = stratum_of[statement.head.signature]
        for item in statement.body:
            if isinstance(item, Literal) and item.negated and stratum_of.get(item.atom.signature, -1) == level:
                raise GroundingError(f"negation through recursion on {item.atom.name}")
    model: Dict[tuple, Set[Function]] = defaultdict(set)
    by_stratum: Dict[int, List[Rule]] = defaultdict(list)
    constraints = []
    for statement in program.statements:
        if statement.head is None:
            constraints.append(statement)
        else:
            by_stratum[stratum_of[statement.head.signature]].append(statement)
    for level in range(len(strata)):
        rules = by_stratum.get(level, [])
        changed = True
        while changed:
            changed = False
            for rule in rules:
                for b in _bindings(list(rule.body), {}, model):
                    try:
                        atoms = rule.head.expand(b)
                    except Undefined:
                        continue
                    for atom in atoms:
                        if atom not in model[atom.signature]:
                            model[atom.signature].add(atom)
                            changed = True
    for constraint in constraints:
        for _ in _bindings(list(constraint.body), {}, model):
            raise GroundingError("least model violates a constraint")
    return frozenset(a for atoms in model.values() for a in atoms if not a.name.startswith("#"))


def _bindings(items: list, b: Binding, model) -> Iterator[Binding]:
    if not items:
        yield b
        return
    for i, item in enumerate(items):
        if isinstance(item, Literal) and item.negated or isinstance(item, Comparison):
            if not item.variables() <= b.keys():
                continue
            rest = items[:i] + items[i + 1 :]
            if isinstance(item, Comparison):
                if item.holds(b):
                    yield from _bindings(rest, b, model)
                return
            try:
                atom = item.atom.ground(b)
            except Undefined:
                return
            if atom not in model[atom.signature]:
                yield from _bindings(rest, b, model)
            return
    for i, item in enumerate(items):
        if isinstance(item, Comparison) and item.op == "=":
            for source, target in ((item.right, item.left), (item.left, item.right)):
                if source.variables() <= b.keys() and isinstance(target, Var):
                    rest = items[:i] + items[i + 1 :]
                    try:
                        values = source.expand(b)
                    except Undefined:
                        return
                    for value in values:
                        extended = target.match(value, b)
                        if extended is not None:
                            yield from _bindings(rest, extended, model)
                    return
    for i, item in enumerate(items):
        if isinstance(item, Literal) and not item.negated:
            rest = items[:i] + items[i + 1 :]
            for value in list(model[item.atom.signature]):
                extended = item.atom.match(value, b)
                if extended is not None:
                    yield from _bindings(rest, extended, model)
            return
    raise GroundingError("cannot bind the remaining body of a rule")