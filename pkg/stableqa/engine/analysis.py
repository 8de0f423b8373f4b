"""Variable binding analysis shared by the safety check and the join planner."""
from __future__ import annotations

from typing import Callable, FrozenSet, Iterator, List, NamedTuple, Optional, Sequence

from .terms import (
    Aggregate,
    Atom,
    Binding,
    Choice,
    Comparison,
    Conditional,
    Const,
    Disjunction,
    Fn,
    Interval,
    Literal,
    Rule,
    Term,
    Undefined,
    Var,
    WeakConstraint,
    invert,
    invertible,
)

POSITIVE = "positive"
NEGATIVE = "negative"
FILTER = "filter"
ASSIGN = "assign"
COUNT = "count"
DEFERRED = "deferred"


class Unbound(Exception):
    """No element of a body can bind the remaining variables."""

    def __init__(self, variable: str) -> None:
        self.variable = variable
        super().__init__(variable)


class Step(NamedTuple):
    kind: str
    index: int
    element: object
    binds: FrozenSet[str]
    # for assignments: the evaluated side and the side matched against it
    source: Optional[Term] = None
    target: Optional[Term] = None


def can_match(term: Term, bound: FrozenSet[str]) -> Optional[FrozenSet[str]]:
    """Variables bound after matching ``term`` against a ground value, or None if impossible."""
    if isinstance(term, Var):
        return bound | {term.name}
    if isinstance(term, Const):
        return bound
    if isinstance(term, Fn):
        for i in term._order:
            bound = can_match(term.args[i], bound)
            if bound is None:
                return None
        return bound
    free = term.variables() - bound
    if not free:
        return bound
    if isinstance(term, Interval):
        return None
    name = invertible(term, bound)
    return bound | {name} if name is not None else None


def atom_binds(atom: Atom, bound: FrozenSet[str]) -> Optional[FrozenSet[str]]:
    for i in atom._order:
        bound = can_match(atom.args[i], bound)
        if bound is None:
            return None
    return bound


def solutions(term: Term, value, b: Binding) -> List[Binding]:
    """Every extension of ``b`` under which ``term`` evaluates to ``value``."""
    if term.is_arithmetic and term.variables() - b.keys():
        return invert(term, value, b)
    m = term.match(value, b)
    return [m] if m is not None else []


def run_assignment(step: Step, b: Binding) -> Iterator[Binding]:
    try:
        values = step.source.expand(b)
    except Undefined:
        return
    for value in values:
        yield from solutions(step.target, value, b)


def _assignment(cmp: Comparison, bound: FrozenSet[str]):
    if cmp.op != "=":
        return None
    for source, target in ((cmp.right, cmp.left), (cmp.left, cmp.right)):
        if source.variables() <= bound and not target.variables() <= bound:
            after = can_match(target, bound)
            if after is not None:
                return source, target, after
    return None


class Element(NamedTuple):
    index: int
    item: object
    kind: str
    needs: FrozenSet[str]


def classify(body: Sequence, global_vars: FrozenSet[str]) -> List[Element]:
    out = []
    for i, item in enumerate(body):
        if isinstance(item, Literal):
            kind = NEGATIVE if item.negated else POSITIVE
            out.append(Element(i, item, kind, item.variables()))
        elif isinstance(item, Comparison):
            out.append(Element(i, item, FILTER, item.variables()))
        elif isinstance(item, Aggregate):
            target = item.assignment()
            inner = frozenset()
            for e in item.elements:
                inner |= e.variables()
            needs = (inner & global_vars) | item.guard_variables()
            if target is not None:
                out.append(Element(i, item, COUNT, needs - {target}))
            else:
                out.append(Element(i, item, DEFERRED, needs))
        elif isinstance(item, Conditional):
            out.append(Element(i, item, DEFERRED, item.variables() & global_vars))
        else:
            raise TypeError(f"unexpected body element {item!r}")
    return out


Cost = Callable[[Atom, FrozenSet[str]], float]


def _default_cost(atom: Atom, bound: FrozenSet[str]) -> float:
    free = sum(1 for a in atom.args if a.variables() - bound)
    return 0.1 ** (len(atom.args) - free)


def plan(
    elements: Sequence[Element],
    bound: FrozenSet[str] = frozenset(),
    cost: Optional[Cost] = None,
    first: Optional[int] = None,
) -> List[Step]:
    """Order body elements so each variable is bound before an element needs it.

    Ready filters are placed as early as possible, then assignments, then count
    assignments, then the cheapest positive literal. ``first`` forces one positive
    literal to the front (the delta literal of a semi-naive round).
    """
    cost = cost or _default_cost
    pending = list(elements)
    steps: List[Step] = []
    bound = frozenset(bound)
    if first is not None:
        element = next(e for e in pending if e.index == first)
        after = atom_binds(element.item.atom, bound)
        if after is None:
            raise Unbound(sorted(element.item.variables() - bound)[0])
        steps.append(Step(POSITIVE, element.index, element.item, after - bound))
        bound = after
        pending.remove(element)
    while pending:
        progressed = True
        while progressed:
            progressed = False
            for element in list(pending):
                if element.kind in (FILTER, NEGATIVE, DEFERRED) and element.needs <= bound:
                    kind = element.kind
                    steps.append(Step(kind, element.index, element.item, frozenset()))
                    pending.remove(element)
                    progressed = True
        if not pending:
            break
        step = _pick_binder(pending, bound, cost)
        if step is None:
            missing = set()
            for element in pending:
                missing |= element.needs - bound
            raise Unbound(sorted(missing)[0])
        steps.append(step)
        bound = bound | step.binds
        pending = [e for e in pending if e.index != step.index]
    return steps


def _pick_binder(pending: Sequence[Element], bound: FrozenSet[str], cost: Cost) -> Optional[Step]:
    for element in pending:
        if element.kind == FILTER:
            found = _assignment(element.item, bound)
            if found is not None:
                source, target, after = found
                return Step(ASSIGN, element.index, element.item, after - bound, source, target)
    for element in pending:
        if element.kind == COUNT and element.needs <= bound:
            return Step(COUNT, element.index, element.item, frozenset((element.item.assignment(),)))
    best = None
    for element in pending:
        if element.kind != POSITIVE:
            continue
        after = atom_binds(element.item.atom, bound)
        if after is None:
            continue
        score = cost(element.item.atom, bound)
        if best is None or score < best[0]:
            best = (score, element, after)
    if best is None:
        return None
    _, element, after = best
    return Step(POSITIVE, element.index, element.item, after - bound)


def bound_after(steps: Sequence[Step], bound: FrozenSet[str] = frozenset()) -> FrozenSet[str]:
    for step in steps:
        bound = bound | step.binds
    return bound


# -- rules ------------------------------------------------------------------------------


def global_variables(statement) -> FrozenSet[str]:
    """Variables occurring outside conditional literals and aggregate elements."""
    out = frozenset()
    if isinstance(statement, WeakConstraint):
        out |= statement.weight.variables() | statement.level.variables()
        for t in statement.terms:
            out |= t.variables()
    else:
        head = statement.head
        if isinstance(head, Atom):
            out |= head.variables()
        elif isinstance(head, Disjunction):
            for a in head.atoms:
                out |= a.variables()
        elif isinstance(head, Choice):
            for _, t in head.guards:
                out |= t.variables()
    for item in statement.body:
        if isinstance(item, (Literal, Comparison)):
            out |= item.variables()
        elif isinstance(item, Aggregate):
            out |= item.guard_variables()
    return out


class RuleInfo:
    """Static facts about one statement: its global variables and classified body."""

    __slots__ = ("statement", "global_vars", "elements")

    def __init__(self, statement) -> None:
        self.statement = statement
        self.global_vars = global_variables(statement)
        self.elements = classify(statement.body, self.global_vars)

    def positives(self) -> List[Element]:
        return [e for e in self.elements if e.kind == POSITIVE]


def condition_elements(condition: Sequence) -> List[Element]:
    return classify(condition, frozenset())


def check_safety(statement) -> Optional[str]:
    """Return the first unsafe variable of ``statement`` or None when it is safe."""
    info = RuleInfo(statement)
    try:
        steps = plan(info.elements)
    except Unbound as err:
        return err.variable
    bound = bound_after(steps)
    required = frozenset()
    if isinstance(statement, WeakConstraint):
        required = info.global_vars
    else:
        head = statement.head
        if isinstance(head, (Atom, Disjunction)):
            required = info.global_vars
        elif isinstance(head, Choice):
            for _, t in head.guards:
                required |= t.variables()
            for element in head.elements:
                missing = _local_safety(element.condition, element.atom.variables(), bound)
                if missing:
                    return missing
    missing = sorted(required - bound)
    if missing:
        return missing[0]
    for item in statement.body:
        if isinstance(item, Conditional):
            missing = _local_safety(item.condition, item.head.variables(), bound)
        elif isinstance(item, Aggregate):
            missing = None
            for element in item.elements:
                produced = frozenset()
                for t in element.terms:
                    produced |= t.variables()
                missing = _local_safety(element.condition, produced, bound)
                if missing:
                    break
        else:
            continue
        if missing:
            return missing
    return None


def _local_safety(condition: Sequence, produced: FrozenSet[str], bound: FrozenSet[str]) -> Optional[str]:
    try:
        steps = plan(condition_elements(condition), bound)
    except Unbound as err:
        return err.variable
    missing = sorted(produced - bound_after(steps, bound))
    return missing[0] if missing else None
