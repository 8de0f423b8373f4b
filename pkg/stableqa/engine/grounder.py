"""Bottom-up instantiation restricted to derivable atoms."""
from __future__ import annotations

import time
from collections import defaultdict
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from .analysis import (
    ASSIGN,
    COUNT,
    DEFERRED,
    FILTER,
    NEGATIVE,
    POSITIVE,
    RuleInfo,
    Step,
    condition_elements,
    plan,
    run_assignment,
)
from .errors import ConstantRedefinitionError, UnsupportedConstructError
from .ground import DEFAULT_RULE_CAP, FALSE, TRUE, Builder, GroundProgram
from .terms import (
    Aggregate,
    Atom,
    Binding,
    Choice,
    Comparison,
    Conditional,
    Const,
    Disjunction,
    Function,
    Literal,
    Program,
    Rule,
    String,
    Undefined,
    Value,
    WeakConstraint,
)

Signature = Tuple[str, int]


def resolve_constants(program: Program, bindings: Optional[Mapping[str, object]] = None) -> Program:
    """Substitute #const definitions, letting caller bindings override them."""
    overrides = {name: to_value(value) for name, value in (bindings or {}).items()}
    values: Dict[str, Value] = {}
    for name, value in program.consts:
        if name in values and values[name] != value and name not in overrides:
            raise ConstantRedefinitionError(name, values[name], value)
        values[name] = value
    values.update(overrides)
    if not values:
        return program
    mapping = {name: Const(value) for name, value in values.items()}
    return Program([s.substitute(mapping) for s in program.statements], (), program.name, program.source_count)


def to_value(value) -> Value:
    if isinstance(value, (int, Function, String)):
        return value
    text = str(value)
    if text.lstrip("-").isdigit():
        return int(text)
    if text[:1].islower() and text.replace("_", "").isalnum():
        return Function(text)
    return String(text)


def body_signatures(statement) -> List[Tuple[Signature, bool]]:
    """Predicates a statement reads, with a flag for top-level positive occurrences."""
    out = []

    def literal(lit, top: bool):
        if isinstance(lit, Literal):
            out.append((lit.atom.signature, top and not lit.negated))

    for item in statement.body:
        if isinstance(item, Literal):
            literal(item, True)
        elif isinstance(item, Conditional):
            literal(item.head, False)
            for c in item.condition:
                literal(c, False)
        elif isinstance(item, Aggregate):
            for e in item.elements:
                for c in e.condition:
                    literal(c, False)
    head = getattr(statement, "head", None)
    if isinstance(head, Choice):
        for e in head.elements:
            for c in e.condition:
                literal(c, False)
    return out


def components(program: Program) -> List[List[Signature]]:
    """Predicate strongly connected components in dependency order."""
    graph: Dict[Signature, Set[Signature]] = defaultdict(set)
    nodes: Dict[Signature, None] = {}
    for statement in program.statements:
        heads = [a.signature for a in statement.head_atoms()]
        for h in heads:
            nodes.setdefault(h)
        for sig, _ in body_signatures(statement):
            nodes.setdefault(sig)
            for h in heads:
                graph[sig].add(h)
        for h in heads:
            for other in heads:
                if other != h:
                    graph[h].add(other)
    return _tarjan(list(nodes), graph)


def _tarjan(nodes: List[Signature], graph: Mapping[Signature, Set[Signature]]) -> List[List[Signature]]:
    index: Dict[Signature, int] = {}
    low: Dict[Signature, int] = {}
    on_stack: Set[Signature] = set()
    stack: List[Signature] = []
    result: List[List[Signature]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(graph.get(root, ()))))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, children = work[-1]
            advanced = False
            for child in children:
                if child not in index:
                    index[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(sorted(graph.get(child, ())))))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                result.append(component)
    result.reverse()
    return result


class Relation:
    """Possible atoms of one predicate with lazily built indexes on bound positions."""

    __slots__ = ("atoms", "members", "indexes", "delta_start", "delta_end")

    def __init__(self) -> None:
        self.atoms: List[Function] = []
        self.members: Set[Function] = set()
        self.indexes: Dict[Tuple[int, ...], Dict[tuple, List[Function]]] = {}
        self.delta_start = 0
        self.delta_end = 0

    def __len__(self) -> int:
        return len(self.atoms)

    def add(self, atom: Function) -> bool:
        if atom in self.members:
            return False
        self.members.add(atom)
        self.atoms.append(atom)
        for positions, index in self.indexes.items():
            index.setdefault(tuple(atom.args[i] for i in positions), []).append(atom)
        return True

    def lookup(self, positions: Tuple[int, ...], key: tuple) -> Sequence[Function]:
        if not positions:
            return self.atoms
        index = self.indexes.get(positions)
        if index is None:
            index = {}
            for atom in self.atoms:
                index.setdefault(tuple(atom.args[i] for i in positions), []).append(atom)
            self.indexes[positions] = index
        return index.get(key, ())

    def delta(self) -> List[Function]:
        return self.atoms[self.delta_start : self.delta_end]


class _Instance:
    __slots__ = ("info", "binding", "heads", "pos", "neg", "deferred")

    def __init__(self, info, binding, heads, pos, neg, deferred) -> None:
        self.info = info
        self.binding = binding
        self.heads = heads
        self.pos = pos
        self.neg = neg
        self.deferred = deferred


class Grounder:
    """Semi-naive instantiation, one predicate component at a time."""

    def __init__(self, program: Program, cap: int = DEFAULT_RULE_CAP) -> None:
        self.program = program
        self.builder = Builder(cap, program.name)
        self.relations: Dict[Signature, Relation] = defaultdict(Relation)
        self.component_of: Dict[Signature, int] = {}
        self.current = -1
        self.pending: List[Tuple[Signature, Function]] = []
        # choice rules whose head conditions read their own component, and their instances
        self.reopen: Set[int] = set()
        self.open_instances: List[_Instance] = []
        self.stats = defaultdict(int)

    # -- atom status ---------------------------------------------------------------------

    def done(self, sig: Signature) -> bool:
        return self.component_of.get(sig, -1) < self.current

    def status(self, atom: Function):
        """TRUE if certain, FALSE if impossible (predicate complete), otherwise the atom id."""
        relation = self.relations.get(atom.signature)
        known = relation is not None and atom in relation.members
        if known:
            atom_id = self.builder.intern(atom)
            return TRUE if atom_id in self.builder.certain else atom_id
        if self.done(atom.signature):
            return FALSE
        return self.builder.intern(atom)

    def residual(self, positives: Sequence[Function], negatives: Sequence[Function]):
        pos, neg = [], []
        for atom in positives:
            s = self.status(atom)
            if s == FALSE:
                return None
            if s != TRUE:
                pos.append(s)
        for atom in negatives:
            s = self.status(atom)
            if s == TRUE:
                return None
            if s != FALSE:
                neg.append(s)
        return tuple(pos), tuple(neg)

    def add_possible(self, atom: Function) -> int:
        atom_id = self.builder.intern(atom)
        relation = self.relations[atom.signature]
        if atom not in relation.members:
            self.pending.append((atom.signature, atom))
        return atom_id

    def commit(self) -> bool:
        """Make the atoms derived in the last round visible; returns True if any were new."""
        for relation in self.relations.values():
            relation.delta_start = relation.delta_end
        changed = False
        for sig, atom in self.pending:
            relation = self.relations[sig]
            if relation.add(atom):
                self.builder.possible.add(self.builder.intern(atom))
                changed = True
        self.pending = []
        for relation in self.relations.values():
            relation.delta_end = len(relation.atoms)
        return changed

    # -- joins ---------------------------------------------------------------------------

    def cost(self, atom: Atom, bound) -> float:
        size = len(self.relations.get(atom.signature, ()))
        fixed = sum(1 for a in atom.args if not (a.variables() - bound))
        return size * 0.1 ** fixed

    def join(self, steps: Sequence[Step], b: Binding, delta_first: bool, acc: tuple) -> Iterator[tuple]:
        """Yield (binding, positive atoms, negative atoms, deferred items) for each body match."""
        if not steps:
            yield b, acc
            return
        step, rest = steps[0], steps[1:]
        kind = step.kind
        pos, neg, deferred = acc
        if kind == POSITIVE:
            atom = step.element.atom
            relation = self.relations.get(atom.signature)
            if relation is None:
                return
            if delta_first:
                candidates = relation.delta()
            else:
                positions, key = self._key(atom, b)
                if key is None:
                    return
                candidates = relation.lookup(positions, key)
            for value in candidates:
                extended = atom.match(value, b)
                if extended is not None:
                    yield from self.join(rest, extended, False, (pos + (value,), neg, deferred))
        elif kind == NEGATIVE:
            try:
                value = step.element.atom.ground(b)
            except Undefined:
                return
            if self.done(value.signature):
                relation = self.relations.get(value.signature)
                if relation is None or value not in relation.members:
                    yield from self.join(rest, b, False, acc)
                    return
                if self.builder.table.get(value) in self.builder.certain:
                    return
            yield from self.join(rest, b, False, (pos, neg + (value,), deferred))
        elif kind == FILTER:
            if step.element.holds(b):
                yield from self.join(rest, b, False, acc)
        elif kind == ASSIGN:
            for extended in run_assignment(step, b):
                yield from self.join(rest, extended, False, acc)
        elif kind == COUNT:
            for extended, literal in self.count_assignment(step.element, b):
                if literal is None:
                    yield from self.join(rest, extended, False, acc)
                else:
                    yield from self.join(rest, extended, False, (pos, neg, deferred + (literal,)))
        elif kind == DEFERRED:
            yield from self.join(rest, b, False, (pos, neg, deferred + ((step.element, b),)))

    def _key(self, atom: Atom, b: Binding):
        positions, key = [], []
        for i, arg in enumerate(atom.args):
            if arg.has_interval or (arg.variables() - b.keys()):
                continue
            try:
                key.append(arg.evaluate(b))
            except Undefined:
                return (), None
            positions.append(i)
        return tuple(positions), tuple(key)

    def solve_condition(
        self, condition: Sequence, b: Binding, open_ok: bool = False
    ) -> Iterator[Tuple[Binding, Optional[tuple]]]:
        """Instances of a condition list under ``b`` with their residual (None when false).

        With ``open_ok`` the condition may read predicates that are still being derived; the
        caller then re-expands it whenever those relations grow.
        """
        elements = condition_elements(condition)
        for element in elements:
            if not open_ok and element.kind in (POSITIVE, NEGATIVE) and not self.done(element.item.atom.signature):
                raise UnsupportedConstructError(
                    f"counting over {element.item.atom.name} inside the component that defines it"
                )
        steps = plan(elements, frozenset(b), self.cost)
        for extended, (pos, neg, _) in self.join(steps, b, False, ((), (), ())):
            yield extended, self.residual(pos, neg)

    # -- aggregates and conditionals ---------------------------------------------------------

    def count_keys(self, aggregate: Aggregate, b: Binding):
        keys: Dict[object, List[tuple]] = defaultdict(list)
        for element in aggregate.elements:
            for extended, residual in self.solve_condition(element.condition, b):
                if residual is None:
                    continue
                if element.literal is not None:
                    key = ("#literal", repr(element.literal.substitute({k: Const(v) for k, v in extended.items()})))
                else:
                    try:
                        key = tuple(t.evaluate(extended) for t in element.terms)
                    except Undefined:
                        continue
                keys[key].append(residual)
        return keys

    def guard_bounds(self, aggregate: Aggregate, b: Binding):
        lower: Optional[int] = None
        upper: Optional[int] = None
        for op, term in aggregate.guards:
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

    def count_assignment(self, aggregate: Aggregate, b: Binding):
        target = aggregate.assignment()
        keys = self.count_keys(aggregate, b)
        certain = sum(1 for alts in keys.values() if any(not p and not n for p, n in alts))
        total = sum(1 for alts in keys.values() if alts)
        for value in range(certain, total + 1):
            extended = dict(b)
            extended[target] = value
            encoded = self.builder.encode_count(keys, value, value)
            if encoded == FALSE:
                continue
            yield extended, (None if encoded == TRUE else ("#id", encoded))

    def resolve(self, item, b: Binding):
        """Ground a deferred body element; returns (pos ids, neg ids) or None when false."""
        if isinstance(item, tuple) and item and item[0] == "#id":
            return (item[1],), ()
        element, binding = item
        if isinstance(element, Aggregate):
            try:
                lower, upper = self.guard_bounds(element, binding)
            except Undefined:
                return None
            encoded = self.builder.encode_count(self.count_keys(element, binding), lower, upper)
            if element.negated:
                if encoded == TRUE:
                    return None
                return ((), ()) if encoded == FALSE else ((), (encoded,))
            if encoded == FALSE:
                return None
            return ((), ()) if encoded == TRUE else ((encoded,), ())
        instances = []
        for extended, residual in self.solve_condition(element.condition, binding):
            if residual is None:
                continue
            instances.append((residual, self.head_status(element.head, extended)))
        encoded = self.builder.encode_conditional(instances)
        return None if encoded == FALSE else encoded

    def head_status(self, literal, b: Binding):
        if isinstance(literal, Comparison):
            return TRUE if literal.holds(b) else FALSE
        try:
            atom = literal.atom.ground(b)
        except Undefined:
            return TRUE if literal.negated else FALSE
        s = self.status(atom)
        if literal.negated:
            return FALSE if s == TRUE else TRUE if s == FALSE else ("neg", s)
        return s if s in (TRUE, FALSE) else ("pos", s)

    # -- heads ---------------------------------------------------------------------------

    def head_atoms(self, info: RuleInfo, b: Binding):
        """Ground head: list of atom tuples for normal heads, or choice element data."""
        head = info.statement.head
        if head is None:
            return [()]
        if isinstance(head, Atom):
            return [(a,) for a in head.expand(b)]
        if isinstance(head, Disjunction):
            options = [[]]
            for atom in head.atoms:
                options = [o + [a] for o in options for a in atom.expand(b)]
            return [tuple(o) for o in options]
        elements = []
        for element in head.elements:
            for extended, residual in self.solve_condition(element.condition, b, open_ok=True):
                if residual is None:
                    continue
                for atom in element.atom.expand(extended):
                    elements.append((atom, residual))
        return elements

    # -- rule evaluation -----------------------------------------------------------------

    def evaluate(self, info: RuleInfo, first: Optional[int], sink: List[_Instance], seen: Set[tuple]) -> None:
        steps = plan(info.elements, frozenset(), self.cost, first)
        key_vars = sorted(info.global_vars)
        for b, (pos, neg, deferred) in self.join(steps, {}, first is not None, ((), (), ())):
            key = (tuple(b.get(v) for v in key_vars), pos, neg)
            if key in seen:
                continue
            seen.add(key)
            residual = self.residual(pos, neg)
            if residual is None:
                continue
            try:
                heads = self.head_atoms(info, b)
            except Undefined:
                continue
            self.stats["instances"] += 1
            instance = _Instance(info, b, heads, residual[0], residual[1], deferred)
            if isinstance(info.statement.head, Choice):
                for atom, _ in heads:
                    self.add_possible(atom)
                if id(info) in self.reopen:
                    self.open_instances.append(instance)
                    continue
            else:
                for group in heads:
                    for atom in group:
                        self.add_possible(atom)
            if deferred:
                sink.append(instance)
            else:
                self.emit(instance, (), ())

    def emit(self, instance: _Instance, extra_pos: tuple, extra_neg: tuple) -> None:
        pos = instance.pos + extra_pos
        neg = instance.neg + extra_neg
        statement = instance.info.statement
        if isinstance(statement, WeakConstraint):
            b = instance.binding
            try:
                weight = statement.weight.evaluate(b)
                level = statement.level.evaluate(b)
                terms = tuple(t.evaluate(b) for t in statement.terms)
            except Undefined:
                return
            if not isinstance(weight, int) or not isinstance(level, int):
                return
            self.builder.add_weak(pos, neg, weight, level, terms)
            return
        head = statement.head
        if isinstance(head, Choice):
            self.emit_choice(instance, pos, neg)
            return
        for group in instance.heads:
            ids = tuple(self.builder.intern(a) for a in group)
            self.builder.add_rule(ids, pos, neg, origin=statement)

    def emit_choice(self, instance: _Instance, pos: tuple, neg: tuple) -> None:
        statement = instance.info.statement
        plain: List[int] = []
        keys: Dict[object, List[tuple]] = defaultdict(list)
        for atom, (cond_pos, cond_neg) in instance.heads:
            atom_id = self.builder.intern(atom)
            if not cond_pos and not cond_neg:
                plain.append(atom_id)
            else:
                self.builder.add_rule((atom_id,), pos + cond_pos, neg + cond_neg, choice=True, origin=statement)
            if atom_id in self.builder.certain:
                keys[atom].append((cond_pos, cond_neg))
            else:
                keys[atom].append(((atom_id,) + cond_pos, cond_neg))
        if plain:
            self.builder.add_rule(tuple(dict.fromkeys(plain)), pos, neg, choice=True, origin=statement)
        if not statement.head.guards:
            return
        try:
            lower, upper = self.guard_bounds(Aggregate((), statement.head.guards), instance.binding)
        except Undefined:
            return
        encoded = self.builder.encode_count(keys, lower, upper)
        if encoded == TRUE:
            return
        if encoded == FALSE:
            self.builder.add_rule((), pos, neg, origin=statement)
        else:
            self.builder.add_rule((), pos, neg + (encoded,), origin=statement)

    def finish_instances(self, instances: List[_Instance]) -> None:
        for instance in instances:
            extra_pos: tuple = ()
            extra_neg: tuple = ()
            ok = True
            for item in instance.deferred:
                resolved = self.resolve(item, instance.binding)
                if resolved is None:
                    ok = False
                    break
                extra_pos += resolved[0]
                extra_neg += resolved[1]
            if ok:
                self.emit(instance, extra_pos, extra_neg)

    # -- driver --------------------------------------------------------------------------

    def settle(self, start: int) -> None:
        """Propagate certainty through the rules added since ``start``."""
        builder = self.builder
        rules = builder.rules[start:]
        watch: Dict[int, List[int]] = defaultdict(list)
        missing = []
        queue = []
        for index, rule in enumerate(rules):
            eligible = len(rule.head) == 1 and not rule.choice and not any(n in builder.possible for n in rule.neg)
            if not eligible:
                missing.append(-1)
                continue
            count = 0
            for p in rule.pos:
                if p not in builder.certain:
                    watch[p].append(index)
                    count += 1
            missing.append(count)
            if count == 0:
                queue.append(rule.head[0])
        while queue:
            atom = queue.pop()
            if atom in builder.certain:
                continue
            builder.certain.add(atom)
            for index in watch.get(atom, ()):
                missing[index] -= 1
                if missing[index] == 0:
                    queue.append(rules[index].head[0])

    def run(self) -> GroundProgram:
        started = time.perf_counter()
        order = components(self.program)
        for i, component in enumerate(order):
            for sig in component:
                self.component_of[sig] = i
        by_component: Dict[int, List[RuleInfo]] = defaultdict(list)
        tail: List[RuleInfo] = []
        for statement in self.program.statements:
            info = RuleInfo(statement)
            heads = statement.head_atoms()
            if heads:
                by_component[self.component_of[heads[0].signature]].append(info)
            else:
                tail.append(info)
        for i, component in enumerate(order):
            self.current = i
            infos = by_component.get(i, [])
            if infos:
                self.ground_component(set(component), infos)
        self.current = len(order)
        deferred: List[_Instance] = []
        for info in tail:
            self.evaluate(info, None, deferred, set())
        self.finish_instances(deferred)
        self.stats["components"] = len(order)
        self.stats["seconds"] = round(time.perf_counter() - started, 4)
        return self.builder.finish(stats=dict(self.stats))

    def ground_component(self, members: Set[Signature], infos: List[RuleInfo]) -> None:
        start = len(self.builder.rules)
        deferred: List[_Instance] = []
        seen: Dict[int, Set[tuple]] = {id(info): set() for info in infos}
        recursive = {
            id(info): [e.index for e in info.positives() if e.item.atom.signature in members]
            for info in infos
        }
        self.reopen = {id(info) for info in infos if _choice_reads(info.statement, members)}
        self.open_instances = []
        for info in infos:
            self.evaluate(info, None, deferred, seen[id(info)])
        self.expand_open()
        rounds = 1
        while self.commit():
            rounds += 1
            for info in infos:
                for index in recursive[id(info)]:
                    sig = info.statement.body[index].atom.signature
                    relation = self.relations.get(sig)
                    if relation is None or relation.delta_start == relation.delta_end:
                        continue
                    self.evaluate(info, index, deferred, seen[id(info)])
            self.expand_open()
        self.stats["rounds"] += rounds
        # the component is complete: predicates in it may now be read negatively
        self.current += 1
        self.settle(start)
        for instance in self.open_instances:
            try:
                instance.heads = self.head_atoms(instance.info, instance.binding)
            except Undefined:
                continue
            if instance.deferred:
                deferred.append(instance)
            else:
                self.emit(instance, (), ())
        self.reopen, self.open_instances = set(), []
        mark = len(self.builder.rules)
        self.finish_instances(deferred)
        self.settle(mark)
        self.current -= 1

    def expand_open(self) -> None:
        """Re-read the head conditions of open choice instances against the atoms derived so far."""
        for instance in self.open_instances:
            try:
                heads = self.head_atoms(instance.info, instance.binding)
            except Undefined:
                continue
            for atom, _ in heads:
                self.add_possible(atom)


def _choice_reads(statement, members: Set[Signature]) -> bool:
    head = getattr(statement, "head", None)
    if not isinstance(head, Choice):
        return False
    return any(
        isinstance(c, Literal) and c.atom.signature in members for e in head.elements for c in e.condition
    )


def _family(sig: Signature) -> Signature:
    return (sig[0].lstrip("-"), sig[1])


def prune(program: Program, keep: Sequence[str]) -> Program:
    """Drop statements that cannot fire or cannot reach the ``keep`` predicates.

    A statement with a positive body literal over a predicate that no head defines never
    fires. Of the rest, only rules whose heads feed ``keep``, a constraint or a weak
    constraint are kept. Answer sets of the result are projections of the original ones.
    """
    statements = list(program.statements)
    while True:
        defined = {a.signature for s in statements for a in s.head_atoms()}
        alive = [s for s in statements if all(sig in defined for sig, top in body_signatures(s) if top)]
        if len(alive) == len(statements):
            break
        statements = alive
    wanted = {name.lstrip("-") for name in keep}
    needed: Set[Signature] = set()
    frontier: List[Signature] = []

    def need(sig: Signature) -> None:
        family = _family(sig)
        if family not in needed:
            needed.add(family)
            frontier.append(family)

    producers: Dict[Signature, List[object]] = defaultdict(list)
    for statement in statements:
        heads = statement.head_atoms()
        if not heads:
            for sig, _ in body_signatures(statement):
                need(sig)
        for a in heads:
            producers[_family(a.signature)].append(statement)
            if a.name.lstrip("-") in wanted:
                need(a.signature)
    while frontier:
        for statement in producers.get(frontier.pop(), ()):
            for a in statement.head_atoms():
                need(a.signature)
            for sig, _ in body_signatures(statement):
                need(sig)
    kept = [s for s in statements if not s.head_atoms() or any(_family(a.signature) in needed for a in s.head_atoms())]
    return Program(kept, program.consts, program.name, program.source_count)


def ground(
    program: Program,
    bindings: Optional[Mapping[str, object]] = None,
    cap: int = DEFAULT_RULE_CAP,
    keep: Optional[Sequence[str]] = None,
) -> GroundProgram:
    """Instantiate ``program`` bottom-up over derivable atoms and simplify the result.

    With ``keep``, only rules that can influence those predicates survive.
    """
    resolved = resolve_constants(program, bindings)
    if keep:
        resolved = prune(resolved, keep)
    grounded = Grounder(resolved, cap).run()
    return grounded.relevant(keep) if keep else grounded
