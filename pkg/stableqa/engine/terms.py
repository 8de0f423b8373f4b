"""Ground values and the syntax tree of the rule language."""
from __future__ import annotations

import itertools as it
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union


class Function:
    """Ground symbolic value. Constants have no arguments, tuples have an empty name."""

    __slots__ = ("name", "args", "_hash")

    def __init__(self, name: str, args: tuple = ()) -> None:
        self.name = name
        self.args = args
        self._hash = hash((name, args))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (
            isinstance(other, Function)
            and self._hash == other._hash
            and self.name == other.name
            and self.args == other.args
        )

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    def __lt__(self, other) -> bool:
        return sort_key(self) < sort_key(other)

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def signature(self) -> Tuple[str, int]:
        return (self.name, len(self.args))

    @property
    def positive(self) -> "Function":
        """The atom without its strong negation sign."""
        if self.name.startswith("-"):
            return Function(self.name[1:], self.args)
        return self

    def __repr__(self) -> str:
        return render(self)

    __str__ = __repr__


class String:
    __slots__ = ("value", "_hash")

    def __init__(self, value: str) -> None:
        self.value = value
        self._hash = hash(("\0str", value))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return isinstance(other, String) and self.value == other.value

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    def __lt__(self, other) -> bool:
        return sort_key(self) < sort_key(other)

    def __repr__(self) -> str:
        return render(self)

    __str__ = __repr__


Value = Union[int, Function, String]


def sort_key(value: Value) -> tuple:
    """Total order on ground values: integers, then functions, then strings."""
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        return (0, value)
    if isinstance(value, String):
        return (2, value.value)
    return (1, len(value.args), value.name, tuple(sort_key(a) for a in value.args))


def render(value: Value) -> str:
    if isinstance(value, int):
        return str(value)
    if isinstance(value, String):
        escaped = value.value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{escaped}"'
    if not value.args:
        return value.name
    inner = ",".join(render(a) for a in value.args)
    if value.name == "":
        return f"({inner},)" if len(value.args) == 1 else f"({inner})"
    return f"{value.name}({inner})"


def constant(name: str) -> Function:
    return Function(name, ())


def atom(name: str, *args) -> Function:
    """Convenience builder: python ints stay ints, strings become constants."""
    converted = []
    for arg in args:
        if isinstance(arg, str):
            converted.append(Function(arg))
        elif isinstance(arg, tuple):
            converted.append(atom("", *arg))
        else:
            converted.append(arg)
    return Function(name, tuple(converted))


class Undefined(Exception):
    """Arithmetic over a non-integer; the enclosing instance is dropped."""


Binding = Dict[str, Value]


# -- terms ------------------------------------------------------------------------------


class Term:
    __slots__ = ()

    def variables(self) -> FrozenSet[str]:
        raise NotImplementedError

    @property
    def is_ground(self) -> bool:
        return not self.variables()

    @property
    def has_interval(self) -> bool:
        return False

    @property
    def is_arithmetic(self) -> bool:
        return False

    def evaluate(self, b: Binding) -> Value:
        raise NotImplementedError

    def expand(self, b: Binding) -> List[Value]:
        return [self.evaluate(b)]

    def match(self, value: Value, b: Binding) -> Optional[Binding]:
        raise NotImplementedError

    def bindable(self) -> FrozenSet[str]:
        """Variables a structural match of this term can bind."""
        return frozenset()

    def substitute(self, mapping: Dict[str, "Term"]) -> "Term":
        return self


class Const(Term):
    __slots__ = ("value",)

    def __init__(self, value: Value) -> None:
        self.value = value

    def variables(self):
        return frozenset()

    def evaluate(self, b):
        return self.value

    def match(self, value, b):
        return b if value == self.value else None

    def substitute(self, mapping):
        # lowercase keys replace symbolic constants (#const), uppercase keys are variables
        if not isinstance(self.value, Function):
            return self
        if not self.value.args:
            return mapping.get(self.value.name, self)
        return make_fn(self.value.name, [Const(a).substitute(mapping) for a in self.value.args])

    def __eq__(self, other):
        return isinstance(other, Const) and other.value == self.value

    def __hash__(self):
        return hash(("const", self.value))

    def __repr__(self):
        return render(self.value)


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str) -> None:
        self.name = name

    @property
    def anonymous(self) -> bool:
        return self.name.startswith("_")

    def variables(self):
        return frozenset((self.name,))

    def evaluate(self, b):
        return b[self.name]

    def match(self, value, b):
        bound = b.get(self.name, _MISSING)
        if bound is _MISSING:
            extended = dict(b)
            extended[self.name] = value
            return extended
        return b if bound == value else None

    def bindable(self):
        return frozenset((self.name,))

    def substitute(self, mapping):
        return mapping.get(self.name, self)

    def __eq__(self, other):
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self):
        return hash(("var", self.name))

    def __repr__(self):
        return "_" if self.anonymous else self.name


_MISSING = object()


class Fn(Term):
    """Compound term with at least one non-ground argument."""

    __slots__ = ("name", "args", "_vars", "_order", "_interval")

    def __init__(self, name: str, args: Sequence[Term]) -> None:
        self.name = name
        self.args = tuple(args)
        self._vars = frozenset().union(*(a.variables() for a in self.args)) if self.args else frozenset()
        # structural arguments first so arithmetic ones see their variables bound
        self._order = tuple(
            sorted(range(len(self.args)), key=lambda i: self.args[i].is_arithmetic)
        )
        self._interval = any(a.has_interval for a in self.args)

    def variables(self):
        return self._vars

    @property
    def has_interval(self):
        return self._interval

    def evaluate(self, b):
        return Function(self.name, tuple(a.evaluate(b) for a in self.args))

    def expand(self, b):
        if not self._interval:
            return [self.evaluate(b)]
        options = [a.expand(b) for a in self.args]
        return [Function(self.name, tuple(combo)) for combo in it.product(*options)]

    def match(self, value, b):
        if not isinstance(value, Function) or value.name != self.name or len(value.args) != len(self.args):
            return None
        for i in self._order:
            b = self.args[i].match(value.args[i], b)
            if b is None:
                return None
        return b

    def bindable(self):
        out = frozenset()
        for a in self.args:
            out |= a.bindable()
        return out

    def substitute(self, mapping):
        return make_fn(self.name, [a.substitute(mapping) for a in self.args])

    def __eq__(self, other):
        return isinstance(other, Fn) and other.name == self.name and other.args == self.args

    def __hash__(self):
        return hash(("fn", self.name, self.args))

    def __repr__(self):
        inner = ",".join(repr(a) for a in self.args)
        if self.name == "":
            return f"({inner},)" if len(self.args) == 1 else f"({inner})"
        return f"{self.name}({inner})"


def make_fn(name: str, args: Sequence[Term]) -> Term:
    """Build a compound term, folding it into a constant when every argument is ground."""
    args = list(args)
    if all(isinstance(a, Const) for a in args):
        return Const(Function(name, tuple(a.value for a in args)))
    return Fn(name, args)


def _int(value: Value) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    raise Undefined(value)


class Interval(Term):
    __slots__ = ("lo", "hi", "_vars")

    def __init__(self, lo: Term, hi: Term) -> None:
        self.lo = lo
        self.hi = hi
        self._vars = lo.variables() | hi.variables()

    def variables(self):
        return self._vars

    @property
    def has_interval(self):
        return True

    @property
    def is_arithmetic(self):
        return True

    def evaluate(self, b):
        raise Undefined("interval in a single-valued position")

    def expand(self, b):
        lo = _int(self.lo.evaluate(b))
        hi = _int(self.hi.evaluate(b))
        return list(range(lo, hi + 1))

    def match(self, value, b):
        if not isinstance(value, int):
            return None
        try:
            lo = _int(self.lo.evaluate(b))
            hi = _int(self.hi.evaluate(b))
        except Undefined:
            return None
        return b if lo <= value <= hi else None

    def substitute(self, mapping):
        return Interval(self.lo.substitute(mapping), self.hi.substitute(mapping))

    def __eq__(self, other):
        return isinstance(other, Interval) and other.lo == self.lo and other.hi == self.hi

    def __hash__(self):
        return hash(("interval", self.lo, self.hi))

    def __repr__(self):
        return f"{self.lo!r}..{self.hi!r}"


_BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
}


class BinOp(Term):
    __slots__ = ("op", "left", "right", "_vars", "_interval")

    def __init__(self, op: str, left: Term, right: Term) -> None:
        self.op = op
        self.left = left
        self.right = right
        self._vars = left.variables() | right.variables()
        self._interval = left.has_interval or right.has_interval

    def variables(self):
        return self._vars

    @property
    def has_interval(self):
        return self._interval

    @property
    def is_arithmetic(self):
        return True

    def evaluate(self, b):
        return _BINOPS[self.op](_int(self.left.evaluate(b)), _int(self.right.evaluate(b)))

    def expand(self, b):
        if not self._interval:
            return [self.evaluate(b)]
        fn = _BINOPS[self.op]
        return [
            fn(_int(x), _int(y)) for x in self.left.expand(b) for y in self.right.expand(b)
        ]

    def match(self, value, b):
        if self._vars - b.keys():
            solutions = invert(self, value, b)
            return solutions[0] if solutions else None
        try:
            return b if self.evaluate(b) == value else None
        except Undefined:
            return None

    def substitute(self, mapping):
        return fold(BinOp(self.op, self.left.substitute(mapping), self.right.substitute(mapping)))

    def __eq__(self, other):
        return (
            isinstance(other, BinOp)
            and other.op == self.op
            and other.left == self.left
            and other.right == self.right
        )

    def __hash__(self):
        return hash(("binop", self.op, self.left, self.right))

    def __repr__(self):
        return f"({self.left!r}{self.op}{self.right!r})"


class UnaryOp(Term):
    """Unary minus ("-") or absolute value ("abs")."""

    __slots__ = ("op", "arg")

    def __init__(self, op: str, arg: Term) -> None:
        self.op = op
        self.arg = arg

    def variables(self):
        return self.arg.variables()

    @property
    def has_interval(self):
        return self.arg.has_interval

    @property
    def is_arithmetic(self):
        return True

    def evaluate(self, b):
        v = _int(self.arg.evaluate(b))
        return -v if self.op == "-" else abs(v)

    def expand(self, b):
        if not self.arg.has_interval:
            return [self.evaluate(b)]
        return [(-_int(v) if self.op == "-" else abs(_int(v))) for v in self.arg.expand(b)]

    def match(self, value, b):
        if self.variables() - b.keys():
            solutions = invert(self, value, b)
            return solutions[0] if solutions else None
        try:
            return b if self.evaluate(b) == value else None
        except Undefined:
            return None

    def substitute(self, mapping):
        return fold(UnaryOp(self.op, self.arg.substitute(mapping)))

    def __eq__(self, other):
        return isinstance(other, UnaryOp) and other.op == self.op and other.arg == self.arg

    def __hash__(self):
        return hash(("unary", self.op, self.arg))

    def __repr__(self):
        return f"|{self.arg!r}|" if self.op == "abs" else f"-{self.arg!r}"


def fold(term: Term) -> Term:
    """Evaluate ground arithmetic at construction time."""
    if term.is_arithmetic and not term.has_interval and term.is_ground:
        try:
            return Const(term.evaluate({}))
        except Undefined:
            return term
    return term


def invertible(term: Term, bound: FrozenSet[str]) -> Optional[str]:
    """The single unbound variable an equation over ``term`` can be solved for, if any."""
    free = term.variables() - bound
    if len(free) != 1:
        return None
    (name,) = free
    return name if _solvable(term, name) else None


def _solvable(term: Term, name: str) -> bool:
    if isinstance(term, Var):
        return term.name == name
    if isinstance(term, BinOp):
        in_left = name in term.left.variables()
        in_right = name in term.right.variables()
        if in_left and in_right:
            return False
        if term.op == "*":
            side = term.left if in_left else term.right
            return _solvable(side, name)
        return _solvable(term.left if in_left else term.right, name)
    if isinstance(term, UnaryOp):
        return term.op == "-" and _solvable(term.arg, name)
    return False


def invert(term: Term, target: Value, b: Binding) -> List[Binding]:
    """All bindings of the single unbound variable in ``term`` making it equal ``target``."""
    if isinstance(term, Var):
        m = term.match(target, b)
        return [m] if m is not None else []
    if isinstance(term, (Const, Fn)):
        m = term.match(target, b)
        return [m] if m is not None else []
    if not isinstance(target, int) or isinstance(target, bool):
        return []
    if isinstance(term, UnaryOp):
        return invert(term.arg, -target, b) if term.op == "-" else []
    if isinstance(term, BinOp):
        unbound = term.variables() - b.keys()
        in_left = bool(term.left.variables() & unbound)
        try:
            if in_left:
                other = _int(term.right.evaluate(b))
                if term.op == "+":
                    return invert(term.left, target - other, b)
                if term.op == "-":
                    return invert(term.left, target + other, b)
                if other == 0 or target % other:
                    return []
                return invert(term.left, target // other, b)
            other = _int(term.left.evaluate(b))
            if term.op == "+":
                return invert(term.right, target - other, b)
            if term.op == "-":
                return invert(term.right, other - target, b)
            if other == 0 or target % other:
                return []
            return invert(term.right, target // other, b)
        except Undefined:
            return []
    if isinstance(term, Interval):
        m = term.match(target, b)
        return [m] if m is not None else []
    return []


# -- literals ---------------------------------------------------------------------------


class Atom:
    """Predicate applied to terms. A leading "-" in the name marks strong negation."""

    __slots__ = ("name", "args", "_vars", "_order", "_ground")

    def __init__(self, name: str, args: Sequence[Term] = ()) -> None:
        self.name = name
        self.args = tuple(args)
        self._vars = frozenset().union(*(a.variables() for a in self.args)) if self.args else frozenset()
        self._order = tuple(sorted(range(len(self.args)), key=lambda i: self.args[i].is_arithmetic))
        self._ground = None
        if not self._vars and not any(a.has_interval for a in self.args):
            self._ground = Function(name, tuple(a.evaluate({}) for a in self.args))

    @property
    def signature(self) -> Tuple[str, int]:
        return (self.name, len(self.args))

    @property
    def strongly_negated(self) -> bool:
        return self.name.startswith("-")

    def variables(self) -> FrozenSet[str]:
        return self._vars

    def bindable(self) -> FrozenSet[str]:
        out = frozenset()
        for a in self.args:
            if not a.is_arithmetic:
                out |= a.bindable()
        return out

    def arithmetic_variables(self) -> FrozenSet[str]:
        out = frozenset()
        for a in self.args:
            out |= _arith_vars(a)
        return out

    @property
    def has_interval(self) -> bool:
        return any(a.has_interval for a in self.args)

    def ground(self, b: Binding) -> Function:
        if self._ground is not None:
            return self._ground
        return Function(self.name, tuple(a.evaluate(b) for a in self.args))

    def expand(self, b: Binding) -> List[Function]:
        if not self.has_interval:
            return [self.ground(b)]
        options = [a.expand(b) for a in self.args]
        return [Function(self.name, tuple(c)) for c in it.product(*options)]

    def match(self, value: Function, b: Binding) -> Optional[Binding]:
        args = value.args
        if len(args) != len(self.args):
            return None
        for i in self._order:
            b = self.args[i].match(args[i], b)
            if b is None:
                return None
        return b

    def substitute(self, mapping: Dict[str, Term]) -> "Atom":
        return Atom(self.name, [a.substitute(mapping) for a in self.args])

    def __eq__(self, other):
        return isinstance(other, Atom) and other.name == self.name and other.args == self.args

    def __hash__(self):
        return hash(("atom", self.name, self.args))

    def __repr__(self):
        if not self.args:
            return self.name
        return f"{self.name}({','.join(repr(a) for a in self.args)})"


def _arith_vars(term: Term) -> FrozenSet[str]:
    if term.is_arithmetic:
        return term.variables()
    if isinstance(term, Fn):
        out = frozenset()
        for a in term.args:
            out |= _arith_vars(a)
        return out
    return frozenset()


class Literal:
    """An atom, possibly under default negation."""

    __slots__ = ("atom", "negated")

    def __init__(self, atom: Atom, negated: bool = False) -> None:
        self.atom = atom
        self.negated = negated

    def variables(self):
        return self.atom.variables()

    def substitute(self, mapping):
        return Literal(self.atom.substitute(mapping), self.negated)

    def __eq__(self, other):
        return isinstance(other, Literal) and other.atom == self.atom and other.negated == self.negated

    def __hash__(self):
        return hash(("lit", self.atom, self.negated))

    def __repr__(self):
        return f"not {self.atom!r}" if self.negated else repr(self.atom)


_COMPARE = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: sort_key(a) < sort_key(b),
    "<=": lambda a, b: sort_key(a) <= sort_key(b),
    ">": lambda a, b: sort_key(a) > sort_key(b),
    ">=": lambda a, b: sort_key(a) >= sort_key(b),
}

FLIPPED = {"=": "=", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


def compare(op: str, left: Value, right: Value) -> bool:
    return _COMPARE[op](left, right)


class Comparison:
    __slots__ = ("op", "left", "right")

    def __init__(self, op: str, left: Term, right: Term) -> None:
        self.op = op
        self.left = left
        self.right = right

    def variables(self):
        return self.left.variables() | self.right.variables()

    def holds(self, b: Binding) -> bool:
        """Evaluate with every variable bound. Intervals compare existentially."""
        try:
            lefts = self.left.expand(b)
            rights = self.right.expand(b)
        except Undefined:
            return False
        fn = _COMPARE[self.op]
        return any(fn(x, y) for x in lefts for y in rights)

    def substitute(self, mapping):
        return Comparison(self.op, self.left.substitute(mapping), self.right.substitute(mapping))

    def __eq__(self, other):
        return (
            isinstance(other, Comparison)
            and other.op == self.op
            and other.left == self.left
            and other.right == self.right
        )

    def __hash__(self):
        return hash(("cmp", self.op, self.left, self.right))

    def __repr__(self):
        return f"{self.left!r}{self.op}{self.right!r}"


BasicLiteral = Union[Literal, Comparison]


class Conditional:
    """``head : c1, ..., cn`` inside a rule body."""

    __slots__ = ("head", "condition")

    def __init__(self, head: BasicLiteral, condition: Sequence[BasicLiteral]) -> None:
        self.head = head
        self.condition = tuple(condition)

    def variables(self):
        out = self.head.variables()
        for c in self.condition:
            out |= c.variables()
        return out

    def substitute(self, mapping):
        return Conditional(self.head.substitute(mapping), [c.substitute(mapping) for c in self.condition])

    def __repr__(self):
        cond = ",".join(repr(c) for c in self.condition)
        return f"{self.head!r}: {cond}" if cond else repr(self.head)


class AggregateElement:
    """One element of a count aggregate.

    Either a term tuple (``#count{I: p(I)}``) or, in the set notation ``1{a; b}``, the
    literal itself serves as the counted tuple.
    """

    __slots__ = ("terms", "condition", "literal")

    def __init__(self, terms: Sequence[Term], condition: Sequence[BasicLiteral], literal: Optional[BasicLiteral] = None) -> None:
        self.terms = tuple(terms)
        self.condition = tuple(condition)
        self.literal = literal

    def variables(self):
        out = frozenset()
        for t in self.terms:
            out |= t.variables()
        for c in self.condition:
            out |= c.variables()
        return out

    def substitute(self, mapping):
        return AggregateElement(
            [t.substitute(mapping) for t in self.terms],
            [c.substitute(mapping) for c in self.condition],
            self.literal.substitute(mapping) if self.literal is not None else None,
        )

    def __repr__(self):
        if self.literal is not None:
            rest = self.condition[1:]
            head = repr(self.literal)
        else:
            rest = self.condition
            head = ",".join(repr(t) for t in self.terms)
        return f"{head}: {','.join(repr(c) for c in rest)}" if rest else head


class Aggregate:
    """``#count`` over elements. Guards are read as ``count op bound``."""

    __slots__ = ("elements", "guards", "negated")

    def __init__(self, elements: Sequence[AggregateElement], guards: Sequence[Tuple[str, Term]], negated: bool = False) -> None:
        self.elements = tuple(elements)
        self.guards = tuple(guards)
        self.negated = negated

    def variables(self):
        out = frozenset()
        for e in self.elements:
            out |= e.variables()
        for _, t in self.guards:
            out |= t.variables()
        return out

    def guard_variables(self):
        out = frozenset()
        for _, t in self.guards:
            out |= t.variables()
        return out

    def assignment(self) -> Optional[str]:
        """Name of the variable bound by ``N = #count{...}``, if this is an assignment."""
        if self.negated:
            return None
        for op, t in self.guards:
            if op == "=" and isinstance(t, Var):
                return t.name
        return None

    def substitute(self, mapping):
        return Aggregate(
            [e.substitute(mapping) for e in self.elements],
            [(op, t.substitute(mapping)) for op, t in self.guards],
            self.negated,
        )

    def __repr__(self):
        inner = "; ".join(repr(e) for e in self.elements)
        guards = " ".join(f"{op}{t!r}" for op, t in self.guards)
        prefix = "not " if self.negated else ""
        return f"{prefix}#count{{{inner}}} {guards}".rstrip()


BodyElement = Union[Literal, Comparison, Conditional, Aggregate]


class ChoiceElement:
    __slots__ = ("atom", "condition")

    def __init__(self, atom: Atom, condition: Sequence[BasicLiteral] = ()) -> None:
        self.atom = atom
        self.condition = tuple(condition)

    def variables(self):
        out = self.atom.variables()
        for c in self.condition:
            out |= c.variables()
        return out

    def substitute(self, mapping):
        return ChoiceElement(self.atom.substitute(mapping), [c.substitute(mapping) for c in self.condition])

    def __repr__(self):
        if self.condition:
            return f"{self.atom!r}: {','.join(repr(c) for c in self.condition)}"
        return repr(self.atom)


class Choice:
    __slots__ = ("elements", "guards")

    def __init__(self, elements: Sequence[ChoiceElement], guards: Sequence[Tuple[str, Term]] = ()) -> None:
        self.elements = tuple(elements)
        self.guards = tuple(guards)

    def substitute(self, mapping):
        return Choice([e.substitute(mapping) for e in self.elements], [(op, t.substitute(mapping)) for op, t in self.guards])

    def __repr__(self):
        inner = "; ".join(repr(e) for e in self.elements)
        guards = " ".join(f"{op}{t!r}" for op, t in self.guards)
        return f"{{{inner}}} {guards}".rstrip()


class Disjunction:
    __slots__ = ("atoms",)

    def __init__(self, atoms: Sequence[Atom]) -> None:
        self.atoms = tuple(atoms)

    def substitute(self, mapping):
        return Disjunction([a.substitute(mapping) for a in self.atoms])

    def __repr__(self):
        return "; ".join(repr(a) for a in self.atoms)


Head = Union[Atom, Disjunction, Choice, None]


class Rule:
    __slots__ = ("head", "body", "index", "line")

    def __init__(self, head: Head, body: Sequence[BodyElement], index: int = 0, line: int = 0) -> None:
        self.head = head
        self.body = tuple(body)
        self.index = index
        self.line = line

    @property
    def is_fact(self) -> bool:
        return isinstance(self.head, Atom) and not self.body and self.head._ground is not None

    def head_atoms(self) -> List[Atom]:
        if isinstance(self.head, Atom):
            return [self.head]
        if isinstance(self.head, Disjunction):
            return list(self.head.atoms)
        if isinstance(self.head, Choice):
            return [e.atom for e in self.head.elements]
        return []

    def substitute(self, mapping):
        head = self.head.substitute(mapping) if self.head is not None else None
        return Rule(head, [e.substitute(mapping) for e in self.body], self.index, self.line)

    def __repr__(self):
        head = repr(self.head) if self.head is not None else ""
        if not self.body:
            return f"{head}."
        body = ", ".join(repr(e) for e in self.body)
        return f"{head} :- {body}." if head else f":- {body}."


class WeakConstraint:
    __slots__ = ("body", "weight", "level", "terms", "index", "line")

    def __init__(self, body: Sequence[BodyElement], weight: Term, level: Term, terms: Sequence[Term], index: int = 0, line: int = 0) -> None:
        self.body = tuple(body)
        self.weight = weight
        self.level = level
        self.terms = tuple(terms)
        self.index = index
        self.line = line

    head = None

    def head_atoms(self):
        return []

    def substitute(self, mapping):
        return WeakConstraint(
            [e.substitute(mapping) for e in self.body],
            self.weight.substitute(mapping),
            self.level.substitute(mapping),
            [t.substitute(mapping) for t in self.terms],
            self.index,
            self.line,
        )

    def __repr__(self):
        body = ", ".join(repr(e) for e in self.body)
        terms = "".join(f", {t!r}" for t in self.terms)
        return f":~ {body}. [{self.weight!r}@{self.level!r}{terms}]"


Statement = Union[Rule, WeakConstraint]


class Program:
    """Parsed program. Immutable once built."""

    __slots__ = ("statements", "consts", "name", "source_count")

    def __init__(self, statements: Sequence[Statement], consts: Sequence[Tuple[str, Value]] = (), name: str = "<program>", source_count: int = 0) -> None:
        self.statements = tuple(statements)
        self.consts = tuple(consts)
        self.name = name
        self.source_count = source_count

    @property
    def rules(self) -> Tuple[Statement, ...]:
        return self.statements

    def __len__(self) -> int:
        return len(self.statements)

    def __iter__(self):
        return iter(self.statements)

    def facts(self) -> List[Function]:
        return [s.head._ground for s in self.statements if isinstance(s, Rule) and s.is_fact]

    def __add__(self, other: "Program") -> "Program":
        offset = self.source_count
        shifted = []
        for s in other.statements:
            if isinstance(s, Rule):
                shifted.append(Rule(s.head, s.body, s.index + offset, s.line))
            else:
                shifted.append(WeakConstraint(s.body, s.weight, s.level, s.terms, s.index + offset, s.line))
        return Program(
            self.statements + tuple(shifted),
            self.consts + other.consts,
            self.name,
            self.source_count + other.source_count,
        )

    def __repr__(self):
        return "\n".join(repr(s) for s in self.statements)
