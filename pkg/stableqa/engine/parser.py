"""Reader for the rule language: facts, rules, choices, disjunctions, counts and weak constraints."""
from __future__ import annotations

import itertools as it
import re
from typing import List, NamedTuple, Optional, Tuple

from .analysis import check_safety
from .errors import ParseError, SafetyError, UnsupportedConstructError
from .terms import (
    Aggregate,
    AggregateElement,
    Atom,
    BinOp,
    Choice,
    ChoiceElement,
    Comparison,
    Conditional,
    Const,
    Disjunction,
    Function,
    Interval,
    Literal,
    Program,
    Rule,
    String,
    Term,
    UnaryOp,
    Var,
    WeakConstraint,
    fold,
    make_fn,
)


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


_TOKENS = [
    ("BLOCK_COMMENT", r"%\*.*?\*%"),
    ("COMMENT", r"%[^\n]*"),
    ("WS", r"[ \t\r\n]+"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("NUMBER", r"\d+"),
    ("IF", r":-"),
    ("WIF", r":~"),
    ("DOTS", r"\.\."),
    ("CMP", r"!=|<=|>=|==|<>|<|>|="),
    ("DIRECTIVE", r"#[a-z_]+"),
    ("VARIABLE", r"_*[A-Z][A-Za-z0-9_']*"),
    ("ANONYMOUS", r"_(?![A-Za-z0-9_])"),
    ("IDENT", r"_*[a-z][A-Za-z0-9_']*"),
    ("PUNCT", r"\*\*|[(){}\[\],;.:@|+\-*/\\&?^~]"),
]
_LEXER = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKENS), re.DOTALL)

_AGGREGATES = {"#sum", "#sum+", "#min", "#max"}


def tokenize(text: str, name: str = "<program>") -> List[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _LEXER.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, name)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("WS", "COMMENT", "BLOCK_COMMENT"):
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


def _unescape(text: str) -> str:
    return re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t"}.get(m.group(1), m.group(1)), text[1:-1])


class _Statement(NamedTuple):
    head: object
    body: list
    weak: Optional[tuple]
    line: int


class _Parser:
    def __init__(self, text: str, name: str) -> None:
        self.name = name
        self.tokens = tokenize(text, name)
        self.pos = 0
        self.fresh = 0

    # -- token helpers -------------------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind not in ("STRING",)

    def advance(self) -> Token:
        token = self.tok
        self.pos += 1
        return token

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r} but found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def fail(self, message: str, token: Optional[Token] = None):
        token = token or self.tok
        raise ParseError(message, token.line, token.column, self.name)

    def unsupported(self, construct: str, token: Optional[Token] = None):
        token = token or self.tok
        raise UnsupportedConstructError(construct, token.line, token.column, self.name)

    # -- statements ----------------------------------------------------------------------

    def program(self):
        statements: List[_Statement] = []
        consts: List[Tuple[str, object]] = []
        while self.tok.kind != "EOF":
            token = self.tok
            if token.kind == "DIRECTIVE":
                if token.text == "#const":
                    consts.append(self.const())
                    continue
                self.unsupported(f"directive {token.text}")
            if token.kind == "WIF":
                statements.append(self.weak_constraint())
                continue
            statements.append(self.rule())
        return statements, consts

    def const(self):
        self.advance()
        token = self.tok
        if token.kind != "IDENT":
            self.fail("expected a constant name after #const")
        self.advance()
        self.expect("=")
        alternatives = self.term()
        self.expect(".")
        term = alternatives[0]
        if len(alternatives) != 1 or not isinstance(term, Const):
            self.fail(f"#const {token.text} must be a ground term", token)
        return token.text, term.value

    def weak_constraint(self) -> _Statement:
        start = self.advance()
        body = self.body()
        self.expect(".")
        self.expect("[")
        weight = self.single_term()
        level: Term = Const(0)
        if self.accept("@"):
            level = self.single_term()
        terms = []
        while self.accept(","):
            terms.append(self.single_term())
        self.expect("]")
        return _Statement(None, body, (weight, level, terms), start.line)

    def rule(self) -> _Statement:
        start = self.tok
        if self.accept(":-"):
            body = self.body()
            self.expect(".")
            return _Statement(None, body, None, start.line)
        head = self.head()
        body = []
        if self.accept(":-"):
            body = self.body()
        self.expect(".")
        return _Statement(head, body, None, start.line)

    # -- heads ---------------------------------------------------------------------------

    def head(self):
        """Returns ("atoms", [alternatives...]) or ("choice", choice-alternatives)."""
        if self.at("{") or self._bounded_brace():
            return ("choice", self.choice())
        disjuncts = [self.atom_alternatives()]
        while self.at(";") or self.at("|"):
            self.advance()
            disjuncts.append(self.atom_alternatives())
        if self.at(":"):
            self.unsupported("conditional literal in a rule head")
        return ("atoms", disjuncts)

    def _bounded_brace(self) -> bool:
        """Lookahead for ``term {`` or ``term op {`` opening a bounded choice."""
        depth = 0
        for offset in range(0, 64):
            token = self.peek(offset)
            if token.kind == "EOF" or token.text in (".", ":-"):
                return False
            if token.text == "(":
                depth += 1
            elif token.text == ")":
                depth -= 1
            elif token.text == "{" and depth == 0:
                return offset > 0
            elif depth == 0 and token.kind == "IDENT" and self.peek(offset + 1).text == "(":
                return False
        return False

    def choice(self):
        guards = self.left_guard()
        self.expect("{")
        elements: List[List[ChoiceElement]] = []
        if not self.at("}"):
            while True:
                atoms = self.atom_alternatives()
                condition = self.condition_list() if self.accept(":") else [[]]
                elements.append(
                    [ChoiceElement(a, c) for a in atoms for c in condition]
                )
                if not self.accept(";"):
                    break
        self.expect("}")
        guards += self.right_guard()
        flat = [e for group in elements for e in group]
        return Choice(flat, guards)

    def left_guard(self) -> List[Tuple[str, Term]]:
        if self.at("{") or self.tok.kind == "DIRECTIVE":
            return []
        bound = self.single_term(arith_only=True)
        op = "<="
        if self.tok.kind == "CMP":
            op = self.comparison_op()
        flipped = {"<=": ">=", "<": ">", ">=": "<=", ">": "<", "=": "=", "!=": "!="}[op]
        self._check_guard(flipped)
        return [(flipped, bound)]

    def right_guard(self) -> List[Tuple[str, Term]]:
        if self.tok.kind == "CMP":
            op = self.comparison_op()
            self._check_guard(op)
            return [(op, self.single_term(arith_only=True))]
        if self.tok.kind in ("NUMBER", "VARIABLE") or (self.tok.kind == "IDENT" and self.peek().text != "("):
            return [("<=", self.single_term(arith_only=True))]
        return []

    def _check_guard(self, op: str) -> None:
        if op == "!=":
            self.unsupported("!= aggregate guard")

    def comparison_op(self) -> str:
        text = self.advance().text
        return {"==": "=", "<>": "!="}.get(text, text)

    # -- bodies --------------------------------------------------------------------------

    def body(self) -> List[list]:
        """Body elements, each a list of pooled alternatives."""
        elements = []
        while True:
            elements.append(self.body_element())
            if self.accept(",") or self.accept(";"):
                continue
            break
        return elements

    def body_element(self) -> list:
        negated = False
        if self.at("not"):
            self.advance()
            negated = True
            if self.at("not"):
                self.unsupported("double default negation")
        if self.tok.kind == "DIRECTIVE" or self.at("{") or self._body_aggregate_ahead():
            return [self.aggregate(negated)]
        literals = self.basic_literal(negated)
        if self.accept(":"):
            conditions = self.condition_list()
            return [Conditional(l, c) for l in literals for c in conditions]
        return literals

    def _body_aggregate_ahead(self) -> bool:
        depth = 0
        for offset in range(0, 64):
            token = self.peek(offset)
            if token.kind == "EOF" or token.text in (".", ",", ";", ":", ":-") and depth == 0:
                return False
            if token.text == "(":
                depth += 1
            elif token.text == ")":
                depth -= 1
            elif depth == 0 and (token.text == "{" or token.kind == "DIRECTIVE"):
                return True
            elif depth == 0 and token.kind == "IDENT" and self.peek(offset + 1).text == "(":
                return False
        return False

    def aggregate(self, negated: bool) -> Aggregate:
        guards = []
        if not (self.tok.kind == "DIRECTIVE" or self.at("{")):
            guards = self.left_guard()
        set_notation = True
        if self.tok.kind == "DIRECTIVE":
            token = self.advance()
            if token.text != "#count":
                self.unsupported(f"aggregate {token.text}", token)
            set_notation = False
        self.expect("{")
        elements: List[AggregateElement] = []
        if not self.at("}"):
            while True:
                elements.extend(self.aggregate_element(set_notation))
                if not self.accept(";"):
                    break
        self.expect("}")
        guards += self.right_guard()
        return Aggregate(elements, guards, negated)

    def aggregate_element(self, set_notation: bool) -> List[AggregateElement]:
        if set_notation:
            literals = self.basic_literal(False) if not self.at("not") else self._negative()
            conditions = self.condition_list() if self.accept(":") else [[]]
            return [AggregateElement((), [l] + c, l) for l in literals for c in conditions]
        tuples: List[List[Term]] = [[]]
        if not self.at(":"):
            tuples = self.term_tuple()
        conditions = self.condition_list() if self.accept(":") else [[]]
        return [AggregateElement(t, c) for t in tuples for c in conditions]

    def _negative(self):
        self.advance()
        return self.basic_literal(True)

    def term_tuple(self) -> List[List[Term]]:
        columns = [self.term()]
        while self.accept(","):
            columns.append(self.term())
        return [list(combo) for combo in it.product(*columns)]

    def condition_list(self) -> List[list]:
        """Comma separated literals after ``:``; stops at ``;`` or the end of the body."""
        parts = []
        while True:
            negated = False
            if self.at("not"):
                self.advance()
                negated = True
            parts.append(self.basic_literal(negated))
            if self.at(","):
                self.advance()
                continue
            break
        return [list(combo) for combo in it.product(*parts)]

    def basic_literal(self, negated: bool) -> list:
        """An atom (possibly strongly negated) or a comparison, with pooled alternatives."""
        start = self.tok
        if self._atom_ahead():
            atoms = self.atom_alternatives()
            if self.tok.kind == "CMP":
                self.fail("expected a term, found an atom", start)
            return [Literal(a, negated) for a in atoms]
        lefts = self.term()
        if self.tok.kind != "CMP":
            self.fail(f"expected a literal, found {self.tok.text or 'end of input'!r}", start)
        op = self.comparison_op()
        rights = self.term()
        if negated:
            op = {"=": "!=", "!=": "=", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}[op]
        return [Comparison(op, l, r) for l in lefts for r in rights]

    def _atom_ahead(self) -> bool:
        """True when the next tokens form an atom rather than the left side of a comparison."""
        offset = 0
        if self.tok.text == "-" and self.peek().kind == "IDENT":
            offset = 1
        token = self.peek(offset)
        if token.kind != "IDENT":
            return False
        end = offset + 1
        if self.peek(end).text == "(":
            depth = 0
            while True:
                t = self.peek(end)
                if t.kind == "EOF":
                    return True
                if t.text == "(":
                    depth += 1
                elif t.text == ")":
                    depth -= 1
                    if depth == 0:
                        end += 1
                        break
                end += 1
        follow = self.peek(end)
        return follow.kind != "CMP" and follow.text not in ("+", "-", "*", "..", "/", "\\")

    def atom_alternatives(self) -> List[Atom]:
        strong = self.accept("-")
        token = self.tok
        if token.kind != "IDENT":
            self.fail(f"expected a predicate name, found {token.text or 'end of input'!r}")
        if token.text == "not":
            self.fail("default negation is not allowed here")
        self.advance()
        name = ("-" if strong else "") + token.text
        if not self.at("("):
            return [Atom(name, ())]
        self.advance()
        if self.accept(")"):
            return [Atom(name, ())]
        alternatives = self.argument_pools()
        self.expect(")")
        return [Atom(name, args) for args in alternatives]

    def argument_pools(self) -> List[List[Term]]:
        """Arguments separated by commas, pooled alternatives separated by semicolons."""
        pools = [self.term_tuple()]
        while self.accept(";"):
            pools.append(self.term_tuple())
        return [args for pool in pools for args in pool]

    # -- terms ---------------------------------------------------------------------------

    def single_term(self, arith_only: bool = False) -> Term:
        token = self.tok
        alternatives = self.additive() if arith_only else self.term()
        if len(alternatives) != 1:
            self.fail("pooling is not allowed here", token)
        return alternatives[0]

    def term(self) -> List[Term]:
        lows = self.additive()
        if self.accept(".."):
            highs = self.additive()
            return [Interval(l, h) for l in lows for h in highs]
        return lows

    def additive(self) -> List[Term]:
        left = self.multiplicative()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            right = self.multiplicative()
            left = [fold(BinOp(op, l, r)) for l in left for r in right]
        return left

    def multiplicative(self) -> List[Term]:
        left = self.unary()
        while True:
            if self.at("*"):
                self.advance()
                right = self.unary()
                left = [fold(BinOp("*", l, r)) for l in left for r in right]
            elif self.at("/") or self.at("\\") or self.at("**"):
                self.unsupported(f"arithmetic operator {self.tok.text}")
            else:
                return left

    def unary(self) -> List[Term]:
        if self.at("-"):
            self.advance()
            return [_negate(t) for t in self.unary()]
        return self.primary()

    def primary(self) -> List[Term]:
        token = self.tok
        if token.kind == "NUMBER":
            self.advance()
            return [Const(int(token.text))]
        if token.kind == "STRING":
            self.advance()
            return [Const(String(_unescape(token.text)))]
        if token.kind == "VARIABLE":
            self.advance()
            return [Var(token.text)]
        if token.kind == "ANONYMOUS":
            self.advance()
            self.fresh += 1
            return [Var(f"_{self.fresh}")]
        if token.kind == "IDENT":
            self.advance()
            if not self.at("("):
                return [Const(Function(token.text))]
            self.advance()
            if self.accept(")"):
                return [Const(Function(token.text))]
            alternatives = self.argument_pools()
            self.expect(")")
            return [make_fn(token.text, args) for args in alternatives]
        if token.text == "(":
            self.advance()
            if self.accept(")"):
                return [Const(Function("", ()))]
            pools = []
            while True:
                columns = [self.term()]
                trailing = False
                while self.accept(","):
                    if self.at(")") or self.at(";"):
                        trailing = True
                        break
                    columns.append(self.term())
                pools.append((columns, trailing))
                if not self.accept(";"):
                    break
            self.expect(")")
            out = []
            for columns, trailing in pools:
                for combo in it.product(*columns):
                    if len(combo) == 1 and not trailing:
                        out.append(combo[0])
                    else:
                        out.append(make_fn("", combo))
            return out
        if token.text == "|":
            self.advance()
            inner = self.additive()
            self.expect("|")
            return [fold(UnaryOp("abs", t)) for t in inner]
        if token.text == "@":
            self.unsupported("@-function term")
        if token.kind == "DIRECTIVE":
            self.unsupported(f"term {token.text}")
        self.fail(f"unexpected {token.text or 'end of input'!r}")


def _negate(term: Term) -> Term:
    if isinstance(term, Const) and isinstance(term.value, int):
        return Const(-term.value)
    return fold(UnaryOp("-", term))


# -- statement assembly -----------------------------------------------------------------

_projection_ids = it.count(1)


class _Rewriter:
    """Replaces anonymous variables under negation by auxiliary projection predicates."""

    def __init__(self) -> None:
        self.extra: List[Rule] = []

    def literal(self, lit, positive_projection: bool = False):
        if not isinstance(lit, Literal):
            return lit
        anonymous = [v for v in lit.atom.variables() if v.startswith("_") and v[1:].isdigit()]
        if not anonymous or not (lit.negated or positive_projection):
            return lit
        named = sorted(v for v in lit.atom.variables() if v not in anonymous)
        name = f"#proj{next(_projection_ids)}"
        head = Atom(name, [Var(v) for v in named])
        self.extra.append(Rule(head, [Literal(lit.atom)]))
        return Literal(head, lit.negated)

    def conditions(self, condition):
        return [self.literal(c) for c in condition]

    def element(self, item):
        if isinstance(item, Literal):
            return self.literal(item)
        if isinstance(item, Conditional):
            return Conditional(self.literal(item.head, positive_projection=True), self.conditions(item.condition))
        if isinstance(item, Aggregate):
            elements = []
            for e in item.elements:
                condition = self.conditions(e.condition)
                literal = condition[0] if e.literal is not None else None
                elements.append(AggregateElement(e.terms, condition, literal))
            return Aggregate(elements, item.guards, item.negated)
        return item


def _assemble(parsed: _Statement, index: int, name: str) -> List[object]:
    out = []
    body_options = list(it.product(*parsed.body)) if parsed.body else [()]
    if parsed.weak is not None:
        heads = [None]
    elif parsed.head is None:
        heads = [None]
    elif parsed.head[0] == "choice":
        heads = [parsed.head[1]]
    else:
        disjunct_options = list(it.product(*parsed.head[1]))
        heads = [combo[0] if len(combo) == 1 else Disjunction(combo) for combo in disjunct_options]
    for head in heads:
        for body in body_options:
            rewriter = _Rewriter()
            body = [rewriter.element(item) for item in body]
            rule_head = head
            if isinstance(head, Choice):
                rule_head = Choice(
                    [ChoiceElement(e.atom, rewriter.conditions(e.condition)) for e in head.elements],
                    head.guards,
                )
            if parsed.weak is not None:
                weight, level, terms = parsed.weak
                statement = WeakConstraint(body, weight, level, terms, index, parsed.line)
            else:
                statement = Rule(rule_head, body, index, parsed.line)
            for extra in rewriter.extra:
                out.append(Rule(extra.head, extra.body, index, parsed.line))
            out.append(statement)
    for statement in out:
        variable = check_safety(statement)
        if variable is not None:
            raise SafetyError(index, variable, repr(statement), name, parsed.line)
    return out


def parse_program(text: str, name: str = "<program>") -> Program:
    """Parse source text into a Program; raises ParseError subclasses on bad input."""
    parser = _Parser(text, name)
    parsed, consts = parser.program()
    statements = []
    for index, statement in enumerate(parsed, start=1):
        statements.extend(_assemble(statement, index, name))
    return Program(statements, consts, name, len(parsed))


def parse_atom(text: str) -> Function:
    """Parse one ground atom such as ``answer(top_right)`` or ``-holds_at(f,3)``."""
    parser = _Parser(text, "<atom>")
    atoms = parser.atom_alternatives()
    if parser.tok.kind != "EOF" or len(atoms) != 1 or atoms[0]._ground is None:
        raise ParseError(f"not a ground atom: {text!r}", 1, 1, "<atom>")
    return atoms[0]._ground
