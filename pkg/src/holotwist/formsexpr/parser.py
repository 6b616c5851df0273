"""Recursive-descent parser for the scalar expression language.

Grammar (highest precedence first):

    power   := atom ['^' unary]          (right associative)
    unary   := '-' unary | power
    term    := unary (('*' | '/') unary)*
    expr    := term (('+' | '-') term)*
    atom    := NUMBER | IDENT | IDENT '(' expr {',' expr} ')' | '(' expr ')'

Identifiers are either function names (sin cos exp log atan2 sqrt), the
constants `i` and `pi`, or coordinate names supplied by the chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ExprSyntaxError, UnknownIdentifier

FUNCTIONS = {"sin": 1, "cos": 1, "exp": 1, "log": 1, "sqrt": 1, "atan2": 2}
CONSTANTS = {"i": 1j, "pi": math.pi}


class Expr:
    """Base class for AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Const(Expr):
    name: str


@dataclass(frozen=True)
class Coord(Expr):
    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    arg: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    args: tuple


@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | lparen | rparen | comma | end
    text: str
    line: int
    column: int


def _tokenize(source):
    tokens = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start_col = col
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (source[j].isdigit() or (source[j] == "." and not seen_dot)):
                if source[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            tokens.append(_Token("num", text, line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, line, start_col))
        elif ch == "(":
            tokens.append(_Token("lparen", ch, line, start_col))
        elif ch == ")":
            tokens.append(_Token("rparen", ch, line, start_col))
        elif ch == ",":
            tokens.append(_Token("comma", ch, line, start_col))
        else:
            raise ExprSyntaxError(f"unexpected character {ch!r}", line, start_col)
        i += 1
        col += 1
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens, coords):
        self.tokens = tokens
        self.pos = 0
        self.coords = coords

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message):
        tok = self.peek()
        raise ExprSyntaxError(message, tok.line, tok.column)

    def expect(self, kind, what):
        tok = self.peek()
        if tok.kind != kind:
            self.fail(f"expected {what}")
        return self.advance()

    def parse_expr(self):
        node = self.parse_term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = Bin(op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = Bin(op, node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return Unary("-", self.parse_unary())
        return self.parse_power()

    def parse_power(self):
        node = self.parse_atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            return Bin("^", node, self.parse_unary())
        return node

    def parse_atom(self):
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "lparen":
            self.advance()
            node = self.parse_expr()
            self.expect("rparen", "')'")
            return node
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if self.peek().kind == "lparen":
                if name not in FUNCTIONS:
                    raise UnknownIdentifier(
                        f"unknown function {name!r} at line {tok.line}, column {tok.column}")
                self.advance()
                args = [self.parse_expr()]
                while self.peek().kind == "comma":
                    self.advance()
                    args.append(self.parse_expr())
                self.expect("rparen", "')'")
                if len(args) != FUNCTIONS[name]:
                    raise ExprSyntaxError(
                        f"{name} takes {FUNCTIONS[name]} argument(s)",
                        tok.line, tok.column)
                return Call(name, tuple(args))
            if name in CONSTANTS:
                return Const(name)
            if self.coords is not None and name not in self.coords:
                raise UnknownIdentifier(
                    f"unknown identifier {name!r} at line {tok.line}, column {tok.column}")
            return Coord(name)
        self.fail("expected a number, identifier or '('")


def parse(source, coords=None) -> Expr:
    """Parse expression text; coords, when given, restricts identifiers."""
    parser = _Parser(_tokenize(source), coords)
    node = parser.parse_expr()
    if parser.peek().kind != "end":
        parser.fail("unexpected trailing input")
    return node


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _src(node, parent_prec):
    if isinstance(node, Num):
        v = node.value
        text = repr(int(v)) if v == int(v) and abs(v) < 1e15 else repr(v)
        return text
    if isinstance(node, (Const, Coord)):
        return node.name
    if isinstance(node, Unary):
        inner = _src(node.arg, _PREC["neg"])
        out = f"-{inner}"
        return f"({out})" if parent_prec > _PREC["neg"] else out
    if isinstance(node, Bin):
        p = _PREC[node.op]
        # left operand of ^ must re-parenthesize at equal precedence
        left = _src(node.left, p + 1 if node.op == "^" else p)
        right = _src(node.right, p + 1 if node.op in "+-*/" else p)
        out = f"{left}{node.op}{right}"
        return f"({out})" if parent_prec > p else out
    if isinstance(node, Call):
        args = ", ".join(_src(a, 0) for a in node.args)
        return f"{node.fn}({args})"
    raise TypeError(f"not an Expr node: {node!r}")


def to_source(node: Expr) -> str:
    """Render an AST back to parseable text; parse(to_source(e)) == e."""
    return _src(node, 0)
