"""Arithmetic expressions in one variable ``t``.

Small recursive-descent parser so parameter functions can be supplied as
text (CLI flags, config files) instead of code.  Grammar::

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | 't' | name '(' expr ')' | 'pi' | 'e' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so
``-2^2 == -4`` and ``2^3^2 == 512``.  Supported functions: exp, sin,
cos, abs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

__all__ = [
    "Expr", "Num", "Var", "Const", "Neg", "BinOp", "Call",
    "ParseError", "EvalError", "parse", "eval_expr", "format_expr",
]

FUNCTIONS = {"exp": math.exp, "sin": math.sin, "cos": math.cos, "abs": abs}
CONSTANTS = {"pi": math.pi, "e": math.e}


class ParseError(ValueError):
    """Syntax error, carrying the offending position and what was expected."""

    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        detail = f"{message} at position {position}"
        if expected:
            detail += " (expected " + " or ".join(expected) + ")"
        super().__init__(detail)
        self.position = position
        self.expected = expected


class EvalError(ValueError):
    """Domain error during evaluation (division by zero, invalid power)."""

    def __init__(self, message: str, subexpr: "Expr"):
        super().__init__(f"{message} in '{format_expr(subexpr)}'")
        self.subexpr = subexpr


class Expr:
    """Base class for AST nodes; subclasses are frozen dataclasses."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Const(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    name: str
    arg: Expr


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}",
                             len(text) - len(stripped))
        kind = match.lastgroup
        tokens.append((kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self):
        return self.tokens[self.index]

    def advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect_op(self, symbol: str):
        kind, value, pos = self.peek()
        if kind == "op" and value == symbol:
            return self.advance()
        raise ParseError(f"got {value!r}" if value else "unexpected end of input",
                         pos, expected=(repr(symbol),))

    def parse(self) -> Expr:
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {value!r}", pos,
                             expected=("operator", "end of input"))
        return node

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                node = BinOp(value, node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                node = BinOp(value, node, self.unary())
            else:
                return node

    def unary(self) -> Expr:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            return BinOp("^", node, self.unary())
        return node

    def atom(self) -> Expr:
        kind, value, pos = self.advance()
        if kind == "num":
            return Num(float(value))
        if kind == "name":
            if value == "t":
                return Var()
            if value in CONSTANTS:
                return Const(value)
            if value in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(value, arg)
            raise ParseError(f"unknown name {value!r}", pos,
                             expected=("t", "pi", "e", *sorted(FUNCTIONS)))
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"got {value!r}" if value else "unexpected end of input",
                         pos, expected=("number", "name", "'('"))


def parse(text: str) -> Expr:
    """Parse ``text`` into an AST; raises ParseError with position on failure."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0, expected=("number", "name", "'('"))
    return _Parser(text).parse()


def _pow(base: float, exponent: float, node: Expr) -> float:
    if base == 0.0 and exponent < 0.0:
        raise EvalError("zero raised to a negative power", node)
    if base < 0.0 and exponent != round(exponent):
        raise EvalError("fractional power of a negative base", node)
    return base ** exponent


def eval_expr(expr: Expr, t: float) -> float:
    """Evaluate ``expr`` at the given ``t``; domain errors raise EvalError."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        return float(t)
    if isinstance(expr, Const):
        return CONSTANTS[expr.name]
    if isinstance(expr, Neg):
        return -eval_expr(expr.operand, t)
    if isinstance(expr, Call):
        value = FUNCTIONS[expr.name](eval_expr(expr.arg, t))
        return float(value)
    if isinstance(expr, BinOp):
        left = eval_expr(expr.left, t)
        right = eval_expr(expr.right, t)
        if expr.op == "+":
            result = left + right
        elif expr.op == "-":
            result = left - right
        elif expr.op == "*":
            result = left * right
        elif expr.op == "/":
            if right == 0.0:
                raise EvalError("division by zero", expr)
            result = left / right
        else:
            result = _pow(left, right, expr)
        if not math.isfinite(result):
            raise EvalError("non-finite result", expr)
        return result
    raise TypeError(f"not an Expr node: {expr!r}")


# Precedence levels used by the printer; parenthesise a child whenever its
# level is too low for the slot it occupies in the grammar.
_ADD, _MUL, _UNARY, _POW, _ATOM = 1, 2, 3, 4, 5


def _level(expr: Expr) -> int:
    if isinstance(expr, (Num, Var, Const, Call)):
        return _ATOM
    if isinstance(expr, Neg):
        return _UNARY
    if isinstance(expr, BinOp):
        return {"+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "^": _POW}[expr.op]
    raise TypeError(f"not an Expr node: {expr!r}")


def _wrap(expr: Expr, minimum: int) -> str:
    text = format_expr(expr)
    return f"({text})" if _level(expr) < minimum else text


def format_expr(expr: Expr) -> str:
    """Canonical text with minimal parentheses; parse(format_expr(x)) == x."""
    if isinstance(expr, Num):
        value = expr.value
        return str(int(value)) if value == int(value) and abs(value) < 1e16 else repr(value)
    if isinstance(expr, Var):
        return "t"
    if isinstance(expr, Const):
        return expr.name
    if isinstance(expr, Call):
        return f"{expr.name}({format_expr(expr.arg)})"
    if isinstance(expr, Neg):
        return "-" + _wrap(expr.operand, _UNARY)
    if isinstance(expr, BinOp):
        if expr.op in "+-":
            # left-associative: right child of equal level needs parentheses
            return f"{_wrap(expr.left, _ADD)} {expr.op} {_wrap(expr.right, _ADD + 1)}"
        if expr.op in "*/":
            return f"{_wrap(expr.left, _MUL)}{expr.op}{_wrap(expr.right, _MUL + 1)}"
        # '^': right-associative, base must be an atom, exponent a unary
        return f"{_wrap(expr.left, _ATOM)}^{_wrap(expr.right, _UNARY)}"
    raise TypeError(f"not an Expr node: {expr!r}")
