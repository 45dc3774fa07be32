"""Parser/evaluator for the small symbol-expression grammar.

Grammar (precedence low to high; ^ is right-associative):

    expr   := term  (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | '(' expr ')' | FUNC '(' expr ')' | VARIABLE

    VARIABLE := x1..xn | nu1..nun | '|nu|' | lambda
    FUNC     := exp | log | abs

``lambda`` is the oscillator eigenvalue 2|nu| + n.  Unknown identifiers and
out-of-range variable indices are rejected at parse time with the column of
the offending token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ExpressionError

_FUNCTIONS = {"exp": np.exp, "log": np.log, "abs": np.abs}

_TOKEN_RE = re.compile(
    r"""
    (?P<num>\d+(\.\d*)?([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?)
  | (?P<absnu>\|\s*nu\s*\|)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
  | (?P<ws>\s+)
""",
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num | absnu | ident | op | end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over the token list; n fixes the variable range."""

    def __init__(self, text: str, n: int):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n = n

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.cur
        self.i += 1
        return tok

    def expect_op(self, op: str):
        if self.cur.kind != "op" or self.cur.text != op:
            raise ExpressionError(f"expected {op!r}, found {self.cur.text or 'end'!r}", self.cur.pos)
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.cur.kind != "end":
            raise ExpressionError(f"unexpected trailing {self.cur.text!r}", self.cur.pos)
        return node

    def expr(self):
        node = self.term()
        while self.cur.kind == "op" and self.cur.text in "+-":
            op = self.advance().text
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.cur.kind == "op" and self.cur.text in "*/":
            op = self.advance().text
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        if self.cur.kind == "op" and self.cur.text == "-":
            self.advance()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.cur.kind == "op" and self.cur.text == "^":
            self.advance()
            return ("bin", "^", base, self.unary())
        return base

    def atom(self):
        tok = self.cur
        if tok.kind == "num":
            self.advance()
            return ("num", float(tok.text))
        if tok.kind == "absnu":
            self.advance()
            return ("absnu",)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return ("call", name, arg)
            if name == "lambda":
                return ("lambda",)
            m = re.fullmatch(r"(x|nu)([0-9]+)", name)
            if m:
                j = int(m.group(2))
                if not 1 <= j <= self.n:
                    raise ExpressionError(
                        f"variable {name!r} out of range for dimension n={self.n}", tok.pos
                    )
                return (m.group(1), j)
            raise ExpressionError(f"unknown identifier {name!r}", tok.pos)
        raise ExpressionError(f"expected a value, found {tok.text or 'end'!r}", tok.pos)


def _uses_position(node) -> bool:
    head = node[0]
    if head == "x":
        return True
    if head in ("num", "nu", "absnu", "lambda"):
        return False
    if head == "neg":
        return _uses_position(node[1])
    if head == "call":
        return _uses_position(node[2])
    return _uses_position(node[2]) or _uses_position(node[3])


def _evaluate(node, points, nu, n: int):
    head = node[0]
    if head == "num":
        return node[1]
    if head == "x":
        return points[:, node[1] - 1]
    if head == "nu":
        return float(nu[node[1] - 1])
    if head == "absnu":
        return float(sum(nu))
    if head == "lambda":
        return float(2 * sum(nu) + n)
    if head == "neg":
        return -_evaluate(node[1], points, nu, n)
    if head == "call":
        return _FUNCTIONS[node[1]](_evaluate(node[2], points, nu, n))
    _, op, a, b = node
    lhs = _evaluate(a, points, nu, n)
    rhs = _evaluate(b, points, nu, n)
    if op == "+":
        return lhs + rhs
    if op == "-":
        return lhs - rhs
    if op == "*":
        return lhs * rhs
    if op == "/":
        return lhs / rhs
    return np.power(lhs, rhs)


def parse_symbol_expression(text: str, n: int):
    """Compile an expression to an evaluator (points, nu) -> values.

    Returns (evaluator, uses_position): the evaluator takes an (M, n) point
    array (or None for x-independent expressions) and a multi-index, and
    returns an (M,) array or a scalar; uses_position tells whether any x_j
    occurs, i.e. whether the symbol is a genuine pseudo-multiplier.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    ast = _Parser(text, n).parse()
    uses_x = _uses_position(ast)

    def evaluator(points, nu):
        if uses_x and points is None:
            raise ValueError("expression depends on x; evaluation points are required")
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = _evaluate(ast, points, tuple(nu), n)
        if points is not None:
            return np.broadcast_to(np.asarray(val, dtype=float), (points.shape[0],)).copy()
        return float(val)

    return evaluator, uses_x
