"""Expressions for a holomorphic family of elliptic-curve moduli ``tau(b)``.

Grammar (EBNF)::

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = ("-" | "+") unary | power ;
    power    = atom [ "^" exponent ] ;
    exponent = [ "-" ] integer | "(" [ "-" ] integer ")" ;
    atom     = number [ "i" ] | "i" | "b" | "exp" "(" expr ")" | "(" expr ")" ;
    number   = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;

``2i`` is the imaginary literal 2i; juxtaposition is otherwise not
multiplication.  ``-b^2`` parses as ``-(b^2)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from cmfib.errors import TauSyntaxError


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "TauExpr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "TauExpr"
    right: "TauExpr"


@dataclass(frozen=True)
class Pow:
    base: "TauExpr"
    exponent: int


@dataclass(frozen=True)
class Exp:
    arg: "TauExpr"


TauExpr = Union[Const, Var, Neg, BinOp, Pow, Exp]

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<name>[A-Za-z_]\w*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise TauSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok=None):
        tok = tok or self.peek()
        what = "end of input" if tok[0] == "end" else repr(tok[1])
        raise TauSyntaxError(f"{msg}, found {what}", _byte_offset(self.text, tok[2]))

    def expect(self, value: str):
        tok = self.peek()
        if tok[1] != value or tok[0] not in ("op", "name"):
            self.error(f"expected {value!r}")
        return self.advance()

    def parse(self) -> TauExpr:
        node = self.expr()
        if self.peek()[0] != "end":
            self.error("unexpected token")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        if tok[0] == "op" and tok[1] == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.advance()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        paren = self.peek()[1] == "("
        if paren:
            self.advance()
        sign = 1
        if self.peek()[1] == "-":
            self.advance()
            sign = -1
        tok = self.peek()
        if tok[0] != "num" or not tok[1].isdigit():
            self.error("exponent must be an integer literal")
        self.advance()
        if paren:
            self.expect(")")
        return sign * int(tok[1])

    def atom(self):
        tok = self.peek()
        kind, text, _ = tok
        if kind == "num":
            self.advance()
            if text.endswith("i"):
                return Const(complex(0.0, float(text[:-1])))
            return Const(complex(float(text), 0.0))
        if kind == "name":
            self.advance()
            if text == "i":
                return Const(1j)
            if text == "b":
                return Var()
            if text == "exp":
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Exp(arg)
            self.error("unknown name", tok)
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.error("expected a number, 'i', 'b', 'exp(' or '('")


def parse_tau(text: str) -> TauExpr:
    """Parse a modulus expression in the variable ``b``.

    Raises :class:`TauSyntaxError` carrying the byte offset of the first
    offending token.
    """
    return _Parser(text).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_real(x: float) -> str:
    return repr(float(x))


def pretty(expr: TauExpr) -> str:
    """Render ``expr`` so that ``parse_tau(pretty(e)) == e`` for parsed trees."""
    return _pretty(expr, 0)


def _pretty(e: TauExpr, ctx: int) -> str:
    if isinstance(e, Const):
        z = e.value
        if z.imag == 0 and z.real >= 0:
            s, prec = _fmt_real(z.real), 5
        elif z.real == 0 and z.imag >= 0:
            s, prec = _fmt_real(z.imag) + "i", 5
        else:
            # not produced by the parser; keep it readable and parenthesised
            s, prec = f"({_fmt_real(z.real)} + {_fmt_real(z.imag)}i)", 5
    elif isinstance(e, Var):
        s, prec = "b", 5
    elif isinstance(e, Exp):
        s, prec = f"exp({_pretty(e.arg, 0)})", 5
    elif isinstance(e, Pow):
        exp = f"{e.exponent}" if e.exponent >= 0 else f"({e.exponent})"
        s, prec = f"{_pretty(e.base, 5)}^{exp}", 4
    elif isinstance(e, Neg):
        s, prec = f"-{_pretty(e.operand, 3)}", 3
    elif isinstance(e, BinOp):
        p = _PREC[e.op]
        # left-associative: the right operand needs strictly higher precedence
        s, prec = f"{_pretty(e.left, p)} {e.op} {_pretty(e.right, p + 1)}", p
    else:
        raise TypeError(f"not a TauExpr node: {e!r}")
    return f"({s})" if prec < ctx else s


def evaluate(expr: TauExpr, b):
    """Evaluate at complex ``b`` (scalar or array); returns ``(tau, dtau/db)``.

    The derivative is carried forward alongside the value, so it is exact
    up to rounding.
    """
    b = np.asarray(b, dtype=complex)
    with np.errstate(all="ignore"):
        return _eval(expr, b)


def _eval(e: TauExpr, b):
    if isinstance(e, Const):
        return np.full(b.shape, e.value, dtype=complex), np.zeros(b.shape, dtype=complex)
    if isinstance(e, Var):
        return b.copy(), np.ones(b.shape, dtype=complex)
    if isinstance(e, Neg):
        v, d = _eval(e.operand, b)
        return -v, -d
    if isinstance(e, Exp):
        v, d = _eval(e.arg, b)
        ev = np.exp(v)
        return ev, ev * d
    if isinstance(e, Pow):
        v, d = _eval(e.base, b)
        k = e.exponent
        if k == 0:
            return np.ones(b.shape, dtype=complex), np.zeros(b.shape, dtype=complex)
        return v**k, k * v ** (k - 1) * d
    if isinstance(e, BinOp):
        lv, ld = _eval(e.left, b)
        rv, rd = _eval(e.right, b)
        if e.op == "+":
            return lv + rv, ld + rd
        if e.op == "-":
            return lv - rv, ld - rd
        if e.op == "*":
            return lv * rv, ld * rv + lv * rd
        if e.op == "/":
            return lv / rv, (ld * rv - lv * rd) / (rv * rv)
    raise TypeError(f"not a TauExpr node: {e!r}")
