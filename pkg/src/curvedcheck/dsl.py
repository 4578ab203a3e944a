"""Metric DSL: parsing and serialization.

Grammar (statements separated by ``;`` or newlines, ``#`` starts a comment)::

    program   := stmt*
    stmt      := "dim" "=" INT | "g" "[" INT "]" "[" INT "]" "=" expr
    expr      := term (("+" | "-") term)*
    term      := unary (("*" | "/") unary)*
    unary     := ("+" | "-") unary | power
    power     := atom ("^" exponent)?
    exponent  := INT | "(" ["-"|"+"] INT ")" | "-" INT
    atom      := NUMBER | "x" INT | "pi" | FUNC "(" expr ")" | "(" expr ")" | "g[i][j]"

Variables are ``x0 .. x{dim-1}``; FUNC is one of sin cos exp log sqrt.
Unset off-diagonal entries default to 0; assigning ``g[i][j]`` also sets
``g[j][i]``. Assigning both with different expressions is an error.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from . import expr as ex
from .expr import Expr


class DSLError(ValueError):
    """Parse or validation error with 1-based source position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line else ""
        super().__init__(f"{message}{where}")


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()\[\];=,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            toks.append(_Tok("sep", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind != "ws":
            t = m.group()
            toks.append(_Tok("sep" if t == ";" else kind, t, line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, len(text) - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, dim: int | None = None, grid=None):
        self.toks = _tokenize(text)
        self.i = 0
        self.dim = dim
        self.grid = grid if grid is not None else {}

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise DSLError(msg, tok.line, tok.col)

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        return self.next()

    def expect_int(self) -> int:
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            self.error(f"expected an integer, found {t.text or 'end of input'!r}")
        self.next()
        return int(t.text)

    # statements
    def program(self):
        assigned: dict[tuple[int, int], Expr] = {}
        early = None
        while self.tok.kind != "eof":
            if self.tok.kind == "sep":
                self.next()
                continue
            t = self.tok
            if t.kind == "name" and t.text == "dim":
                self.next()
                self.expect("=")
                if self.dim is not None:
                    self.error("dim given twice", t)
                self.dim = self.expect_int()
            elif t.kind == "name" and t.text == "g":
                if self.dim is None and early is None:
                    early = t  # reported after the syntax pass
                i, j = self.index_pair()
                self.expect("=")
                e = self.expr()
                for key in ((i, j), (j, i)):
                    prev = assigned.get(key)
                    if prev is not None and prev is not e:
                        self.error(f"g[{i}][{j}] conflicts with an earlier assignment (metric must be symmetric)", t)
                assigned[(i, j)] = assigned[(j, i)] = e
                self.grid[(i, j)] = self.grid[(j, i)] = e
            else:
                self.error(f"unknown statement starting with {t.text!r}")
            if self.tok.kind not in ("sep", "eof"):
                self.error(f"expected ';' or newline, found {self.tok.text!r}")
        if early is not None:
            self.error("dim must be declared before any g[i][j]", early)
        if self.dim is None:
            raise DSLError("missing dim declaration")
        return self.dim, self.grid

    def index_pair(self) -> tuple[int, int]:
        t = self.next()  # 'g'
        self.expect("[")
        i = self.expect_int()
        self.expect("]")
        self.expect("[")
        j = self.expect_int()
        self.expect("]")
        if self.dim is not None and not (0 <= i < self.dim and 0 <= j < self.dim):
            self.error(f"index g[{i}][{j}] out of range for dim={self.dim}", t)
        return i, j

    # expressions
    def expr(self) -> Expr:
        e = self.term()
        while self.tok.text in ("+", "-"):
            op = self.next().text
            rhs = self.term()
            e = ex.add(e, rhs) if op == "+" else ex.sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.next()
            rhs = self.unary()
            if op.text == "*":
                e = ex.mul(e, rhs)
            else:
                try:
                    e = ex.div(e, rhs)
                except ZeroDivisionError:
                    self.error("division by zero", op)
        return e

    def unary(self) -> Expr:
        if self.tok.text == "-":
            self.next()
            return ex.neg(self.unary())
        if self.tok.text == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.text != "^":
            return base
        caret = self.next()
        k = self.exponent()
        try:
            return ex.power(base, k)
        except ZeroDivisionError:
            self.error("zero raised to a negative power", caret)

    def exponent(self) -> int:
        if self.tok.text == "(":
            self.next()
            sign = 1
            if self.tok.text in ("-", "+"):
                sign = -1 if self.next().text == "-" else 1
            k = sign * self.expect_int()
            self.expect(")")
            return k
        if self.tok.text == "-":
            self.next()
            return -self.expect_int()
        return self.expect_int()

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.next()
            return ex.const(float(t.text))
        if t.text == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "name":
            name = t.text
            if name in ex.FUNCTIONS:
                self.next()
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                try:
                    return ex.func(name, arg)
                except (ValueError, OverflowError):
                    self.error(f"{name} of a constant is undefined", t)
            if name == "pi":
                self.next()
                return ex.const(math.pi)
            if name == "g" and self.toks[self.i + 1].text == "[":
                i, j = self.index_pair()
                if (i, j) not in self.grid:
                    self.error(f"g[{i}][{j}] used before assignment", t)
                return self.grid[(i, j)]
            m = re.fullmatch(r"x(\d+)", name)
            if m:
                k = int(m.group(1))
                if self.dim is not None and k >= self.dim:
                    self.error(f"variable {name} out of range for dim={self.dim}", t)
                self.next()
                return ex.var(k)
            self.error(f"unknown identifier {name!r}", t)
        self.error(f"unexpected {t.text or 'end of input'!r}")


def parse_metric_dsl(text: str) -> tuple[int, list[list[Expr]]]:
    """Parse a metric program into ``(dim, grid)`` with a symmetric grid of expressions."""
    dim, assigned = _Parser(text).program()
    if not 1 <= dim <= 16:
        raise DSLError(f"dim={dim} is out of range")
    grid = [[assigned.get((i, j), ex.ZERO) for j in range(dim)] for i in range(dim)]
    return dim, grid


def parse_expression(text: str, dim: int | None = None, names: dict[str, int] | None = None) -> Expr:
    """Parse a single scalar expression over ``x0..x{dim-1}``.

    ``names`` maps extra identifiers (e.g. ``{"t": 0}``) onto variable indices.
    """
    if names:
        for name, idx in names.items():
            text = re.sub(rf"\b{re.escape(name)}\b", f"x{idx}", text)
    p = _Parser(text, dim=dim)
    while p.tok.kind == "sep":
        p.next()
    e = p.expr()
    while p.tok.kind == "sep":
        p.next()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after expression")
    return e


def metric_to_dsl(grid: list[list[Expr]]) -> str:
    """Serialize a component grid; parses back to identical interned expressions."""
    n = len(grid)
    lines = [f"dim={n};"]
    for i in range(n):
        for j in range(i, n):
            e = grid[i][j]
            if e is ex.ZERO:
                continue
            lines.append(f"g[{i}][{j}]={ex.to_text(e)};")
    return "\n".join(lines) + "\n"
