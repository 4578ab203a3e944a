"""Hash-consed expression trees with exact symbolic differentiation.

Nodes are interned: structurally identical expressions are the same object,
so derivative towers share subexpressions instead of growing as trees.
Sums and products are flattened, constants folded, like terms and like
powers collected. That is enough simplification to keep third derivatives
of rational/trig metric components small.
"""

from __future__ import annotations

import itertools
import math
import weakref
from typing import Iterable, Sequence

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")

_intern: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()
_uid = itertools.count()


class Expr:
    """Immutable expression node. Build with the module constructors, not directly."""

    __slots__ = ("op", "args", "value", "uid", "_dcache", "__weakref__")

    op: str
    args: tuple
    value: float | int | str | None

    def __repr__(self) -> str:
        return f"Expr({to_text(self)})"

    # operator sugar, used heavily by the registry
    def __add__(self, other):
        return add(self, wrap(other))

    def __radd__(self, other):
        return add(wrap(other), self)

    def __sub__(self, other):
        return add(self, neg(wrap(other)))

    def __rsub__(self, other):
        return add(wrap(other), neg(self))

    def __mul__(self, other):
        return mul(self, wrap(other))

    def __rmul__(self, other):
        return mul(wrap(other), self)

    def __truediv__(self, other):
        return div(self, wrap(other))

    def __rtruediv__(self, other):
        return div(wrap(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k):
        if isinstance(k, Expr):
            if k.op != "const" or float(k.value) != int(k.value):
                raise ValueError("only integer exponents are supported")
            k = int(k.value)
        return power(self, k)

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    def diff(self, var: int) -> "Expr":
        cached = self._dcache.get(var)
        if cached is None:
            cached = _diff(self, var)
            self._dcache[var] = cached
        return cached


def _make(op: str, args: tuple, value=None) -> Expr:
    key = (op, tuple(a.uid for a in args), value)
    node = _intern.get(key)
    if node is not None:
        return node
    node = object.__new__(Expr)
    node.op = op
    node.args = args
    node.value = value
    node.uid = next(_uid)
    node._dcache = {}
    _intern[key] = node
    return node


def const(v: float) -> Expr:
    v = float(v)
    if v == 0.0:
        v = 0.0  # fold -0.0
    return _make("const", (), v)


def var(i: int) -> Expr:
    return _make("var", (), int(i))


ZERO = const(0.0)
ONE = const(1.0)


def wrap(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return const(x)


def _split_coef(e: Expr) -> tuple[float, Expr]:
    if e.op == "const":
        return e.value, ONE
    if e.op == "mul" and e.args[0].op == "const":
        rest = e.args[1:]
        return e.args[0].value, rest[0] if len(rest) == 1 else _make("mul", rest)
    return 1.0, e


def add(*terms: Expr) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        if t.op == "add":
            flat.extend(t.args)
        else:
            flat.append(t)
    total = 0.0
    coefs: dict[int, float] = {}
    bases: dict[int, Expr] = {}
    for t in flat:
        c, rest = _split_coef(t)
        if rest is ONE:
            total += c
            continue
        coefs[rest.uid] = coefs.get(rest.uid, 0.0) + c
        bases[rest.uid] = rest
    out = []
    for uid in sorted(coefs):
        c = coefs[uid]
        if c == 0.0:
            continue
        out.append(bases[uid] if c == 1.0 else mul(const(c), bases[uid]))
    if total != 0.0:
        out.insert(0, const(total))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return _make("add", tuple(out))


def mul(*factors: Expr) -> Expr:
    flat: list[Expr] = []
    for f in factors:
        if f.op == "mul":
            flat.extend(f.args)
        else:
            flat.append(f)
    coef = 1.0
    exps: dict[int, int] = {}
    bases: dict[int, Expr] = {}
    for f in flat:
        if f.op == "const":
            coef *= f.value
            continue
        if f.op == "pow":
            b, k = f.args[0], f.value
        else:
            b, k = f, 1
        exps[b.uid] = exps.get(b.uid, 0) + k
        bases[b.uid] = b
    if coef == 0.0:
        return ZERO
    out = []
    for uid in sorted(exps):
        k = exps[uid]
        if k == 0:
            continue
        p = power(bases[uid], k)
        if p.op == "const":
            coef *= p.value
        else:
            out.append(p)
    if not out:
        return const(coef)
    if coef != 1.0:
        out.insert(0, const(coef))
    if len(out) == 1:
        return out[0]
    return _make("mul", tuple(out))


def neg(e: Expr) -> Expr:
    return mul(const(-1.0), e)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def div(a: Expr, b: Expr) -> Expr:
    if b.op == "const":
        if b.value == 0.0:
            raise ZeroDivisionError("division by constant zero")
        return mul(const(1.0 / b.value), a)
    return mul(a, power(b, -1))


def power(b: Expr, k: int) -> Expr:
    if int(k) != k:
        raise ValueError("only integer exponents are supported")
    k = int(k)
    if k == 0:
        return ONE
    if k == 1:
        return b
    if b.op == "const":
        if b.value == 0.0 and k < 0:
            raise ZeroDivisionError("zero raised to a negative power")
        return const(b.value ** k)
    if b.op == "pow":
        return power(b.args[0], b.value * k)
    return _make("pow", (b,), k)


def func(name: str, a: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    if a.op == "const":
        return const(_apply(name, a.value))
    return _make(name, (a,))


def sin(a):
    return func("sin", wrap(a))


def cos(a):
    return func("cos", wrap(a))


def exp(a):
    return func("exp", wrap(a))


def log(a):
    return func("log", wrap(a))


def sqrt(a):
    return func("sqrt", wrap(a))


def _apply(name: str, v: float) -> float:
    return getattr(math, name)(v)


def _diff(e: Expr, i: int) -> Expr:
    op = e.op
    if op == "const":
        return ZERO
    if op == "var":
        return ONE if e.value == i else ZERO
    if op == "add":
        return add(*(a.diff(i) for a in e.args))
    if op == "mul":
        terms = []
        for j, a in enumerate(e.args):
            da = a.diff(i)
            if da is ZERO:
                continue
            terms.append(mul(da, *e.args[:j], *e.args[j + 1:]))
        return add(*terms) if terms else ZERO
    a = e.args[0]
    da = a.diff(i)
    if da is ZERO:
        return ZERO
    if op == "pow":
        return mul(const(e.value), power(a, e.value - 1), da)
    if op == "sin":
        return mul(func("cos", a), da)
    if op == "cos":
        return mul(const(-1.0), func("sin", a), da)
    if op == "exp":
        return mul(e, da)
    if op == "log":
        return mul(da, power(a, -1))
    if op == "sqrt":
        return mul(const(0.5), da, power(e, -1))
    raise ValueError(f"cannot differentiate op {op!r}")


def derivative(e: Expr, alpha: Sequence[int]) -> Expr:
    """Mixed partial along the multi-index ``alpha`` (applied in sorted order)."""
    for i in sorted(alpha):
        e = e.diff(i)
    return e


def free_vars(e: Expr) -> set[int]:
    seen: set[int] = set()
    out: set[int] = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if n.uid in seen:
            continue
        seen.add(n.uid)
        if n.op == "var":
            out.add(n.value)
        stack.extend(n.args)
    return out


def evaluate(e: Expr, x: Sequence[float]) -> float:
    """Reference evaluator (memoized recursion over the DAG)."""
    memo: dict[int, float] = {}
    for n in topo_order([e]):
        op = n.op
        if op == "const":
            v = n.value
        elif op == "var":
            v = float(x[n.value])
        elif op == "add":
            v = math.fsum(memo[a.uid] for a in n.args)
        elif op == "mul":
            v = 1.0
            for a in n.args:
                v *= memo[a.uid]
        elif op == "pow":
            v = memo[n.args[0].uid] ** n.value
        else:
            v = _apply(op, memo[n.args[0].uid])
        memo[n.uid] = v
    return memo[e.uid]


def topo_order(roots: Iterable[Expr]) -> list[Expr]:
    order: list[Expr] = []
    done: set[int] = set()
    for root in roots:
        if root.uid in done:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if node.uid in done:
                continue
            if expanded:
                done.add(node.uid)
                order.append(node)
                continue
            stack.append((node, True))
            for a in node.args:
                if a.uid not in done:
                    stack.append((a, False))
    return order


def substitute(e: Expr, mapping: dict[int, Expr]) -> Expr:
    """Replace variables by expressions."""
    memo: dict[int, Expr] = {}
    for n in topo_order([e]):
        op = n.op
        if op == "const":
            r = n
        elif op == "var":
            r = mapping.get(n.value, n)
        elif op == "add":
            r = add(*(memo[a.uid] for a in n.args))
        elif op == "mul":
            r = mul(*(memo[a.uid] for a in n.args))
        elif op == "pow":
            r = power(memo[n.args[0].uid], n.value)
        else:
            r = func(op, memo[n.args[0].uid])
        memo[n.uid] = r
    return memo[e.uid]


def dag_size(roots: Iterable[Expr]) -> int:
    return len(topo_order(roots))


# -- text form -------------------------------------------------------------

_PREC = {"add": 1, "mul": 2, "pow": 4}


def _fmt_const(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(e: Expr, names: Sequence[str] | None = None) -> str:
    """Render as DSL text. Round-trips exactly through :func:`curvedcheck.dsl.parse_expression`."""

    def vname(i: int) -> str:
        return names[i] if names is not None else f"x{i}"

    memo: dict[int, tuple[str, int]] = {}
    for n in topo_order([e]):
        op = n.op
        if op == "const":
            s = _fmt_const(n.value)
            memo[n.uid] = (f"({s})" if n.value < 0 else s, 5)
        elif op == "var":
            memo[n.uid] = (vname(n.value), 5)
        elif op == "add":
            parts = [memo[a.uid][0] for a in n.args]
            memo[n.uid] = (" + ".join(parts), 1)
        elif op == "mul":
            parts = []
            for a in n.args:
                s, p = memo[a.uid]
                parts.append(s if p >= 2 else f"({s})")
            memo[n.uid] = ("*".join(parts), 2)
        elif op == "pow":
            s, p = memo[n.args[0].uid]
            base = s if p >= 5 else f"({s})"
            k = n.value
            memo[n.uid] = (f"{base}^{k}" if k > 0 else f"{base}^({k})", 4)
        else:
            memo[n.uid] = (f"{op}({memo[n.args[0].uid][0]})", 5)
    return memo[e.uid][0]
