"""Flatten expression DAGs into an instruction tape and evaluate it.

The tape is the hot loop of the whole package: every curvature evaluation
runs one tape holding the metric components and all their partials up to
order three. Evaluation is delegated to the compiled ``_tape`` extension
when it is importable, otherwise to the pure-Python interpreter in
``_tape_py``. Set ``CURVEDCHECK_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .expr import Expr, topo_order

CONST, VAR, ADD, MUL, POWI, SIN, COS, EXP, LOG, SQRT = range(10)
_FUNC_OPS = {"sin": SIN, "cos": COS, "exp": EXP, "log": LOG, "sqrt": SQRT}

from . import _tape_py  # noqa: E402

if os.environ.get("CURVEDCHECK_PURE", "") not in ("", "0"):
    _native = None
else:
    try:
        from . import _tape as _native  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _native = None

BACKEND = "cython" if _native is not None else "python"


def backend_module(name: str | None = None):
    """Return the kernel module for ``name`` ('cython', 'python' or None for the default)."""
    if name is None:
        name = BACKEND
    if name == "python":
        return _tape_py
    if name == "cython":
        if _native is None:
            raise RuntimeError("compiled tape kernel is not available")
        return _native
    raise ValueError(f"unknown backend {name!r}")


@dataclass(frozen=True)
class Tape:
    op: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    roots: np.ndarray
    nvars: int

    def __len__(self) -> int:
        return len(self.op)

    def __call__(self, x: Sequence[float], backend: str | None = None) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.nvars,):
            raise ValueError(f"expected {self.nvars} coordinates, got shape {x.shape}")
        k = backend_module(backend)
        out = np.empty(len(self.op), dtype=np.float64)
        res = np.empty(len(self.roots), dtype=np.float64)
        k.eval_tape(self.op, self.a, self.b, self.c, x, out, self.roots, res)
        return res

    def batch(self, X, backend: str | None = None) -> np.ndarray:
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        if X.shape[1] != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates per row")
        k = backend_module(backend)
        res = np.empty((X.shape[0], len(self.roots)), dtype=np.float64)
        k.eval_tape_batch(self.op, self.a, self.b, self.c, X, self.roots, res)
        return res


def compile_tape(roots: Sequence[Expr], nvars: int) -> Tape:
    op: list[int] = []
    a: list[int] = []
    b: list[int] = []
    c: list[float] = []
    slot: dict[int, int] = {}

    def emit(o, x=0, y=0, v=0.0) -> int:
        op.append(o)
        a.append(x)
        b.append(y)
        c.append(v)
        return len(op) - 1

    for n in topo_order(roots):
        kind = n.op
        if kind == "const":
            s = emit(CONST, v=n.value)
        elif kind == "var":
            if not 0 <= n.value < nvars:
                raise ValueError(f"variable x{n.value} out of range for {nvars} coordinates")
            s = emit(VAR, n.value)
        elif kind in ("add", "mul"):
            code = ADD if kind == "add" else MUL
            args = [slot[x.uid] for x in n.args]
            s = emit(code, args[0], args[1])
            for extra in args[2:]:
                s = emit(code, s, extra)
        elif kind == "pow":
            s = emit(POWI, slot[n.args[0].uid], int(n.value))
        else:
            s = emit(_FUNC_OPS[kind], slot[n.args[0].uid])
        slot[n.uid] = s

    return Tape(
        op=np.asarray(op, dtype=np.int32),
        a=np.asarray(a, dtype=np.int32),
        b=np.asarray(b, dtype=np.int32),
        c=np.asarray(c, dtype=np.float64),
        roots=np.asarray([slot[r.uid] for r in roots], dtype=np.int32),
        nvars=nvars,
    )
