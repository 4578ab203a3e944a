"""Derivative oracles for metric components.

Both oracles return *jets*: the metric matrix and its coordinate partials,
laid out with derivative axes first::

    jets[0][i, j]          = g_ij
    jets[1][a, i, j]       = d_a g_ij
    jets[2][a, b, i, j]    = d_a d_b g_ij
    jets[3][a, b, c, i, j] = d_a d_b d_c g_ij
"""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .expr import Expr
from .tape import Tape, compile_tape

MAX_ORDER = 3


class DerivativeOracleError(RuntimeError):
    pass


def _multi_indices(n: int, order: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations_with_replacement(range(n), order))


class SymbolicOracle:
    """Exact partials of expression-tree components, evaluated through a compiled tape."""

    path = "symbolic"

    def __init__(self, grid: Sequence[Sequence[Expr]]):
        self.dim = n = len(grid)
        self.grid = [list(row) for row in grid]
        self.pairs = [(i, j) for i in range(n) for j in range(i, n)]
        self._tapes: dict[int, tuple[Tape, list[tuple[np.ndarray, np.ndarray]]]] = {}

    def _build(self, order: int):
        n = self.dim
        roots: list[Expr] = []
        scatter = []
        for k in range(order + 1):
            alphas = _multi_indices(n, k)
            pos, src = [], []
            shape = (n,) * k + (n, n)
            for alpha in alphas:
                perms = set(itertools.permutations(alpha))
                for i, j in self.pairs:
                    d = ex.derivative(self.grid[i][j], alpha)
                    idx = len(roots)
                    roots.append(d)
                    for perm in perms:
                        pos.append(np.ravel_multi_index(perm + (i, j), shape))
                        src.append(idx)
                        if i != j:
                            pos.append(np.ravel_multi_index(perm + (j, i), shape))
                            src.append(idx)
            scatter.append((np.asarray(pos, dtype=np.intp), np.asarray(src, dtype=np.intp)))
        tape = compile_tape(roots, n)
        return tape, scatter

    def tape(self, order: int) -> Tape:
        return self._get(order)[0]

    def _get(self, order: int):
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"derivative order must be in [0, {MAX_ORDER}]")
        # a higher-order tape also serves lower orders
        for k in range(order, MAX_ORDER + 1):
            if k in self._tapes:
                return self._tapes[k]
        self._tapes[order] = self._build(order)
        return self._tapes[order]

    def jets(self, p: Sequence[float], order: int) -> list[np.ndarray]:
        tape, scatter = self._get(order)
        vals = tape(np.asarray(p, dtype=np.float64))
        if not np.all(np.isfinite(vals)):
            raise DerivativeOracleError(f"non-finite metric derivatives at {list(p)}")
        n = self.dim
        out = []
        for k in range(order + 1):
            arr = np.empty((n,) * k + (n, n))
            pos, src = scatter[k]
            arr.flat[pos] = vals[src]
            out.append(arr)
        return out

    def metric(self, p: Sequence[float]) -> np.ndarray:
        return self.jets(p, 0)[0]


# step size per derivative order, as a fraction of each axis width
FD_STEPS = {1: 1e-4, 2: 1e-3, 3: 1e-2}


class FiniteDifferenceOracle:
    """Central differences with one Richardson step, for black-box metric evaluators.

    The stencil for a mixed partial along ``(a1, .., ak)`` is the product of
    one-dimensional central differences, so its error expansion is even in
    the step and ``(4 D(h/2) - D(h)) / 3`` is fourth-order accurate.
    """

    path = "finite-difference"

    def __init__(self, metric_fn: Callable[[np.ndarray], np.ndarray], dim: int,
                 widths: Sequence[float], steps: dict[int, float] | None = None):
        self.dim = dim
        self.metric_fn = metric_fn
        self.widths = np.asarray(widths, dtype=np.float64)
        self.steps = dict(FD_STEPS if steps is None else steps)

    def metric(self, p) -> np.ndarray:
        g = np.asarray(self.metric_fn(np.asarray(p, dtype=np.float64)), dtype=np.float64)
        if g.shape != (self.dim, self.dim) or not np.all(np.isfinite(g)):
            raise DerivativeOracleError(f"metric evaluator failed at {list(p)}")
        return 0.5 * (g + g.T)

    def _stencil(self, p, alpha, h):
        k = len(alpha)
        total = np.zeros((self.dim, self.dim))
        for signs in itertools.product((1.0, -1.0), repeat=k):
            q = np.array(p, dtype=np.float64)
            for s, a in zip(signs, alpha):
                q[a] += s * h[a]
            total += np.prod(signs) * self.metric(q)
        return total / np.prod([2.0 * h[a] for a in alpha])

    def partial(self, p, alpha: Sequence[int]) -> np.ndarray:
        k = len(alpha)
        if k == 0:
            return self.metric(p)
        h = self.steps[k] * self.widths
        coarse = self._stencil(p, alpha, h)
        fine = self._stencil(p, alpha, 0.5 * h)
        return (4.0 * fine - coarse) / 3.0

    def jets(self, p: Sequence[float], order: int) -> list[np.ndarray]:
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"derivative order must be in [0, {MAX_ORDER}]")
        n = self.dim
        out = [self.metric(p)]
        for k in range(1, order + 1):
            arr = np.empty((n,) * k + (n, n))
            for alpha in _multi_indices(n, k):
                d = self.partial(p, alpha)
                d = 0.5 * (d + d.T)
                for perm in set(itertools.permutations(alpha)):
                    arr[perm] = d
            out.append(arr)
        return out
