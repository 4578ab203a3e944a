"""Metric charts and the per-point curvature pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import curvature as cv
from . import expr as ex
from .derivatives import FiniteDifferenceOracle, SymbolicOracle
from .dsl import metric_to_dsl, parse_metric_dsl
from .expr import Expr
from .tensor_core import MAX_DIM, MIN_DIM, contract_ricci, symmetric

DEGENERACY_RTOL = 1e-10
SIGNATURE_SAMPLES = 16


class ChartError(ValueError):
    """Invalid chart construction or a query outside the chart."""


class DegenerateMetricError(ChartError):
    pass


def signature_of(g, rtol: float = DEGENERACY_RTOL) -> tuple[int, int]:
    """(negative, positive) eigenvalue counts of a symmetric matrix."""
    w = np.linalg.eigvalsh(symmetric(g))
    scale = np.abs(w).max()
    if scale == 0.0 or np.abs(w).min() < rtol * scale:
        raise DegenerateMetricError(f"metric is degenerate (eigenvalues {w})")
    neg = int((w < 0).sum())
    return neg, len(w) - neg


class MetricChart:
    """A metric on a coordinate box, with a derivative oracle to order 3.

    Build from expression trees (exact symbolic derivatives) or from a
    black-box evaluator ``p -> g(p)`` (finite differences). The signature is
    checked at pseudo-random sample points on construction.
    """

    def __init__(self, oracle, domain: Sequence[tuple[float, float]], name: str = "chart",
                 *, grid: list[list[Expr]] | None = None, signature_samples: int = SIGNATURE_SAMPLES,
                 seed: int = 0, params: dict | None = None):
        self.dim = n = oracle.dim
        if not MIN_DIM <= n <= MAX_DIM:
            raise ChartError(f"dimension {n} outside supported range [{MIN_DIM}, {MAX_DIM}]")
        dom = np.asarray(domain, dtype=np.float64)
        if dom.shape != (n, 2) or np.any(dom[:, 1] <= dom[:, 0]):
            raise ChartError(f"domain must be {n} intervals (lo < hi), got {domain!r}")
        self.domain = dom
        self.oracle = oracle
        self.name = name
        self.grid = grid
        self.params = dict(params or {})
        self.signature = self._validate_signature(signature_samples, seed)

    @classmethod
    def from_expressions(cls, grid, domain, name: str = "chart", **kw) -> "MetricChart":
        n = len(grid)
        grid = [[ex.wrap(grid[i][j]) for j in range(n)] for i in range(n)]
        for i in range(n):
            if len(grid[i]) != n:
                raise ChartError("component grid must be square")
            for j in range(i):
                if grid[i][j] is not grid[j][i]:
                    raise ChartError(f"component grid not symmetric at ({i},{j})")
        return cls(SymbolicOracle(grid), domain, name, grid=grid, **kw)

    @classmethod
    def from_dsl(cls, text: str, domain=None, name: str = "inline", **kw) -> "MetricChart":
        n, grid = parse_metric_dsl(text)
        if domain is None:
            domain = [(-0.5, 0.5)] * n
        return cls.from_expressions(grid, domain, name, **kw)

    @classmethod
    def from_function(cls, metric_fn: Callable[[np.ndarray], np.ndarray], dim: int, domain,
                      name: str = "black-box", steps=None, **kw) -> "MetricChart":
        widths = np.asarray(domain, dtype=np.float64) @ np.array([-1.0, 1.0])
        return cls(FiniteDifferenceOracle(metric_fn, dim, widths, steps), domain, name, **kw)

    def with_finite_differences(self, steps=None) -> "MetricChart":
        """Same metric, but derivatives by finite differences of point values only."""
        return MetricChart.from_function(self.metric, self.dim, self.domain, f"{self.name}[fd]",
                                         steps=steps, params=self.params)

    @property
    def derivative_path(self) -> str:
        return self.oracle.path

    def to_dsl(self) -> str:
        if self.grid is None:
            raise ChartError("only expression charts serialize to DSL")
        return metric_to_dsl(self.grid)

    def contains(self, p, slack: float = 0.0) -> bool:
        p = np.asarray(p, dtype=np.float64)
        w = self.domain[:, 1] - self.domain[:, 0]
        return bool(np.all(p >= self.domain[:, 0] - slack * w) and np.all(p <= self.domain[:, 1] + slack * w))

    def check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64).reshape(-1)
        if p.shape != (self.dim,):
            raise ChartError(f"point needs {self.dim} coordinates, got {p.shape[0]}")
        if not self.contains(p):
            raise ChartError(f"point {p.tolist()} outside chart domain of {self.name}")
        return p

    def sample_points(self, count: int, seed: int = 0, margin: float = 0.05) -> np.ndarray:
        rng = np.random.default_rng(seed)
        lo, hi = self.domain[:, 0], self.domain[:, 1]
        w = hi - lo
        return lo + margin * w + rng.random((count, self.dim)) * (1 - 2 * margin) * w

    def metric(self, p) -> np.ndarray:
        return self.oracle.metric(np.asarray(p, dtype=np.float64))

    def jets(self, p, order: int) -> list[np.ndarray]:
        return self.oracle.jets(self.check_point(p), order)

    def _validate_signature(self, samples: int, seed: int):
        sig = None
        for p in self.sample_points(samples, seed):
            s = signature_of(self.metric(p))
            if sig is None:
                sig = s
            elif s != sig:
                raise ChartError(f"signature changes across the domain of {self.name}: {sig} vs {s}")
        return sig

    def __repr__(self) -> str:
        return f"MetricChart({self.name!r}, dim={self.dim}, signature={self.signature}, path={self.derivative_path})"


@dataclass(frozen=True)
class CurvatureBundle:
    point: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    traceless_ricci: np.ndarray
    weyl: np.ndarray | None = None
    cotton: np.ndarray | None = None
    nabla_riemann: np.ndarray | None = field(default=None, repr=False)
    derivative_path: str = "symbolic"

    @property
    def dim(self) -> int:
        return self.metric.shape[0]


def _checked_metric(chart: MetricChart, g: np.ndarray, p) -> None:
    try:
        signature_of(g)
    except DegenerateMetricError as exc:
        raise DegenerateMetricError(f"singular metric at {list(p)} in {chart.name}") from exc


def curvature_bundle(chart: MetricChart, p, *, with_nabla: bool = False) -> CurvatureBundle:
    """Christoffel symbols, Riemann, Ricci, scalar, Weyl (n >= 4) or Cotton (n = 3), P = S - tau g/n."""
    p = chart.check_point(p)
    n = chart.dim
    order = 3 if (with_nabla or n == 3) else 2
    jets = chart.oracle.jets(p, order)
    g = jets[0]
    _checked_metric(chart, g, p)
    con = cv.connection(g, jets[1], jets[2])
    R = con.riemann
    S, tau = contract_ricci(R, con.ginv)
    nab = cv.nabla_riemann(con, jets[1], jets[2], jets[3]) if order == 3 else None
    weyl = cotton = None
    if n >= 4:
        weyl = cv.weyl_from(R, g, S, tau)
    else:
        cotton = cv.cotton_from(nab, g, con.ginv)
    return CurvatureBundle(
        point=p, metric=g, metric_inv=con.ginv, christoffel=con.gamma, riemann=R,
        ricci=S, scalar=tau, traceless_ricci=S - tau / n * g, weyl=weyl, cotton=cotton,
        nabla_riemann=nab, derivative_path=chart.derivative_path,
    )


def covariant_derivative_R(chart: MetricChart, p) -> np.ndarray:
    """(nabla R)(X; Y, Z, U, V), derivative slot first."""
    p = chart.check_point(p)
    jets = chart.oracle.jets(p, 3)
    _checked_metric(chart, jets[0], p)
    con = cv.connection(jets[0], jets[1], jets[2])
    return cv.nabla_riemann(con, jets[1], jets[2], jets[3])


def signature_at(chart: MetricChart, p) -> tuple[int, int]:
    p = chart.check_point(p)
    return signature_of(chart.metric(p))
