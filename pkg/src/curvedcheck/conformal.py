"""Conformal changes of metric, diffeomorphisms and their pullbacks, and the
degenerate-plane conditions for conformally related pairs."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .chart import DegenerateMetricError, MetricChart, curvature_bundle, signature_of
from .curvature import hessian
from .expr import Expr
from .planes import PlaneKind, _kind, random_null_vectors, sample_degenerate_planes
from .tape import compile_tape
from .tensor_core import build_phi, build_pi1, evaluate4_batch, symmetric


class ScalarField:
    """A scalar expression with exact value, gradient and Hessian of partials."""

    def __init__(self, expression: Expr | float, dim: int):
        self.expr = ex.wrap(expression)
        self.dim = dim
        e = self.expr
        roots = [e] + [e.diff(i) for i in range(dim)]
        roots += [ex.derivative(e, (i, j)) for i in range(dim) for j in range(dim)]
        self._tape = compile_tape(roots, dim)

    @classmethod
    def constant(cls, k: float, dim: int) -> "ScalarField":
        return cls(ex.const(k), dim)

    def jets(self, p) -> tuple[float, np.ndarray, np.ndarray]:
        v = self._tape(np.asarray(p, dtype=np.float64))
        n = self.dim
        return float(v[0]), v[1:n + 1].copy(), v[n + 1:].reshape(n, n)

    def __call__(self, p) -> float:
        return self.jets(p)[0]

    @property
    def is_constant(self) -> bool:
        return not ex.free_vars(self.expr)


def _as_field(sigma, dim: int) -> ScalarField:
    if isinstance(sigma, ScalarField):
        return sigma
    return ScalarField(ex.wrap(sigma), dim)


# -- conformal change ------------------------------------------------------

@dataclass(frozen=True)
class ConformalChange:
    source: MetricChart
    target: MetricChart
    sigma: ScalarField
    verify: float               # max |Rbar - e^{2 sigma}(R + phi(Q))| over sample points
    points: np.ndarray

    def Q(self, p) -> np.ndarray:
        return conformal_Q(self.source, self.sigma, p)


def conformal_Q(chart: MetricChart, sigma, p) -> np.ndarray:
    """Q(X,Y) = X(s) Y(s) - g(nabla_X grad s, Y) - |grad s|^2 g(X,Y) / 2."""
    sigma = _as_field(sigma, chart.dim)
    b = curvature_bundle(chart, p)
    _, ds, dds = sigma.jets(b.point)
    hess = hessian(b.christoffel, ds, dds)
    norm2 = float(ds @ b.metric_inv @ ds)
    return symmetric(np.outer(ds, ds) - hess - 0.5 * norm2 * b.metric)


def conformal_chart(chart: MetricChart, sigma) -> MetricChart:
    """The chart with metric e^{2 sigma} g on the same domain."""
    sigma = _as_field(sigma, chart.dim)
    name = f"exp(2*({ex.to_text(sigma.expr)}))*{chart.name}"
    if chart.grid is not None:
        factor = ex.exp(ex.mul(ex.const(2.0), sigma.expr))
        grid = [[ex.mul(factor, gij) for gij in row] for row in chart.grid]
        return MetricChart.from_expressions(grid, chart.domain, name, params=chart.params)
    base = chart.metric
    return MetricChart.from_function(lambda p: np.exp(2.0 * sigma(p)) * base(p), chart.dim,
                                     chart.domain, name)


def conformal_change(chart: MetricChart, sigma, points=None, samples: int = 8,
                     seed: int = 0) -> ConformalChange:
    sigma = _as_field(sigma, chart.dim)
    bar = conformal_chart(chart, sigma)
    pts = chart.sample_points(samples, seed) if points is None else np.atleast_2d(points)
    worst = 0.0
    for p in pts:
        b = curvature_bundle(chart, p)
        bb = curvature_bundle(bar, p)
        Q = conformal_Q(chart, sigma, p)
        predicted = np.exp(2.0 * sigma(p)) * (b.riemann + build_phi(b.metric, Q))
        worst = max(worst, float(np.abs(bb.riemann - predicted).max()))
    return ConformalChange(chart, bar, sigma, worst, pts)


def gradient_class(chart: MetricChart, sigma, points, tol: float = 1e-8) -> str:
    """'zero', 'isotropic', 'nonnull' or 'mixed' for grad sigma over the points."""
    sigma = _as_field(sigma, chart.dim)
    classes = set()
    for p in np.atleast_2d(points):
        _, ds, _ = sigma.jets(p)
        classes.add(_grad_kind(ds, np.linalg.inv(chart.metric(p)), tol))
    return classes.pop() if len(classes) == 1 else "mixed"


def _grad_kind(ds, ginv, tol) -> str:
    mag = float(np.abs(ds).max())
    if mag <= tol:
        return "zero"
    norm2 = float(ds @ ginv @ ds)
    if abs(norm2) <= tol * mag * mag * np.linalg.norm(ginv, 2):
        return "isotropic"
    return "nonnull"


# -- diffeomorphisms -------------------------------------------------------

class Diffeo:
    """A map between chart domains with a Jacobian oracle."""

    def __init__(self, forward: Callable, jacobian: Callable, dim: int,
                 inverse: Callable | None = None, name: str = "map"):
        self.forward = forward
        self._jacobian = jacobian
        self.dim = dim
        self.inverse = inverse
        self.name = name

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.forward(np.asarray(p, dtype=np.float64)), dtype=np.float64)

    def jacobian(self, p) -> np.ndarray:
        J = np.asarray(self._jacobian(np.asarray(p, dtype=np.float64)), dtype=np.float64)
        if J.shape != (self.dim, self.dim):
            raise ValueError(f"Jacobian has shape {J.shape}")
        return J

    @classmethod
    def identity(cls, dim: int) -> "Diffeo":
        return cls(lambda p: p.copy(), lambda p: np.eye(dim), dim, lambda q: q.copy(), "identity")

    @classmethod
    def linear(cls, A, b=None) -> "Diffeo":
        A = np.asarray(A, dtype=np.float64)
        b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=np.float64)
        Ainv = np.linalg.inv(A)
        return cls(lambda p: A @ p + b, lambda p: A, A.shape[0], lambda q: Ainv @ (q - b), "linear")

    @classmethod
    def from_expressions(cls, components: Sequence[Expr], name: str = "map") -> "Diffeo":
        n = len(components)
        comps = [ex.wrap(c) for c in components]
        val = compile_tape(comps, n)
        jac = compile_tape([c.diff(j) for c in comps for j in range(n)], n)
        return cls(lambda p: val(p), lambda p: jac(p).reshape(n, n), n, None, name)

    def compose(self, first: "Diffeo") -> "Diffeo":
        """self o first."""
        return Diffeo(lambda p: self(first(p)),
                      lambda p: self.jacobian(first(p)) @ first.jacobian(p),
                      self.dim, None, f"{self.name}.{first.name}")


def pullback(diffeo: Diffeo, target: MetricChart, p) -> np.ndarray:
    """(f* gbar)_p = J^T gbar(f(p)) J."""
    J = diffeo.jacobian(p)
    if abs(np.linalg.det(J)) < 1e-14 * max(1.0, np.abs(J).max()) ** J.shape[0]:
        raise np.linalg.LinAlgError(f"singular Jacobian at {list(p)}")
    q = diffeo(p)
    return symmetric(J.T @ target.metric(q) @ J)


class MapKind(str, enum.Enum):
    ISOMETRY = "Isometry"
    HOMOTHETY = "Homothety"
    CONFORMAL = "Conformal"
    GENERAL = "General"


@dataclass(frozen=True)
class MapClassification:
    kind: MapKind
    sign: int                     # f* gbar = sign * e^{2 sigma} g
    lam: float | None             # the constant factor for Isometry/Homothety
    sigma_samples: list[float]
    gradient_class: str | None
    proportionality_residual: float
    cone_preserved: bool
    cone_residual: float
    points: list[list[float]] = field(default_factory=list)


def _sign_and_factor(h, g):
    n = g.shape[0]
    lam = abs(np.linalg.det(h) / np.linalg.det(g)) ** (1.0 / n)
    scale = float(np.abs(h).max())
    res = {sg: float(np.abs(h - sg * lam * g).max()) / scale for sg in (1, -1)}
    try:
        sig_h = signature_of(h)
    except DegenerateMetricError:
        return 1, lam, np.inf
    sig_g = signature_of(g)
    cands = [sg for sg, sig in ((1, sig_g), (-1, sig_g[::-1])) if sig == sig_h]
    if not cands:
        return 1, lam, np.inf
    sg = min(cands, key=res.get)
    return sg, lam, res[sg]


def pullback_classify(diffeo: Diffeo, source: MetricChart, target: MetricChart,
                      samples: int = 12, tol: float = 1e-8, seed: int = 0,
                      points=None) -> MapClassification:
    pts = source.sample_points(samples, seed) if points is None else np.atleast_2d(points)
    rng = np.random.default_rng(seed + 1)
    lams, signs, res = [], [], 0.0
    cone_res = 0.0
    for p in pts:
        g = source.metric(p)
        h = pullback(diffeo, target, p)
        sg, lam, r = _sign_and_factor(h, g)
        lams.append(lam)
        signs.append(sg)
        res = max(res, r)
        if source.signature[0] not in (0, source.dim):
            J = diffeo.jacobian(p)
            gbar = target.metric(diffeo(p))
            for xi in random_null_vectors(g, 4, rng):
                v = J @ xi
                cone_res = max(cone_res, abs(v @ gbar @ v) / (np.linalg.norm(gbar, 2) * (v @ v)))
    lams = np.array(lams)
    sigmas = [float(0.5 * np.log(l)) for l in lams]
    cone_ok = cone_res <= max(tol, 1e-10)
    pts_list = [list(map(float, p)) for p in pts]
    if res > tol or len(set(signs)) > 1:
        return MapClassification(MapKind.GENERAL, signs[0], None, sigmas, None, res, cone_ok, cone_res, pts_list)
    sign = signs[0]
    if sign == 1 and np.all(np.abs(lams - 1.0) <= tol):
        return MapClassification(MapKind.ISOMETRY, 1, 1.0, sigmas, "zero", res, cone_ok, cone_res, pts_list)
    if lams.max() - lams.min() < tol * abs(lams.mean()):
        return MapClassification(MapKind.HOMOTHETY, sign, float(lams.mean()), sigmas, "zero", res,
                                 cone_ok, cone_res, pts_list)
    grad = _sigma_hat_gradient_class(diffeo, source, target, pts)
    return MapClassification(MapKind.CONFORMAL, sign, None, sigmas, grad, res, cone_ok, cone_res, pts_list)


def _sigma_hat(diffeo, source, target, p) -> float:
    h = pullback(diffeo, target, p)
    return float(np.log(abs(np.linalg.det(h) / np.linalg.det(source.metric(p))))) / (2 * source.dim)


def _sigma_hat_gradient_class(diffeo, source, target, pts, gtol: float = 1e-6) -> str:
    n = source.dim
    widths = source.domain[:, 1] - source.domain[:, 0]
    classes = set()
    for p in pts:
        ds = np.empty(n)
        for a in range(n):
            h = 1e-3 * widths[a]

            def central(step):
                e = np.zeros(n)
                e[a] = step
                return (_sigma_hat(diffeo, source, target, p + e)
                        - _sigma_hat(diffeo, source, target, p - e)) / (2 * step)

            ds[a] = (4 * central(h / 2) - central(h)) / 3
        classes.add(_grad_kind(ds, np.linalg.inv(source.metric(p)), gtol))
    return classes.pop() if len(classes) == 1 else "mixed"


# -- degenerate-plane conditions for the pair (g, e^{2 sigma} g) -----------

@dataclass(frozen=True)
class ConditionCheck:
    residual: float
    passed: bool
    kind: str
    samples: int
    tol: float


def degenerate_condition_check(source: MetricChart, sigma, kind, samples: int = 100,
                               tol: float = 1e-7, seed: int = 0, points=None,
                               bar: MetricChart | None = None) -> ConditionCheck:
    """Weak: |e^{-4s} Rbar(x,xi,xi,x) - R(x,xi,xi,x)| / (|x|^2 |xi|^2).
    Strong: |(e^{2s} - 1) R(xi,eta,eta,xi)| / (|xi|^2 |eta|^2).
    The residual is the maximum over all sampled planes."""
    sigma = _as_field(sigma, source.dim)
    kind = _kind(kind)
    if points is None:
        points = source.sample_points(max(1, min(10, samples)), seed)
    pts = np.atleast_2d(points)
    per_point = [samples // len(pts) + (1 if i < samples % len(pts) else 0) for i in range(len(pts))]
    if kind is PlaneKind.WEAK and bar is None and not sigma.is_constant:
        bar = conformal_chart(source, sigma)
    worst = 0.0
    for i, (p, m) in enumerate(zip(pts, per_point)):
        if m == 0:
            continue
        b = curvature_bundle(source, p)
        s = sigma(p)
        planes = sample_degenerate_planes(b.metric, kind, m, seed + 7919 * i, point=p)
        X = np.array([pl.x for pl in planes])
        Y = np.array([pl.y for pl in planes])
        norms = (np.linalg.norm(X, axis=1) * np.linalg.norm(Y, axis=1)) ** 2
        r = evaluate4_batch(b.riemann, X, Y, Y, X)
        if kind is PlaneKind.WEAK:
            if bar is None:  # constant sigma: Rbar = e^{2s} R exactly
                rbar = np.exp(2.0 * s) * r
            else:
                rbar = evaluate4_batch(curvature_bundle(bar, p).riemann, X, Y, Y, X)
            vals = np.abs(np.exp(-4.0 * s) * rbar - r) / norms
        else:
            vals = np.abs((np.exp(2.0 * s) - 1.0) * r) / norms
        worst = max(worst, float(vals.max()))
    return ConditionCheck(worst, worst < tol, kind.value, samples, tol)


@dataclass(frozen=True)
class Relation31:
    status: str                 # "ok" or "precondition_failed"
    residual: float | None
    passed: bool | None
    precondition: ConditionCheck


def verify_relation_3_1(source: MetricChart, sigma, samples: int = 8, tol: float = 1e-6,
                        seed: int = 0, pre_tol: float = 1e-7, planes_per_point: int = 10) -> Relation31:
    """Residual of Rbar = e^{4s} (R + (taubar - tau) pi1 / (n(n-1))), normalized by e^{4s} max|R|.

    Only asserted for pairs satisfying the weak degenerate-plane condition;
    otherwise the result is ``precondition_failed``.
    """
    sigma = _as_field(sigma, source.dim)
    bar = conformal_chart(source, sigma)
    pts = source.sample_points(samples, seed)
    pre = degenerate_condition_check(source, sigma, "weak", samples * planes_per_point, pre_tol,
                                     seed, points=pts, bar=bar)
    if not pre.passed:
        return Relation31("precondition_failed", None, None, pre)
    n = source.dim
    worst = 0.0
    for p in pts:
        b = curvature_bundle(source, p)
        bb = curvature_bundle(bar, p)
        e4 = np.exp(4.0 * sigma(p))
        rhs = e4 * (b.riemann + (bb.scalar - b.scalar) * build_pi1(b.metric) / (n * (n - 1)))
        scale = e4 * max(float(np.abs(b.riemann).max()), 1e-300)
        worst = max(worst, float(np.abs(bb.riemann - rhs).max()) / scale)
    return Relation31("ok", worst, worst < tol, pre)
