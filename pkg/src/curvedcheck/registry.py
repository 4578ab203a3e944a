"""Built-in example manifolds.

Every entry instantiates to an expression chart, so registry metrics carry
exact symbolic derivatives and serialize to the metric DSL.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import expr as ex
from .chart import ChartError, MetricChart
from .dsl import parse_expression, parse_metric_dsl


class RegistryError(ValueError):
    pass


@dataclass(frozen=True)
class ManifoldSpec:
    name: str
    parameters: dict = field(default_factory=dict)
    construction: str = "closed_form"


# frozen: acceptance numbers depend on these exact strings
GENERIC22_DSL = """\
dim=4;
g[0][0]=-1 - 0.4*sin(x1)*cos(x2) - 0.3*x3^2;
g[1][1]=-1 + 0.35*cos(x0 + x3)*x2;
g[2][2]=1 + 0.3*sin(x0)*x1 + 0.25*x3^2;
g[3][3]=1 + 0.4*cos(x1 - x2)*x0^2 + 0.2*sin(x2);
g[0][1]=0.15*sin(x2 + x3);
g[2][3]=0.2*x0*x1;
g[0][3]=0.1*cos(x1)*x2;
"""
GENERIC22_DOMAIN = [(-0.5, 0.5)] * 4
# measured minimum of max|Weyl| over 416 domain points (incl. corners) is 0.081
GENERIC22_WEYL_FLOOR = 0.05

# conformal pair carrier: sigma(u) = -u needs the profile h(u) = e^{2u} / (e^{2u} - 1)
PPWAVE_PAIR_SIGMA = "-u"
PPWAVE_PAIR_PROFILE = "exp(2*u)/(exp(2*u) - 1)"
PPWAVE_PAIR_DOMAIN_U = (-2.0, -0.5)


def _vars(n):
    return [ex.var(i) for i in range(n)]


def _signs(s, n):
    return [-1.0] * s + [1.0] * (n - s)


def _check_sig(s, n):
    if not (3 <= n <= 6) or not (0 <= s <= n):
        raise RegistryError(f"need 3 <= n <= 6 and 0 <= s <= n, got s={s}, n={n}")


def flat(s: int = 1, n: int = 4) -> MetricChart:
    _check_sig(s, n)
    eps = _signs(s, n)
    grid = [[ex.const(eps[i]) if i == j else ex.ZERO for j in range(n)] for i in range(n)]
    return MetricChart.from_expressions(grid, [(-1.0, 1.0)] * n, f"flat({s},{n})",
                                        params={"s": s, "n": n})


def _conformal_model(c, eps, xs):
    q = ex.add(*[ex.mul(ex.const(e), x, x) for e, x in zip(eps, xs)])
    return ex.power(ex.add(ex.ONE, ex.mul(ex.const(c / 4.0), q)), -2)


def constant_curvature(c: float = 1.0, s: int = 1, n: int = 4) -> MetricChart:
    """g = diag(eps) / (1 + c q(x)/4)^2 with q the signature-(s, n-s) quadratic form."""
    _check_sig(s, n)
    if abs(c) > 2:
        raise RegistryError("constant_curvature supports |c| <= 2 on its [-0.5, 0.5] box")
    eps = _signs(s, n)
    f = _conformal_model(c, eps, _vars(n))
    grid = [[ex.mul(ex.const(eps[i]), f) if i == j else ex.ZERO for j in range(n)] for i in range(n)]
    return MetricChart.from_expressions(grid, [(-0.5, 0.5)] * n, f"constant_curvature({c},{s},{n})",
                                        params={"c": c, "s": s, "n": n})


def product_example1(c: float = 1.0, s: int = 0, n: int = 4) -> MetricChart:
    """M1(c) x R: an (n-1)-dim constant-curvature factor of signature s plus a spacelike line x_{n-1}."""
    if not (3 <= n <= 6) or not (0 <= s <= n - 1):
        raise RegistryError(f"need 3 <= n <= 6 and 0 <= s <= n-1, got s={s}, n={n}")
    if abs(c) > 2:
        raise RegistryError("product_example1 supports |c| <= 2")
    eps = _signs(s, n - 1)
    xs = _vars(n)
    f = _conformal_model(c, eps, xs[: n - 1])
    grid = [[ex.ZERO] * n for _ in range(n)]
    for i in range(n - 1):
        grid[i][i] = ex.mul(ex.const(eps[i]), f)
    grid[n - 1][n - 1] = ex.ONE
    dom = [(-0.5, 0.5)] * (n - 1) + [(-1.0, 1.0)]
    return MetricChart.from_expressions(grid, dom, f"product_example1({c},{s},{n})",
                                        params={"c": c, "s": s, "n": n})


def example2_embedding(f: str | ex.Expr = "t^2", s: int = 2, n: int = 4):
    """Embedding components X^1..X^{n+1} in R^{n+1}_s and the ambient signs.

    Coordinates x0..x{n-1} stand for y^1..y^n.
    """
    y = _vars(n)
    yn = y[n - 1]
    fexpr = parse_expression(f, n, names={"t": n - 1}) if isinstance(f, str) else f
    delta = ex.add(ex.ONE, *[ex.mul(ex.const(-1.0 if i < s else 1.0), y[i], y[i]) for i in range(n - 1)])
    inv = ex.power(delta, -1)
    X = [ex.mul(ex.const(2.0), y[i], yn, inv) for i in range(n - 1)]
    X.append(ex.mul(yn, ex.add(delta, ex.const(-2.0)), inv))
    X.append(fexpr)
    ambient = _signs(s, n + 1)
    return X, ambient


def example2(f: str = "t^2", s: int = 2, n: int = 4) -> MetricChart:
    """Induced metric of the hypersurface, computed as J^T eta J from the embedding."""
    if not (3 <= n <= 6) or not (0 <= s <= n - 1):
        raise RegistryError(f"need 3 <= n <= 6 and 0 <= s <= n-1, got s={s}, n={n}")
    X, eta = example2_embedding(f, s, n)
    grid = [[None] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            terms = [ex.mul(ex.const(e), Xa.diff(a), Xa.diff(b)) for e, Xa in zip(eta, X)]
            grid[a][b] = grid[b][a] = ex.add(*terms)
    dom = [(-0.3, 0.3)] * (n - 1) + [(0.5, 1.5)]
    try:
        return MetricChart.from_expressions(grid, dom, f"example2({f},{s},{n})",
                                            params={"f": f, "s": s, "n": n})
    except ChartError as exc:
        raise RegistryError(f"example2 induced metric invalid: {exc}") from exc


def example2_reference_HN(fprime: float, fsecond: float, yn: float) -> tuple[float, float]:
    """The printed closed forms H = f'^2/((y^n)^2 (1+f'^2)), N = 4 f' f''/(y^n (1+f'^2)), verbatim."""
    if yn <= 0:
        raise RegistryError("y^n must be positive")
    H = fprime ** 2 / (yn ** 2 * (1 + fprime ** 2))
    N = 4 * fprime * fsecond / (yn * (1 + fprime ** 2))
    return H, N


def example2_reference_HN_at(f: str, p, s: int = 2) -> tuple[float, float]:
    """Printed formulas evaluated at a chart point (checks Delta > 0, y^n > 0)."""
    p = np.asarray(p, dtype=np.float64)
    n = p.shape[0]
    delta = 1.0 + sum((-1.0 if i < s else 1.0) * p[i] ** 2 for i in range(n - 1))
    if delta <= 0 or p[-1] <= 0:
        raise RegistryError("point outside Delta > 0, y^n > 0")
    fe = parse_expression(f, 1, names={"t": 0})
    d1, d2 = fe.diff(0), fe.diff(0).diff(0)
    return example2_reference_HN(ex.evaluate(d1, [p[-1]]), ex.evaluate(d2, [p[-1]]), p[-1])


def ppwave(h: str = "exp(u)", n: int = 4, u_range=(-1.0, 1.0)) -> MetricChart:
    """g = 2 du dv + h(u) (x2^2 + .. + x{n-1}^2) du^2 + sum dx_i^2, coordinates (u, v, x2, ..)."""
    if not 4 <= n <= 6:
        raise RegistryError("ppwave needs 4 <= n <= 6")
    hexpr = parse_expression(h, n, names={"u": 0}) if isinstance(h, str) else h
    xs = _vars(n)
    q = ex.add(*[ex.mul(x, x) for x in xs[2:]])
    grid = [[ex.ZERO] * n for _ in range(n)]
    grid[0][0] = ex.mul(hexpr, q)
    grid[0][1] = grid[1][0] = ex.ONE
    for i in range(2, n):
        grid[i][i] = ex.ONE
    dom = [tuple(u_range)] + [(-1.0, 1.0)] * (n - 1)
    return MetricChart.from_expressions(grid, dom, f"ppwave({h},{n})", params={"h": h, "n": n})


def ppwave_pair(n: int = 4):
    """(chart, sigma) with sigma = -u on the pinned profile: satisfies the weak degenerate condition."""
    chart = ppwave(PPWAVE_PAIR_PROFILE, n, PPWAVE_PAIR_DOMAIN_U)
    sigma = parse_expression(PPWAVE_PAIR_SIGMA, n, names={"u": 0})
    return chart, sigma


def generic22() -> MetricChart:
    n, grid = parse_metric_dsl(GENERIC22_DSL)
    return MetricChart.from_expressions(grid, GENERIC22_DOMAIN, "generic22")


_BUILDERS = {
    "flat": flat,
    "constant_curvature": constant_curvature,
    "product_example1": product_example1,
    "example2": example2,
    "ppwave": ppwave,
    "ppwave_pair": lambda n=4: ppwave_pair(n)[0],
    "generic22": generic22,
}

_PARAM_TYPES = {"c": float, "s": int, "n": int, "f": str, "h": str}


def names() -> list[str]:
    return list(_BUILDERS)


def instantiate(spec: ManifoldSpec | str, **params) -> MetricChart:
    if isinstance(spec, str):
        spec = ManifoldSpec(spec, params)
    try:
        build = _BUILDERS[spec.name]
    except KeyError:
        raise RegistryError(f"unknown manifold {spec.name!r}; known: {', '.join(_BUILDERS)}") from None
    kwargs = {}
    for k, v in spec.parameters.items():
        if v is None:
            continue
        if k not in _PARAM_TYPES:
            raise RegistryError(f"unknown parameter {k!r}")
        kwargs[k] = _PARAM_TYPES[k](v)
    try:
        return build(**kwargs)
    except TypeError as exc:
        raise RegistryError(f"bad parameters for {spec.name}: {exc}") from None


def manifest() -> list[dict[str, str]]:
    """Entries of the shipped plain-text catalog."""
    text = resources.files("curvedcheck").joinpath("registry.txt").read_text()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, params, domain, provenance = (part.strip() for part in line.split("|", 3))
        rows.append({"name": name, "parameters": params, "domain": domain, "provenance": provenance})
    return rows
