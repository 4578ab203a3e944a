"""Tangent planes: degeneracy classes, sectional curvature, degenerate-plane sampling
and the ratio limit of sectional curvatures along planes approaching a degenerate one."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tensor_core import build_pi1, evaluate4, symmetric

RANK_RTOL = 1e-9


class PlaneKind(enum.Enum):
    NONDEGENERATE = "Nondegenerate"
    WEAK = "WeaklyDegenerate"
    STRONG = "StronglyDegenerate"


class PlaneError(ValueError):
    pass


class DegeneratePlaneError(PlaneError):
    def __init__(self, kind: PlaneKind):
        self.kind = kind
        super().__init__(f"sectional curvature is undefined on a {kind.value} plane")


class SignatureError(PlaneError):
    """The metric signature does not admit the requested kind of plane."""


@dataclass(frozen=True)
class TangentPlane:
    point: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "point", np.asarray(self.point, dtype=np.float64))
        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        if nx == 0 or ny == 0:
            raise PlaneError("spanning vectors must be nonzero")
        u, v = x / nx, y / ny
        if 1.0 - float(u @ v) ** 2 <= 1e-12:
            raise PlaneError("spanning vectors are linearly dependent")

    @property
    def basis_norm(self) -> float:
        """|x| |y| in the auxiliary Euclidean norm."""
        return float(np.linalg.norm(self.x) * np.linalg.norm(self.y))

    def rebased(self, m) -> "TangentPlane":
        """Same plane with basis (x, y) @ m for a nonsingular 2x2 matrix m."""
        m = np.asarray(m, dtype=np.float64)
        return TangentPlane(self.point, m[0, 0] * self.x + m[1, 0] * self.y,
                            m[0, 1] * self.x + m[1, 1] * self.y)


@dataclass(frozen=True)
class PlaneClass:
    kind: PlaneKind
    isotropic_direction: np.ndarray | None = None
    singular_values: tuple[float, float] = (0.0, 0.0)


def gram(g, x, y) -> np.ndarray:
    return np.array([[x @ g @ x, x @ g @ y], [y @ g @ x, y @ g @ y]])


def classify_plane(g_p, plane: TangentPlane, tol: float = RANK_RTOL) -> PlaneClass:
    """Rank of g restricted to the plane, with thresholds relative to |g| |x| |y|."""
    g = symmetric(g_p)
    x, y = plane.x, plane.y
    G = gram(g, x, y)
    _, sv, vt = np.linalg.svd(G)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    scale = max(sv[0], np.linalg.norm(g, 2) * max(nx, ny) ** 2)
    rank = int((sv > tol * scale).sum())
    if rank == 2:
        return PlaneClass(PlaneKind.NONDEGENERATE, None, (sv[0], sv[1]))
    if rank == 1:
        k = vt[1]
        xi = k[0] * x + k[1] * y
        xi = xi / np.abs(xi).max()
        nz = np.flatnonzero(np.abs(xi) > 1e-12)
        if nz.size and xi[nz[0]] < 0:
            xi = -xi
        return PlaneClass(PlaneKind.WEAK, xi, (sv[0], sv[1]))
    return PlaneClass(PlaneKind.STRONG, x / np.linalg.norm(x), (sv[0], sv[1]))


def sectional_curvature(R_p, g_p, plane: TangentPlane, tol: float = RANK_RTOL) -> float:
    cls = classify_plane(g_p, plane, tol)
    if cls.kind is not PlaneKind.NONDEGENERATE:
        raise DegeneratePlaneError(cls.kind)
    x, y = plane.x, plane.y
    return evaluate4(R_p, x, y, y, x) / evaluate4(build_pi1(g_p), x, y, y, x)


# -- random frames ---------------------------------------------------------

def orthonormal_frame(g, rng: np.random.Generator | None = None, spread: float = 0.6):
    """Columns form a g-orthonormal basis; returns (E, signs) with E^T g E = diag(signs).

    With ``rng`` the frame is a random element of O(g) applied to the
    eigenbasis (Cayley transform of a random g-skew matrix), so boosts mixing
    timelike and spacelike directions are sampled too.
    """
    g = symmetric(g)
    w, v = np.linalg.eigh(g)
    E = v / np.sqrt(np.abs(w))
    signs = np.sign(w)
    if rng is not None:
        n = g.shape[0]
        K = rng.normal(scale=spread, size=(n, n))
        K = K - K.T
        eta = np.diag(signs)
        A = eta @ K  # eta-skew: A^T eta + eta A = 0
        L = np.linalg.solve(np.eye(n) - A, np.eye(n) + A)
        E = E @ L
        perm = rng.permutation(n)
        E, signs = E[:, perm], signs[perm]
    return E, signs


def _unit_combo(rng, vectors: np.ndarray) -> np.ndarray:
    """Random unit combination of g-orthonormal vectors of one causal sign."""
    c = rng.normal(size=vectors.shape[1])
    c /= np.linalg.norm(c)
    return vectors @ c


def sample_degenerate_planes(g_p, kind: str | PlaneKind, count: int, seed: int = 0,
                             point=None) -> list[TangentPlane]:
    """Weak: {x, xi} with x unit, xi = u + v null and orthogonal to x.
    Strong: {xi, eta} = {u1 + v1, u2 + v2}, mutually orthogonal null vectors."""
    g = symmetric(g_p)
    n = g.shape[0]
    kind = _kind(kind)
    w = np.linalg.eigvalsh(g)
    s = int((w < 0).sum())
    if point is None:
        point = np.zeros(n)
    if kind is PlaneKind.WEAK:
        if s == 0 or s == n or n < 3:
            raise SignatureError(f"no weakly degenerate planes in signature ({s},{n - s})")
        x_signs = [sg for sg, ok in ((-1.0, s >= 2), (1.0, n - s >= 2)) if ok]
    elif kind is PlaneKind.STRONG:
        if s < 2 or n - s < 2:
            raise SignatureError(f"strongly degenerate planes need s >= 2 and n - s >= 2, got ({s},{n - s})")
    else:
        raise PlaneError("kind must be weak or strong")
    rng = np.random.default_rng(seed)
    planes = []
    while len(planes) < count:
        E, signs = orthonormal_frame(g, rng)
        neg, pos = E[:, signs < 0], E[:, signs > 0]
        if kind is PlaneKind.WEAK:
            want = x_signs[rng.integers(len(x_signs))]
            pool = neg if want < 0 else pos
            x = pool[:, 0]
            rest_neg = neg[:, 1:] if want < 0 else neg
            rest_pos = pos if want < 0 else pos[:, 1:]
            xi = _unit_combo(rng, rest_pos) + _unit_combo(rng, rest_neg)
            planes.append(TangentPlane(point, x, xi))
        else:
            u = _gram_pair(rng, pos)
            v = _gram_pair(rng, neg)
            planes.append(TangentPlane(point, u[0] + v[0], u[1] + v[1]))
    return planes


def _gram_pair(rng, vectors):
    """Two orthonormal random combinations of same-sign orthonormal vectors."""
    m = vectors.shape[1]
    q, _ = np.linalg.qr(rng.normal(size=(m, 2)))
    return (vectors @ q[:, 0], vectors @ q[:, 1])


def _kind(kind) -> PlaneKind:
    if isinstance(kind, PlaneKind):
        return kind
    k = str(kind).lower()
    if k.startswith("weak"):
        return PlaneKind.WEAK
    if k.startswith("strong"):
        return PlaneKind.STRONG
    raise PlaneError(f"unknown plane kind {kind!r}")


def random_null_vectors(g, count: int, rng: np.random.Generator) -> np.ndarray:
    """Rows are isotropic vectors u + v, u unit spacelike, v unit timelike, orthogonal."""
    out = []
    for _ in range(count):
        E, signs = orthonormal_frame(g, rng)
        out.append(_unit_combo(rng, E[:, signs > 0]) + _unit_combo(rng, E[:, signs < 0]))
    return np.array(out)


# -- ratio limit along nondegenerate families ------------------------------

@dataclass(frozen=True)
class LimitEstimate:
    value: float
    error: float
    ratios: tuple[float, ...]
    ts: tuple[float, ...]
    converged: bool
    retries: int


def default_family(rng: np.random.Generator, plane0: TangentPlane):
    """alpha_t = span{x + t w1, y + t w2} with random directions w1, w2."""
    n = plane0.x.shape[0]
    w1, w2 = rng.normal(size=n), rng.normal(size=n)

    def family(t: float) -> tuple[np.ndarray, np.ndarray]:
        return plane0.x + t * w1, plane0.y + t * w2

    return family


def richardson_table(values: Sequence[float], ratio: float = 2.0) -> list[list[float]]:
    """Repeated Richardson extrapolation of v(t_k) with t_k = t0 / ratio^k, assuming a power series in t."""
    table = [list(values)]
    j = 1
    while len(table[-1]) > 1:
        prev = table[-1]
        f = ratio ** j
        table.append([(f * prev[k + 1] - prev[k]) / (f - 1.0) for k in range(len(prev) - 1)])
        j += 1
    return table


def limit_ratio_estimate(source, target, diffeo, plane0: TangentPlane,
                         family: Callable | None = None, steps: int = 8, t0: float = 1e-2,
                         seed: int = 0, max_retries: int = 5, tol: float = 1e-6) -> LimitEstimate:
    """Estimate lim K_target(f_* alpha_t) / K_source(alpha_t) as alpha_t -> plane0."""
    from .chart import curvature_bundle

    p = source.check_point(plane0.point)
    b = curvature_bundle(source, p)
    cls = classify_plane(b.metric, plane0)
    if cls.kind is PlaneKind.NONDEGENERATE:
        raise PlaneError("plane0 must be degenerate")
    q = diffeo(p)
    bt = curvature_bundle(target, q)
    J = diffeo.jacobian(p)
    rng = np.random.default_rng(seed)
    ts = [t0 * 0.5 ** k for k in range(steps + 1)]
    for attempt in range(max_retries + 1):
        fam = family if (family is not None and attempt == 0) else default_family(rng, plane0)
        ratios = []
        ok = True
        for t in ts:
            x, y = fam(t)
            try:
                plane = TangentPlane(p, x, y)
                image = TangentPlane(q, J @ x, J @ y)
                k_src = sectional_curvature(b.riemann, b.metric, plane)
                k_tgt = sectional_curvature(bt.riemann, bt.metric, image)
            except (DegeneratePlaneError, PlaneError):
                ok = False
                break
            if k_src == 0.0:
                ok = False
                break
            ratios.append(k_tgt / k_src)
        if ok:
            table = richardson_table(ratios)
            best = table[-1][0]
            prev = table[-2]
            err = abs(best - prev[-1]) if len(prev) else float("inf")
            return LimitEstimate(best, err, tuple(ratios), tuple(ts),
                                 bool(np.isfinite(err) and err <= tol * max(1.0, abs(best))), attempt)
    raise PlaneError("family left the nondegenerate locus on every retry")
