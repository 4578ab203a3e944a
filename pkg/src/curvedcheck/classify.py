"""Decomposition fits and pointwise classification of curvature tensors."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field

import numpy as np

from .planes import _kind, orthonormal_frame, sample_degenerate_planes
from .tensor_core import (build_phi, build_pi1, check_tensor4, contract_ricci, evaluate4_batch,
                          symmetric)

# default relative tolerances per derivative path
DEFAULT_TOL = {"symbolic": 1e-6, "finite-difference": 1e-3}


class FlatCurvatureError(ValueError):
    """Recurrence and the K*_n conditions require a nonflat point."""


def _scale(T) -> float:
    m = float(np.abs(T).max())
    return m if m > 0.0 else 1.0


# -- constant curvature ----------------------------------------------------

def fit_c_pi1(T, g) -> tuple[float, float]:
    """Least-squares c in T ~ c pi1; returns (c, max |T - c pi1|)."""
    T = check_tensor4(T)
    pi1 = build_pi1(g)
    c = float(np.vdot(T, pi1) / np.vdot(pi1, pi1))
    return c, float(np.abs(T - c * pi1).max())


# -- degenerate planes and orthonormal quadruples --------------------------

@dataclass(frozen=True)
class VanishingVerdict:
    passed: bool
    worst: float           # largest normalized |T(x,y,y,x)| seen
    samples: int
    kind: str
    tol: float
    worst_plane: tuple[list[float], list[float]] | None = None


def degenerate_vanishing_test(T, g, kind, samples: int = 200, tol: float = 1e-8,
                              seed: int = 0) -> VanishingVerdict:
    """Pass iff |T(x,y,y,x)| <= tol * max|T| * |x|^2 |y|^2 on every sampled degenerate plane."""
    T = check_tensor4(T)
    kind = _kind(kind)
    planes = sample_degenerate_planes(g, kind, samples, seed)
    X = np.array([pl.x for pl in planes])
    Y = np.array([pl.y for pl in planes])
    vals = evaluate4_batch(T, X, Y, Y, X)
    norms = (np.linalg.norm(X, axis=1) * np.linalg.norm(Y, axis=1)) ** 2
    tmax = float(np.abs(T).max())
    rel = np.abs(vals) / (norms * (tmax if tmax > 0 else 1.0))
    i = int(np.argmax(rel))
    return VanishingVerdict(
        passed=bool(np.all(np.abs(vals) <= tol * tmax * norms)),
        worst=float(rel[i]), samples=samples, kind=kind.value, tol=tol,
        worst_plane=(X[i].tolist(), Y[i].tolist()),
    )


@dataclass(frozen=True)
class QuadrupleVerdict:
    passed: bool
    worst: float
    samples: int
    tol: float


def orthonormal_quadruple_test(R, g, samples: int = 50, tol: float = 1e-7,
                               seed: int = 0) -> QuadrupleVerdict:
    """Evaluate R on distinct members of random g-orthonormal frames.

    Pass iff every |R(x,y,z,u)| <= tol * max|R| * |x||y||z||u| (Euclidean norms).
    """
    R = check_tensor4(R)
    n = R.shape[0]
    if n < 4:
        raise ValueError("orthonormal quadruples need dim >= 4")
    rng = np.random.default_rng(seed)
    idx = np.array([q for q in np.ndindex(n, n, n, n) if len(set(q)) == 4])
    rmax = float(np.abs(R).max())
    worst = 0.0
    passed = True
    for _ in range(samples):
        E, _ = orthonormal_frame(g, rng)
        Rf = np.einsum("ijkl,ia,jb,kc,ld->abcd", R, E, E, E, E)
        nrm = np.linalg.norm(E, axis=0)
        vals = np.abs(Rf[idx[:, 0], idx[:, 1], idx[:, 2], idx[:, 3]])
        bound = np.prod(nrm[idx], axis=1)
        passed &= bool(np.all(vals <= tol * rmax * bound))
        worst = max(worst, float((vals / (bound * (rmax if rmax > 0 else 1.0))).max()))
    return QuadrupleVerdict(passed, worst, samples, tol)


# -- quasi-constant curvature ----------------------------------------------

class QuasiStatus(str, enum.Enum):
    FITTED = "fitted"
    CONSTANT = "constant"                # Ricci proportional to g: H = N = c, V undetermined
    NOT_QUASI_CONSTANT = "not_quasi_constant"
    NON_DIAGONALIZABLE = "non_diagonalizable"
    NULL_DIRECTION = "null_direction"    # the simple eigenvector is isotropic


@dataclass(frozen=True)
class QuasiConstantFit:
    H: float
    N: float
    V: np.ndarray | None
    eps: int | None
    residual: float
    status: QuasiStatus
    eigen_residual: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status in (QuasiStatus.FITTED, QuasiStatus.CONSTANT)


def _b_form(g, V):
    gv = g @ V
    return np.outer(gv, gv)


def _canonical_sign(V):
    nz = np.flatnonzero(np.abs(V) > 1e-12 * np.abs(V).max())
    return -V if V[nz[0]] < 0 else V


def fit_quasi_constant(R, g, tol: float = 1e-6) -> QuasiConstantFit:
    """Fit R = (N - H) phi(B) + H pi1 with B = g(., V) g(., V).

    V is read off the Ricci operator: the form forces a simple eigenvalue on
    V and an (n-1)-fold one on its orthogonal complement.
    """
    R = check_tensor4(R)
    g = symmetric(g)
    n = g.shape[0]
    ginv = np.linalg.inv(g)
    S, _ = contract_ricci(R, ginv)
    scale = _scale(R)
    pi1 = build_pi1(g)

    c, res_c = fit_c_pi1(R, g)
    ric_op = ginv @ S
    s_scale = max(float(np.abs(S).max()), scale)
    if np.abs(S - (np.trace(ric_op) / n) * g).max() <= tol * s_scale:
        return QuasiConstantFit(c, c, None, None, res_c, QuasiStatus.CONSTANT)

    w, vecs = np.linalg.eig(ric_op)
    if np.abs(w.imag).max() > tol * s_scale:
        return QuasiConstantFit(np.nan, np.nan, None, None, np.inf, QuasiStatus.NON_DIAGONALIZABLE)
    w = w.real
    # the eigenvalue farthest from the rest is the candidate simple one
    best = None
    for k in range(n):
        others = np.delete(w, k)
        spread = others.max() - others.min()
        if best is None or spread < best[1]:
            best = (k, spread)
    k, spread = best
    lam_rest = float(np.mean(np.delete(w, k)))
    if spread > np.sqrt(tol) * s_scale:
        return _not_quasi(R, g, pi1, ric_op, w[k])
    # (n-1)-fold eigenvalue must have a full eigenspace
    rank = np.linalg.matrix_rank(ric_op - lam_rest * np.eye(n), tol=np.sqrt(tol) * s_scale)
    if rank != 1:
        return QuasiConstantFit(np.nan, np.nan, None, None, np.inf, QuasiStatus.NON_DIAGONALIZABLE)
    # V spans the image of (Ric - lam_rest): more stable than the raw eigenvector
    u, sv, _ = np.linalg.svd(ric_op - lam_rest * np.eye(n))
    V = u[:, 0]
    gvv = float(V @ g @ V)
    if abs(gvv) <= 1e-8 * np.linalg.norm(g, 2) * (V @ V):
        return QuasiConstantFit(np.nan, np.nan, V, None, np.inf, QuasiStatus.NULL_DIRECTION)
    V = _canonical_sign(V / np.sqrt(abs(gvv)))
    eps = 1 if gvv > 0 else -1
    phiB = build_phi(g, _b_form(g, V))
    A = np.stack([phiB.ravel(), pi1.ravel()], axis=1)
    (a, h), *_ = np.linalg.lstsq(A, R.ravel(), rcond=None)
    H, N = float(h), float(a + h)
    residual = float(np.abs(R - (N - H) * phiB - H * pi1).max())
    # eigenvalue relations implied by the form, checked afterwards
    lam_v = (n - 1) * ((N - H) * eps + H)
    lam_perp = (N - H) * eps + (n - 1) * H
    eig_res = max(abs(w[k] - lam_v), abs(lam_rest - lam_perp))
    return QuasiConstantFit(H, N, V, eps, residual, QuasiStatus.FITTED, float(eig_res))


def _not_quasi(R, g, pi1, ric_op, lam):
    # report the residual of the best fit along the most isolated eigenvector anyway
    w, vecs = np.linalg.eig(ric_op)
    V = vecs[:, int(np.argmin(np.abs(w - lam)))].real
    gvv = float(V @ g @ V)
    if abs(gvv) > 1e-12:
        V = V / np.sqrt(abs(gvv))
        phiB = build_phi(g, _b_form(g, V))
        A = np.stack([phiB.ravel(), pi1.ravel()], axis=1)
        coef, *_ = np.linalg.lstsq(A, R.ravel(), rcond=None)
        residual = float(np.abs(R - (A @ coef).reshape(R.shape)).max())
    else:
        residual = float(np.abs(R).max())
    return QuasiConstantFit(np.nan, np.nan, None, None, residual, QuasiStatus.NOT_QUASI_CONSTANT)


def reassemble_quasi_constant(fit: QuasiConstantFit, g) -> np.ndarray:
    g = symmetric(g)
    if fit.V is None:
        return fit.H * build_pi1(g)
    return (fit.N - fit.H) * build_phi(g, _b_form(g, fit.V)) + fit.H * build_pi1(g)


# -- recurrence and K*_n -----------------------------------------------------

class RecurrenceMode(str, enum.Enum):
    RECURRENT = "Recurrent"
    SYMMETRIC_KN_STAR = "SymmetricKnStar"
    SYMMETRIC = "Symmetric"
    NONE = "None"


@dataclass(frozen=True)
class RecurrenceFit:
    mode: RecurrenceMode
    alpha: np.ndarray | None
    residual: float
    nabla_norm: float
    kernel_dim: int = 0


def cyclic_alpha_matrix(R) -> np.ndarray:
    """Rows: the linear conditions sum_cycl(X,Y,Z) alpha(X) R(Y,Z,U,V) = 0 on alpha."""
    n = R.shape[0]
    M = np.zeros((n,) * 5 + (n,))
    eye = np.eye(n)
    # alpha_x R_yzuv + alpha_y R_zxuv + alpha_z R_xyuv
    M += np.einsum("xa,yzuv->xyzuva", eye, R)
    M += np.einsum("ya,zxuv->xyzuva", eye, R)
    M += np.einsum("za,xyuv->xyzuva", eye, R)
    return M.reshape(-1, n)


def cyclic_alpha_kernel(R, rtol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis (rows) of alphas satisfying the cyclic condition."""
    M = cyclic_alpha_matrix(R)
    _, sv, vt = np.linalg.svd(M)
    top = sv[0] if sv.size and sv[0] > 0 else 1.0
    full = np.zeros(M.shape[1])
    full[: sv.size] = sv
    return vt[full <= rtol * top]


def recurrence_from_tensors(R, nabla_r, tol: float = 1e-6, flat_tol: float = 1e-12,
                            alpha_floor: float = 1e-8) -> RecurrenceFit:
    R = check_tensor4(R)
    rmax = float(np.abs(R).max())
    if rmax <= flat_tol:
        raise FlatCurvatureError("curvature vanishes: K*_n needs a nonflat point")
    nmax = float(np.abs(nabla_r).max())
    if nmax <= tol * rmax:
        ker = cyclic_alpha_kernel(R)
        if len(ker):
            alpha = _canonical_sign(ker[0])
            return RecurrenceFit(RecurrenceMode.SYMMETRIC_KN_STAR, alpha, nmax / rmax, nmax, len(ker))
        return RecurrenceFit(RecurrenceMode.SYMMETRIC, None, nmax / rmax, nmax, 0)
    rr = float(np.vdot(R, R))
    alpha = np.einsum("aijkl,ijkl->a", nabla_r, R) / rr
    resid = float(np.abs(nabla_r - np.einsum("a,ijkl->aijkl", alpha, R)).max()) / nmax
    if resid < tol and np.abs(alpha).max() > alpha_floor:
        return RecurrenceFit(RecurrenceMode.RECURRENT, alpha, resid, nmax)
    return RecurrenceFit(RecurrenceMode.NONE, alpha, resid, nmax)


def fit_recurrence(chart, p, tol: float | None = None) -> RecurrenceFit:
    from .chart import curvature_bundle

    if tol is None:
        tol = DEFAULT_TOL[chart.derivative_path]
    b = curvature_bundle(chart, p, with_nabla=True)
    return recurrence_from_tensors(b.riemann, b.nabla_riemann, tol)


# -- pointwise report ------------------------------------------------------

@dataclass
class ClassificationReport:
    point: list[float]
    derivative_path: str
    verdicts: dict[str, bool]
    tag: str
    c: float
    H: float | None
    N: float | None
    V: list[float] | None
    eps: int | None
    alpha: list[float] | None
    recurrence_mode: str
    quasi_status: str
    residuals: dict[str, float]
    tolerances: dict[str, float]
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


STRUCTURE_VERDICTS = ("constant_curvature", "quasi_constant", "conformally_flat",
                      "recurrent", "symmetric_kn_star")


def classify_point(chart, p, tolerances: dict | None = None) -> ClassificationReport:
    """Run every fit at p. Verdicts are independent of each other."""
    from .chart import curvature_bundle

    tol = DEFAULT_TOL[chart.derivative_path]
    tols = {"constant": tol, "quasi": tol, "weyl": tol, "recurrence": tol}
    tols.update(tolerances or {})
    b = curvature_bundle(chart, p, with_nabla=True)
    R, g = b.riemann, b.metric
    scale = _scale(R)
    notes: list[str] = []

    c, res_c = fit_c_pi1(R, g)
    quasi = fit_quasi_constant(R, g, tols["quasi"])
    if b.weyl is not None:
        conf_res = float(np.abs(b.weyl).max())
        conf_name = "weyl"
    else:
        conf_res = float(np.abs(b.cotton).max())
        conf_name = "cotton"
    verdicts = {
        "constant_curvature": res_c <= tols["constant"] * scale,
        "quasi_constant": quasi.ok and quasi.residual <= tols["quasi"] * scale,
        "conformally_flat": conf_res <= tols["weyl"] * scale,
    }
    try:
        rec = recurrence_from_tensors(R, b.nabla_riemann, tols["recurrence"])
        verdicts["recurrent"] = rec.mode is RecurrenceMode.RECURRENT
        verdicts["symmetric_kn_star"] = rec.mode is RecurrenceMode.SYMMETRIC_KN_STAR
        mode, alpha, rec_res = rec.mode.value, rec.alpha, rec.residual
    except FlatCurvatureError:
        verdicts["recurrent"] = verdicts["symmetric_kn_star"] = False
        mode, alpha, rec_res = "Flat", None, 0.0
        notes.append("flat point: K*_n conditions do not apply")
    if quasi.status is QuasiStatus.CONSTANT:
        notes.append("Ricci proportional to g: quasi-constant fit degenerates to H = N = c, V undetermined")
    tag = "generic" if not any(verdicts[k] for k in STRUCTURE_VERDICTS) else \
        next(k for k in STRUCTURE_VERDICTS if verdicts[k])
    return ClassificationReport(
        point=[float(v) for v in b.point], derivative_path=b.derivative_path,
        verdicts={k: bool(v) for k, v in verdicts.items()}, tag=tag,
        c=c,
        H=None if np.isnan(quasi.H) else quasi.H,
        N=None if np.isnan(quasi.N) else quasi.N,
        V=None if quasi.V is None else [float(v) for v in quasi.V],
        eps=quasi.eps,
        alpha=None if alpha is None else [float(a) for a in alpha],
        recurrence_mode=mode, quasi_status=quasi.status.value,
        residuals={"constant": res_c, "quasi": float(quasi.residual), conf_name: conf_res,
                   "recurrence": float(rec_res), "scale": scale},
        tolerances=tols, notes=notes,
    )
