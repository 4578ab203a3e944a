"""Dense (0,4) tensor algebra on small dimensions.

Tensors are plain float64 numpy arrays: bilinear forms have shape (n, n),
curvature-like tensors (n, n, n, n), covariant derivatives of those
(n, n, n, n, n) with the derivative slot first. ``T[i, j, k, l]`` is
``T(e_i, e_j, e_k, e_l)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_DIM, MAX_DIM = 3, 6


class DimensionError(ValueError):
    pass


def _square(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def symmetric(a) -> np.ndarray:
    """Return ``a`` as an exactly symmetric bilinear form."""
    a = _square(a, "bilinear form")
    return 0.5 * (a + a.T)


def check_tensor4(T, dim: int | None = None) -> np.ndarray:
    T = np.asarray(T, dtype=np.float64)
    n = T.shape[0] if T.ndim else 0
    if T.ndim != 4 or T.shape != (n,) * 4:
        raise DimensionError(f"expected a (n,n,n,n) tensor, got shape {T.shape}")
    if dim is not None and n != dim:
        raise DimensionError(f"tensor dimension {n} does not match {dim}")
    if not np.all(np.isfinite(T)):
        raise ValueError("tensor has non-finite entries")
    return T


def build_pi1(g) -> np.ndarray:
    """pi1(z,u,v,w) = g(z,w) g(u,v) - g(z,v) g(u,w)."""
    g = _square(g, "metric")
    return np.einsum("zw,uv->zuvw", g, g) - np.einsum("zv,uw->zuvw", g, g)


def build_phi(g, Q) -> np.ndarray:
    """phi(Q)(x,y,z,u) = g(x,u)Q(y,z) - g(x,z)Q(y,u) + g(y,z)Q(x,u) - g(y,u)Q(x,z)."""
    g = _square(g, "metric")
    Q = _square(Q, "Q")
    if g.shape != Q.shape:
        raise DimensionError(f"metric is {g.shape} but Q is {Q.shape}")
    return (np.einsum("xu,yz->xyzu", g, Q) - np.einsum("xz,yu->xyzu", g, Q)
            + np.einsum("yz,xu->xyzu", g, Q) - np.einsum("yu,xz->xyzu", g, Q))


@dataclass(frozen=True)
class SymmetryReport:
    """Max-norm violations of the curvature-like identities."""

    skew_first: float    # T(x,y,z,u) + T(y,x,z,u)
    bianchi: float       # T(x,y,z,u) + T(y,z,x,u) + T(z,x,y,u)
    skew_last: float     # T(x,y,z,u) + T(x,y,u,z)
    pair: float          # T(x,y,z,u) - T(z,u,x,y)
    tol: float

    @property
    def max_violation(self) -> float:
        return max(self.skew_first, self.bianchi, self.skew_last, self.pair)

    @property
    def passed(self) -> bool:
        return self.max_violation < self.tol


def check_curvature_symmetries(T, tol: float = 1e-10) -> SymmetryReport:
    T = check_tensor4(T)
    return SymmetryReport(
        skew_first=float(np.abs(T + T.transpose(1, 0, 2, 3)).max()),
        bianchi=float(np.abs(T + T.transpose(1, 2, 0, 3) + T.transpose(2, 0, 1, 3)).max()),
        skew_last=float(np.abs(T + T.transpose(0, 1, 3, 2)).max()),
        pair=float(np.abs(T - T.transpose(2, 3, 0, 1)).max()),
        tol=tol,
    )


def contract_ricci(T, g_inv) -> tuple[np.ndarray, float]:
    """S(y,z) = sum g^{ik} T(e_i, y, z, e_k) and its trace."""
    T = check_tensor4(T)
    g_inv = _square(g_inv, "inverse metric")
    if g_inv.shape[0] != T.shape[0]:
        raise DimensionError("inverse metric and tensor dimensions differ")
    if abs(np.linalg.det(g_inv)) < 1e-300 or np.linalg.cond(g_inv) > 1e14:
        raise np.linalg.LinAlgError("singular inverse metric")
    S = symmetric(np.einsum("ik,iyzk->yz", g_inv, T))
    return S, float(np.einsum("yz,yz->", g_inv, S))


def weyl_tensor(R, g, S=None, tau=None) -> np.ndarray:
    """C = R - phi(S)/(n-2) + tau pi1/((n-1)(n-2))."""
    R = check_tensor4(R)
    g = _square(g, "metric")
    n = g.shape[0]
    if n < 3:
        raise DimensionError("the Weyl tensor needs n >= 3")
    if S is None or tau is None:
        S, tau = contract_ricci(R, np.linalg.inv(g))
    return R - build_phi(g, S) / (n - 2) + tau * build_pi1(g) / ((n - 1) * (n - 2))


def evaluate4(T, x, y, z, u) -> float:
    return float(np.einsum("ijkl,i,j,k,l->", T, x, y, z, u))


def evaluate4_batch(T, X, Y, Z, U) -> np.ndarray:
    """T(x_m, y_m, z_m, u_m) for row-stacked vectors."""
    return np.einsum("ijkl,mi,mj,mk,ml->m", T, X, Y, Z, U)
