"""Independent reference computations used only by the tests.

None of these go through the package's jet/tape/curvature pipeline.
"""

from __future__ import annotations

import numpy as np

from curvedcheck import expr as ex

# 4th-order central first-derivative stencil
_C4 = ((-2, 1.0 / 12), (-1, -8.0 / 12), (1, 8.0 / 12), (2, -1.0 / 12))


def _d(fn, p, a, h):
    acc = 0.0
    for k, w in _C4:
        q = np.array(p, dtype=float)
        q[a] += k * h
        acc = acc + w * fn(q)
    return acc / h


def christoffel_fd(metric_fn, p, h=1e-3):
    """Gamma^l_ij by explicit loops over a numerically differentiated metric."""
    n = len(p)
    dg = [_d(metric_fn, p, a, h) for a in range(n)]
    ginv = np.linalg.inv(metric_fn(np.asarray(p, dtype=float)))
    gam = np.zeros((n, n, n))
    for l in range(n):
        for i in range(n):
            for j in range(n):
                s = 0.0
                for k in range(n):
                    s += ginv[l, k] * (dg[i][k, j] + dg[j][k, i] - dg[k][i, j])
                gam[l, i, j] = 0.5 * s
    return gam


def riemann_fd(metric_fn, p, h_outer=1e-2, h_inner=1e-3):
    """R(d_i,d_j,d_k,d_l) = g_lm (d_i G^m_jk - d_j G^m_ik + G^m_ip G^p_jk - G^m_jp G^p_ik)."""
    n = len(p)
    gam = christoffel_fd(metric_fn, p, h_inner)
    dgam = [_d(lambda q: christoffel_fd(metric_fn, q, h_inner), p, a, h_outer) for a in range(n)]
    g = metric_fn(np.asarray(p, dtype=float))
    up = np.zeros((n, n, n, n))  # [m, k, i, j]
    for m in range(n):
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    v = dgam[i][m, j, k] - dgam[j][m, i, k]
                    for q in range(n):
                        v += gam[m, i, q] * gam[q, j, k] - gam[m, j, q] * gam[q, i, k]
                    up[m, k, i, j] = v
    R = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    R[i, j, k, l] = sum(g[l, m] * up[m, k, i, j] for m in range(n))
    return R


def pi1_loops(g):
    n = g.shape[0]
    T = np.zeros((n,) * 4)
    for x, y, z, u in np.ndindex(n, n, n, n):
        T[x, y, z, u] = g[x, u] * g[y, z] - g[x, z] * g[y, u]
    return T


def gauss_riemann(X, eta, p):
    """Curvature of the hypersurface X: U -> R^{n+1}_eta via the Gauss equation.

    R(a,b,c,d) = e (h_ad h_bc - h_ac h_bd), e = <N,N>, h = second fundamental form.
    Returns (g, R).
    """
    p = list(map(float, p))
    n = len(p)
    eta = np.diag(eta)
    J = np.array([[ex.evaluate(Xa.diff(a), p) for a in range(n)] for Xa in X])
    H2 = np.array([[[ex.evaluate(ex.derivative(Xa, (a, b)), p) for b in range(n)] for a in range(n)]
                   for Xa in X])
    g = J.T @ eta @ J
    _, _, vt = np.linalg.svd(J.T @ eta)
    N = vt[-1]
    e = float(N @ eta @ N)
    N = N / np.sqrt(abs(e))
    e = np.sign(e)
    h = np.einsum("Aab,AB,B->ab", H2, eta, N)
    R = e * (np.einsum("ad,bc->abcd", h, h) - np.einsum("ac,bd->abcd", h, h))
    return g, R


def example2_true_HN(fp, fpp, r):
    """Hand-derived quasi-constant data of the example2 hypersurface, g = (1+f'^2) dr^2 + r^2 g_S."""
    w = 1.0 + fp * fp
    return fp * fp / (r * r * w), fp * fpp / (r * w * w)


def cyclic_kernel_bruteforce(R, rtol=1e-8):
    """Dimension of {alpha : alpha_x R_yzuv + alpha_y R_zxuv + alpha_z R_xyuv = 0} by explicit loops."""
    n = R.shape[0]
    rows = []
    for x, y, z, u, v in np.ndindex(n, n, n, n, n):
        row = np.zeros(n)
        row[x] += R[y, z, u, v]
        row[y] += R[z, x, u, v]
        row[z] += R[x, y, u, v]
        if np.any(row):
            rows.append(row)
    if not rows:
        return n
    sv = np.linalg.svd(np.array(rows), compute_uv=False)
    return int(n - (sv > rtol * sv[0]).sum())


def random_metric_dsl(rng, n=4, s=1, amp=0.12):
    """Random trig/polynomial perturbation of diag(eps) as DSL text."""
    funcs = ["sin", "cos"]
    lines = [f"dim={n};"]
    for i in range(n):
        for j in range(i, n):
            base = (-1.0 if i < s else 1.0) if i == j else 0.0
            a, b = rng.integers(n, size=2)
            c1, c2 = (float(v) for v in np.round(rng.uniform(-amp, amp, size=2), 4))
            f = funcs[rng.integers(2)]
            k = int(rng.integers(1, 3))
            term = f"{c1!r}*{f}(x{a} + {rng.uniform(-1, 1):.3f}*x{b}) + {c2!r}*x{a}^{k}*x{b}"
            lines.append(f"g[{i}][{j}]={base!r} + {term};")
    return "\n".join(lines)


def random_poly_sigma(rng, n=4, amp=0.3):
    terms = [f"{rng.uniform(-amp, amp):.4f}"]
    for a in range(n):
        terms.append(f"{rng.uniform(-amp, amp):.4f}*x{a}")
        b = int(rng.integers(n))
        terms.append(f"{rng.uniform(-amp, amp):.4f}*x{a}*x{b}")
    return " + ".join(terms)


def random_curvature_like(rng, n, terms=3):
    """Sum of Gauss-type tensors h_ad h_bc - h_ac h_bd: antisymmetric pairs, Bianchi, pair symmetry."""
    T = np.zeros((n,) * 4)
    for _ in range(terms):
        h = rng.normal(size=(n, n))
        h = h + h.T
        T += rng.normal() * (np.einsum("ad,bc->abcd", h, h) - np.einsum("ac,bd->abcd", h, h))
    return T


def random_metric_matrix(rng, n, s):
    """Constant symmetric matrix of signature (s, n - s), eigenvalue magnitudes in [0.5, 2]."""
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    lam = rng.uniform(0.5, 2.0, size=n) * np.array([-1.0] * s + [1.0] * (n - s))
    return Q @ np.diag(lam) @ Q.T
