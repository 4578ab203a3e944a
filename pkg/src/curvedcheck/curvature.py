"""Levi-Civita curvature from metric jets.

Conventions: R(X,Y)Z = [nabla_X, nabla_Y]Z - nabla_[X,Y] Z and
R(x,y,z,u) = g(R(x,y)z, u), which makes R(x,y,y,x)/pi1(x,y,y,x) = +1 on
the unit sphere. Index layouts: ``gamma[l, i, j] = Gamma^l_ij``,
``riemann[i, j, k, l] = R(d_i, d_j, d_k, d_l)``,
``nabla_r[a, i, j, k, l] = (nabla_a R)(d_i, d_j, d_k, d_l)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_core import build_phi, build_pi1, contract_ricci, symmetric


@dataclass(frozen=True)
class _Connection:
    g: np.ndarray
    ginv: np.ndarray
    gamma: np.ndarray
    gamma_low: np.ndarray
    dginv: np.ndarray
    dgamma: np.ndarray
    dgamma_low: np.ndarray
    riemann_up: np.ndarray   # R^l_{kij}, stored [l, k, i, j]
    riemann: np.ndarray


def connection(g, dg, d2g) -> _Connection:
    ginv = np.linalg.inv(g)
    gamma_low = 0.5 * (np.einsum("ikj->kij", dg) + np.einsum("jki->kij", dg) - dg)
    gamma = np.einsum("lk,kij->lij", ginv, gamma_low)
    dgamma_low = 0.5 * (np.einsum("aikj->akij", d2g) + np.einsum("ajki->akij", d2g) - d2g)
    dginv = -np.einsum("lp,apq,qk->alk", ginv, dg, ginv)
    dgamma = (np.einsum("alk,kij->alij", dginv, gamma_low)
              + np.einsum("lk,akij->alij", ginv, dgamma_low))
    # R^l_{kij} = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik
    d_i = np.einsum("iljk->lkij", dgamma)
    quad = np.einsum("lim,mjk->lkij", gamma, gamma)
    riemann_up = d_i - d_i.transpose(0, 1, 3, 2) + quad - quad.transpose(0, 1, 3, 2)
    riemann = np.einsum("lm,mkij->ijkl", g, riemann_up)
    return _Connection(g, ginv, gamma, gamma_low, dginv, dgamma, dgamma_low, riemann_up, riemann)


def nabla_riemann(con: _Connection, dg, d2g, d3g) -> np.ndarray:
    g, ginv, gamma, gamma_low = con.g, con.ginv, con.gamma, con.gamma_low
    d2gamma_low = 0.5 * (np.einsum("abikj->abkij", d3g) + np.einsum("abjki->abkij", d3g) - d3g)
    h = np.einsum("lp,apq,qk->alk", ginv, dg, ginv)  # G dg_a G
    d2ginv = (np.einsum("alp,pq,bqk->ablk", h, g, h)
              + np.einsum("blp,pq,aqk->ablk", h, g, h)
              - np.einsum("lp,abpq,qk->ablk", ginv, d2g, ginv))
    d2gamma = (np.einsum("ablk,kij->ablij", d2ginv, gamma_low)
               + np.einsum("alk,bkij->ablij", con.dginv, con.dgamma_low)
               + np.einsum("blk,akij->ablij", con.dginv, con.dgamma_low)
               + np.einsum("lk,abkij->ablij", ginv, d2gamma_low))
    dgamma = con.dgamma
    d_i = np.einsum("ailjk->alkij", d2gamma)
    quad = (np.einsum("alim,mjk->alkij", dgamma, gamma)
            + np.einsum("lim,amjk->alkij", gamma, dgamma))
    d_riemann_up = d_i - d_i.transpose(0, 1, 2, 4, 3) + quad - quad.transpose(0, 1, 2, 4, 3)
    d_riemann = (np.einsum("alm,mkij->aijkl", dg, con.riemann_up)
                 + np.einsum("lm,amkij->aijkl", g, d_riemann_up))
    R = con.riemann
    return (d_riemann
            - np.einsum("mai,mjkl->aijkl", gamma, R)
            - np.einsum("maj,imkl->aijkl", gamma, R)
            - np.einsum("mak,ijml->aijkl", gamma, R)
            - np.einsum("mal,ijkm->aijkl", gamma, R))


def weyl_from(R, g, S, tau) -> np.ndarray:
    n = g.shape[0]
    return R - build_phi(g, S) / (n - 2) + tau * build_pi1(g) / ((n - 1) * (n - 2))


def cotton_from(nabla_r, g, ginv) -> np.ndarray:
    """(nabla_X A)(Y,Z) - (nabla_Y A)(X,Z) with A = S - tau/(2(n-1)) g."""
    n = g.shape[0]
    dS = np.einsum("ik,aiyzk->ayz", ginv, nabla_r)
    dtau = np.einsum("yz,ayz->a", ginv, dS)
    dA = dS - np.einsum("a,yz->ayz", dtau, g) / (2 * (n - 1))
    return dA - dA.transpose(1, 0, 2)


def hessian(gamma, grad, hess_partial) -> np.ndarray:
    """Covariant Hessian of a scalar: d_i d_j f - Gamma^k_ij d_k f."""
    return symmetric(hess_partial - np.einsum("kij,k->ij", gamma, grad))


def ricci_parts(R, ginv):
    return contract_ricci(R, ginv)
