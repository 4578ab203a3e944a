import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvedcheck.tensor_core import (DimensionError, build_phi, build_pi1, check_curvature_symmetries,
                                     check_tensor4, contract_ricci, evaluate4, weyl_tensor)

import oracles

E = np.eye(4)


@pytest.mark.parametrize("g, want", [(np.eye(3), 1.0), (np.diag([-1.0, 1, 1]), -1.0)])
def test_pi1_on_coordinate_pair(g, want):
    e = np.eye(3)
    assert evaluate4(build_pi1(g), e[0], e[1], e[1], e[0]) == want


def test_pi1_vanishes_for_repeated_vector():
    g = oracles.random_metric_matrix(np.random.default_rng(1), 4, 2)
    x = np.array([0.3, -1.0, 2.0, 0.5])
    assert abs(evaluate4(build_pi1(g), x, x, x, x)) < 1e-13


def test_pi1_matches_loop_oracle():
    g = oracles.random_metric_matrix(np.random.default_rng(2), 5, 2)
    assert np.abs(build_pi1(g) - oracles.pi1_loops(g)).max() < 1e-13


def test_phi_of_metric_is_twice_pi1():
    g = oracles.random_metric_matrix(np.random.default_rng(3), 4, 1)
    assert np.abs(build_phi(g, g) - 2 * build_pi1(g)).max() < 1e-12
    assert not np.any(build_phi(g, np.zeros((4, 4))))


def test_phi_matches_loop_oracle_for_b_form():
    g = np.diag([-1.0, 1, 1, 1])
    V = E[2]
    gv = g @ V
    B = np.outer(gv, gv)
    want = np.zeros((4,) * 4)
    for x, y, z, u in np.ndindex(4, 4, 4, 4):
        want[x, y, z, u] = (g[x, u] * B[y, z] - g[x, z] * B[y, u] + g[y, z] * B[x, u] - g[y, u] * B[x, z])
    assert np.array_equal(build_phi(g, B), want)


@pytest.mark.parametrize("n, s", [(3, 0), (3, 1), (4, 2), (5, 1), (6, 3)])
def test_builders_are_curvature_like(n, s):
    rng = np.random.default_rng(n * 10 + s)
    g = oracles.random_metric_matrix(rng, n, s)
    Q = rng.normal(size=(n, n))
    Q = Q + Q.T
    for T in (build_pi1(g), build_phi(g, Q)):
        rep = check_curvature_symmetries(T)
        assert rep.max_violation < 1e-12 * max(1.0, np.abs(T).max())
        assert rep.passed


def test_single_entry_perturbation_detected():
    T = build_pi1(np.diag([-1.0, 1, 1, 1]))
    T[0, 1, 2, 3] += 1.0
    rep = check_curvature_symmetries(T)
    assert not rep.passed
    assert max(rep.bianchi, rep.skew_last, rep.skew_first) >= 1.0


@pytest.mark.parametrize("n", [3, 4, 6])
def test_contract_pi1(n):
    g = oracles.random_metric_matrix(np.random.default_rng(n), n, 1)
    S, tau = contract_ricci(build_pi1(g), np.linalg.inv(g))
    assert np.abs(S - (n - 1) * g).max() < 1e-10
    assert tau == pytest.approx(n * (n - 1), rel=1e-12)
    S0, tau0 = contract_ricci(np.zeros((n,) * 4), np.linalg.inv(g))
    assert not np.any(S0) and tau0 == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 6), st.integers(0, 6), st.integers(0, 2 ** 31 - 1))
def test_contract_phi_identity(n, s, seed):
    s = min(s, n)
    rng = np.random.default_rng(seed)
    g = oracles.random_metric_matrix(rng, n, s)
    Q = rng.normal(size=(n, n))
    Q = Q + Q.T
    ginv = np.linalg.inv(g)
    S, _ = contract_ricci(build_phi(g, Q), ginv)
    want = (n - 2) * Q + np.trace(ginv @ Q) * g
    assert np.abs(S - want).max() < 1e-9 * max(1.0, np.abs(want).max())


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 6), st.integers(0, 2 ** 31 - 1))
def test_weyl_is_traceless(n, seed):
    rng = np.random.default_rng(seed)
    g = oracles.random_metric_matrix(rng, n, int(rng.integers(0, n + 1)))
    C = weyl_tensor(oracles.random_curvature_like(rng, n), g)
    S, _ = contract_ricci(C, np.linalg.inv(g))
    assert np.abs(S).max() < 1e-8 * max(1.0, np.abs(C).max())


def test_shape_errors():
    with pytest.raises(DimensionError):
        check_tensor4(np.zeros((3, 3, 3)))
    with pytest.raises(DimensionError):
        build_phi(np.eye(3), np.eye(4))
    with pytest.raises(np.linalg.LinAlgError):
        contract_ricci(np.zeros((3,) * 4), np.diag([1.0, 0.0, 1.0]))
