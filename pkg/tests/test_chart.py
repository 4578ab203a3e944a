import numpy as np
import pytest

from curvedcheck import registry as reg
from curvedcheck.chart import (ChartError, DegenerateMetricError, MetricChart, covariant_derivative_R,
                               curvature_bundle, signature_at, signature_of)
from curvedcheck.conformal import conformal_chart
from curvedcheck import expr as ex
from curvedcheck.dsl import parse_expression
from curvedcheck.tensor_core import build_phi, build_pi1, check_curvature_symmetries, contract_ricci

import oracles


def test_flat_bundle_is_zero():
    chart = reg.flat(1, 4)
    b = curvature_bundle(chart, [0.1, 0.2, -0.3, 0.4])
    assert not np.any(b.riemann) and not np.any(b.weyl) and b.scalar == 0.0
    assert not np.any(covariant_derivative_R(chart, [0, 0, 0, 0]))


@pytest.mark.parametrize("s", [0, 1, 2])
def test_unit_sphere_sign_convention(s):
    """K = +1 on the unit sphere fixes the sign; indefinite models follow the same R = c pi1."""
    chart = reg.constant_curvature(1.0, s, 3)
    p = [0.1, -0.2, 0.15]
    b = curvature_bundle(chart, p)
    assert np.abs(b.riemann - build_pi1(b.metric)).max() < 1e-12
    assert b.weyl is None and np.abs(b.cotton).max() < 1e-10


def test_constant_curvature_against_independent_fd_oracle():
    chart = reg.constant_curvature(-0.8, 1, 4)
    p = np.array([0.2, -0.1, 0.3, 0.05])
    R = curvature_bundle(chart, p).riemann
    Rf = oracles.riemann_fd(chart.metric, p)
    assert np.abs(R - Rf).max() < 1e-6
    assert np.abs(R + 0.8 * build_pi1(chart.metric(p))).max() < 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_random_metric_against_fd_oracle(seed):
    rng = np.random.default_rng(seed)
    chart = MetricChart.from_dsl(oracles.random_metric_dsl(rng, s=seed % 3), [(-0.5, 0.5)] * 4)
    p = chart.sample_points(1, seed)[0]
    R = curvature_bundle(chart, p).riemann
    Rf = oracles.riemann_fd(chart.metric, p)
    assert np.abs(R - Rf).max() < 1e-6 * max(1.0, np.abs(R).max())


@pytest.mark.parametrize("seed", range(3))
def test_bianchi_symbolic_and_fd(seed):
    rng = np.random.default_rng(100 + seed)
    chart = MetricChart.from_dsl(oracles.random_metric_dsl(rng, s=1), [(-0.5, 0.5)] * 4)
    p = chart.sample_points(1, seed)[0]
    assert check_curvature_symmetries(curvature_bundle(chart, p).riemann).bianchi < 1e-8
    fd = curvature_bundle(chart.with_finite_differences(), p)
    assert fd.derivative_path == "finite-difference"
    assert check_curvature_symmetries(fd.riemann).bianchi < 1e-4


def test_fd_path_agrees_with_symbolic():
    chart = reg.generic22()
    p = [0.1, 0.2, -0.1, 0.3]
    a = curvature_bundle(chart, p, with_nabla=True)
    b = curvature_bundle(chart.with_finite_differences(), p, with_nabla=True)
    assert np.abs(a.riemann - b.riemann).max() < 1e-6
    assert np.abs(a.nabla_riemann - b.nabla_riemann).max() < 1e-3


def test_weyl_conformal_covariance():
    chart = reg.generic22()
    sigma = parse_expression("0.3*x0 - 0.2*x1*x2 + 0.1*sin(x3)", 4)
    bar = conformal_chart(chart, sigma)
    for p in chart.sample_points(3, seed=5):
        w = curvature_bundle(chart, p).weyl
        wb = curvature_bundle(bar, p).weyl
        scale = np.exp(2 * ex.evaluate(sigma, p))
        assert np.abs(wb - scale * w).max() < 1e-6 * np.abs(wb).max()


def test_weyl_traceless_on_chart():
    chart = reg.generic22()
    b = curvature_bundle(chart, [0.0, 0.1, 0.2, -0.2])
    S, _ = contract_ricci(b.weyl, b.metric_inv)
    assert np.abs(S).max() < 1e-8


def test_dimension_three_has_cotton():
    chart = MetricChart.from_dsl("dim=3; g[0][0]=-1-0.3*x1^2; g[1][1]=1+0.2*sin(x0); g[2][2]=exp(x1*x2)")
    b = curvature_bundle(chart, [0.1, 0.2, 0.3])
    assert b.weyl is None and b.cotton is not None and np.abs(b.cotton).max() > 1e-3
    b4 = curvature_bundle(reg.generic22(), [0, 0, 0, 0])
    assert b4.cotton is None and b4.weyl is not None


def test_constant_curvature_is_parallel():
    chart = reg.constant_curvature(1.0, 2, 4)
    assert np.abs(covariant_derivative_R(chart, [0.1, 0.2, -0.1, 0.0])).max() < 1e-12
    fd = chart.with_finite_differences()
    assert np.abs(covariant_derivative_R(fd, [0.1, 0.2, -0.1, 0.0])).max() < 1e-6


def test_ppwave_nabla_r_closed_form():
    chart = reg.ppwave("exp(u)", 4)
    p = [0.3, 0.1, -0.4, 0.2]
    b = curvature_bundle(chart, p, with_nabla=True)
    du = np.array([1.0, 0, 0, 0])
    want = np.einsum("a,ijkl->aijkl", du, b.riemann)
    assert np.abs(b.nabla_riemann - want).max() < 1e-6 * np.abs(want).max()
    # closed form R = -h(u) phi(du (x) du)
    assert np.abs(b.riemann + np.exp(0.3) * build_phi(b.metric, np.outer(du, du))).max() < 1e-12


@pytest.mark.parametrize("g, want", [(np.diag([-1.0, -1, 1, 1]), (2, 2)), (np.eye(3), (0, 3))])
def test_signature_of(g, want):
    assert signature_of(g) == want


def test_signature_at_example2():
    chart = reg.example2()
    assert signature_at(chart, [0.05, -0.1, 0.08, 1.0]) == (2, 2)


def test_degenerate_metric_rejected():
    with pytest.raises(DegenerateMetricError):
        signature_of(np.diag([1.0, 1e-14, 1.0]))
    with pytest.raises(ChartError):
        MetricChart.from_dsl("dim=3; g[0][0]=x0; g[1][1]=1; g[2][2]=1")


def test_point_validation():
    chart = reg.generic22()
    with pytest.raises(ChartError):
        curvature_bundle(chart, [0.9, 0, 0, 0])
    with pytest.raises(ChartError):
        curvature_bundle(chart, [0, 0, 0])


def test_dimension_range():
    with pytest.raises(ChartError):
        MetricChart.from_dsl("dim=2; g[0][0]=1; g[1][1]=1")


def test_dsl_round_trip_for_registry():
    for name in reg.names():
        chart = reg.instantiate(name)
        again = MetricChart.from_dsl(chart.to_dsl(), chart.domain)
        p = chart.sample_points(1, seed=3)[0]
        a = curvature_bundle(chart, p).riemann
        b = curvature_bundle(again, p).riemann
        assert np.abs(a - b).max() < 1e-10, name
