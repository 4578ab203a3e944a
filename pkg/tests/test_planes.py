import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvedcheck import expr as ex
from curvedcheck import registry as reg
from curvedcheck.chart import MetricChart, curvature_bundle
from curvedcheck.conformal import Diffeo, conformal_chart
from curvedcheck.planes import (DegeneratePlaneError, PlaneError, PlaneKind, SignatureError, TangentPlane,
                                classify_plane, limit_ratio_estimate, richardson_table,
                                sample_degenerate_planes, sectional_curvature)
from curvedcheck.tensor_core import build_pi1, evaluate4

e = np.eye(4)
O3 = np.zeros(3)


def test_classify_examples():
    g3 = np.diag([-1.0, 1, 1])
    i3 = np.eye(3)
    weak = classify_plane(g3, TangentPlane(O3, i3[0] + i3[1], i3[2]))
    assert weak.kind is PlaneKind.WEAK
    assert np.allclose(weak.isotropic_direction, i3[0] + i3[1])
    assert classify_plane(g3, TangentPlane(O3, i3[1], i3[2])).kind is PlaneKind.NONDEGENERATE
    g4 = np.diag([-1.0, -1, 1, 1])
    assert classify_plane(g4, TangentPlane(np.zeros(4), e[0] + e[2], e[1] + e[3])).kind is PlaneKind.STRONG


def test_dependent_vectors_rejected():
    with pytest.raises(PlaneError):
        TangentPlane(O3, [1.0, 2, 3], [2.0, 4, 6])


def test_sectional_curvature_flat_and_errors():
    g = np.diag([-1.0, 1, 1])
    R = np.zeros((3,) * 4)
    assert sectional_curvature(R, g, TangentPlane(O3, [1.0, 0.2, 0], [0, 1.0, 0.5])) == 0.0
    with pytest.raises(DegeneratePlaneError) as info:
        sectional_curvature(R, g, TangentPlane(O3, [1.0, 1, 0], [0, 0, 1.0]))
    assert info.value.kind is PlaneKind.WEAK


def test_sampler_weak_and_strong():
    weak = sample_degenerate_planes(np.diag([-1.0, 1, 1]), "weak", 5, seed=1)
    assert len(weak) == 5 and all(classify_plane(np.diag([-1.0, 1, 1]), p).kind is PlaneKind.WEAK for p in weak)
    g4 = np.diag([-1.0, -1, 1, 1])
    strong = sample_degenerate_planes(g4, "strong", 5, seed=1)
    assert all(classify_plane(g4, p).kind is PlaneKind.STRONG for p in strong)
    with pytest.raises(SignatureError):
        sample_degenerate_planes(np.eye(3), "weak", 1)
    with pytest.raises(SignatureError):
        sample_degenerate_planes(np.diag([-1.0, 1, 1, 1]), "strong", 1)


@pytest.mark.parametrize("s, kind", [(1, "weak"), (2, "weak"), (3, "weak"), (2, "strong")])
def test_pi1_vanishes_on_degenerate_planes(s, kind):
    g = reg.constant_curvature(0.5, s, 4).metric([0.1, 0.2, -0.2, 0.3])
    pi1 = build_pi1(g)
    for pl in sample_degenerate_planes(g, kind, 30, seed=s):
        assert abs(evaluate4(pi1, pl.x, pl.y, pl.y, pl.x)) < 1e-12 * pl.basis_norm ** 2
        if kind == "weak":
            xi = classify_plane(g, pl).isotropic_direction
            assert abs(xi @ g @ xi) < 1e-9 * (xi @ xi) and abs(xi @ g @ pl.x) < 1e-9 * np.linalg.norm(pl.x)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_classification_and_curvature_invariant_under_basis_change(seed):
    rng = np.random.default_rng(seed)
    chart = reg.generic22()
    b = curvature_bundle(chart, [0.1, 0.0, -0.2, 0.1])
    planes = sample_degenerate_planes(b.metric, "weak", 1, seed) + sample_degenerate_planes(b.metric, "strong", 1, seed)
    planes.append(TangentPlane(b.point, rng.normal(size=4), rng.normal(size=4)))
    for pl in planes:
        kind = classify_plane(b.metric, pl).kind
        for _ in range(50):
            m = rng.normal(size=(2, 2))
            if abs(np.linalg.det(m)) < 0.1:
                continue
            assert classify_plane(b.metric, pl.rebased(m)).kind is kind
        if kind is PlaneKind.NONDEGENERATE:
            k0 = sectional_curvature(b.riemann, b.metric, pl)
            k1 = sectional_curvature(b.riemann, b.metric, pl.rebased([[2.0, 0.3], [-1.0, 0.7]]))
            assert k1 == pytest.approx(k0, rel=1e-10)


def test_richardson_is_exact_on_polynomials():
    ts = [0.1 * 0.5 ** k for k in range(5)]
    table = richardson_table([2.0 + 3 * t - t ** 2 + 0.5 * t ** 3 for t in ts])
    assert table[-1][0] == pytest.approx(2.0, abs=1e-12)


def _plane_with_curvature(chart, kind="weak", seed=0):
    b = curvature_bundle(chart, chart.sample_points(1, seed)[0])
    planes = sample_degenerate_planes(b.metric, kind, 20, seed, point=b.point)
    return max(planes, key=lambda q: abs(evaluate4(b.riemann, q.x, q.y, q.y, q.x)) / q.basis_norm ** 2)


def test_limit_identity_is_one():
    chart = reg.generic22()
    est = limit_ratio_estimate(chart, chart, Diffeo.identity(4), _plane_with_curvature(chart))
    assert est.value == pytest.approx(1.0, abs=1e-6)


def test_limit_homothety():
    chart = reg.constant_curvature(1.0, 1, 4)
    target = MetricChart.from_expressions([[ex.mul(ex.const(2.0), gij) for gij in row] for row in chart.grid],
                                          chart.domain, "2g")
    est = limit_ratio_estimate(chart, target, Diffeo.identity(4), _plane_with_curvature(chart))
    assert est.value == pytest.approx(0.5, abs=1e-5)


def test_limit_on_ppwave_pair_is_one():
    chart, sigma = reg.ppwave_pair(4)
    bar = conformal_chart(chart, sigma)
    est = limit_ratio_estimate(chart, bar, Diffeo.identity(4), _plane_with_curvature(chart, seed=2))
    assert est.value == pytest.approx(1.0, abs=1e-5)


def test_limit_rejects_nondegenerate_plane():
    chart = reg.generic22()
    with pytest.raises(PlaneError):
        limit_ratio_estimate(chart, chart, Diffeo.identity(4), TangentPlane(np.zeros(4), e[0], e[2]))
