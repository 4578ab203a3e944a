import numpy as np
import pytest

from curvedcheck import registry as reg
from curvedcheck.chart import curvature_bundle, signature_of
from curvedcheck.classify import RecurrenceMode, fit_recurrence

ALL = [
    ("flat", {}), ("flat", {"s": 0, "n": 3}), ("flat", {"s": 3, "n": 6}),
    ("constant_curvature", {}), ("constant_curvature", {"c": -1.5, "s": 2, "n": 5}),
    ("product_example1", {}), ("product_example1", {"c": -1.0, "s": 1, "n": 3}),
    ("example2", {}), ("example2", {"f": "sin(t)", "s": 1, "n": 4}),
    ("ppwave", {}), ("ppwave", {"h": "1 + u^2", "n": 5}),
    ("ppwave_pair", {}), ("generic22", {}),
]


@pytest.mark.parametrize("name, params", ALL)
def test_signature_constant_on_64_points(name, params):
    chart = reg.instantiate(name, **params)
    sigs = {signature_of(chart.metric(p)) for p in chart.sample_points(64, seed=64, margin=0.0)}
    assert sigs == {chart.signature}


def test_flat_has_zero_curvature():
    chart = reg.flat(1, 4)
    for p in chart.sample_points(5):
        assert not np.any(curvature_bundle(chart, p).riemann)


def test_example2_signature_and_weyl():
    chart = reg.example2("t^2", 2, 4)
    for p in chart.sample_points(5, seed=2):
        b = curvature_bundle(chart, p)
        assert signature_of(b.metric) == (2, 2) and np.abs(b.weyl).max() < 1e-6


def test_ppwave_recurrent():
    assert fit_recurrence(reg.ppwave("exp(u)"), [0.1, 0.2, 0.3, 0.4]).mode is RecurrenceMode.RECURRENT


def test_generic22_weyl_floor():
    chart = reg.generic22()
    for p in chart.sample_points(64, seed=22, margin=0.0):
        assert np.abs(curvature_bundle(chart, p).weyl).max() >= reg.GENERIC22_WEYL_FLOOR


def test_parameter_errors():
    with pytest.raises(reg.RegistryError):
        reg.instantiate("nope")
    with pytest.raises(reg.RegistryError):
        reg.instantiate("flat", q=1)
    with pytest.raises(reg.RegistryError):
        reg.constant_curvature(c=5.0)
    with pytest.raises(reg.RegistryError):
        reg.flat(s=1, n=9)
    with pytest.raises(reg.RegistryError):
        reg.ppwave(n=3)


def test_manifest_lists_every_builder():
    rows = reg.manifest()
    assert [r["name"] for r in rows] == reg.names()
    assert all(r["provenance"] and r["domain"] for r in rows)


def test_spec_object():
    chart = reg.instantiate(reg.ManifoldSpec("constant_curvature", {"c": "0.5", "s": "0", "n": "3"}))
    assert chart.signature == (0, 3) and chart.params["c"] == 0.5
