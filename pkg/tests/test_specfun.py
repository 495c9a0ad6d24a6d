import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fkpp.specfun import SERIES_SWITCH, beta_fn, hyp2f1_half


def ref(k2, z):
    return float(mp.hyp2f1(0.5, k2, 1.5, z))


@pytest.mark.parametrize("k2", [-1.3, 0.0, 0.25, 0.5, 0.9, 1.0, 1.5, 2.7])
@pytest.mark.parametrize("z", [1e-6, 0.1, 0.5, 0.74, 0.76, 0.9, 0.99, 0.9999, 0.999999])
def test_matches_mpmath(k2, z):
    mp.mp.dps = 30
    assert hyp2f1_half(k2, z).value == pytest.approx(ref(k2, z), rel=5e-14)


def test_closed_forms():
    for z in np.linspace(0.0, 0.99, 100):
        r = math.sqrt(z)
        atanh = math.atanh(r) / r if z > 0 else 1.0
        asin = math.asin(r) / r if z > 0 else 1.0
        assert abs(hyp2f1_half(1.0, z).value - atanh) <= 1e-12
        assert abs(hyp2f1_half(0.5, z).value - asin) <= 1e-12
        assert abs(hyp2f1_half(0.0, z).value - 1.0) <= 1e-15


def test_methods_agree_across_switch():
    for z in (0.3, SERIES_SWITCH, 0.85):
        s = hyp2f1_half(0.7, z, method="series")
        q = hyp2f1_half(0.7, z, method="quadrature")
        assert s.value == pytest.approx(q.value, rel=1e-13)
        assert s.method == "series" and q.method == "quadrature"
        assert s.terms_used >= 1 and q.terms_used >= 1


def test_endpoint_and_domain():
    # Gauss sum at z = 1 converges for k2 < 1
    assert hyp2f1_half(0.5, 1.0).value == pytest.approx(math.pi / 2, rel=1e-14)
    assert hyp2f1_half(0.0, 1.0).value == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValueError):
        hyp2f1_half(1.0, 1.0)
    with pytest.raises(ValueError):
        hyp2f1_half(0.5, -0.1)
    with pytest.raises(ValueError):
        hyp2f1_half(0.5, 0.3, method="magic")
    assert hyp2f1_half(3.0, 0.0).value == 1.0


def test_beta_known_values():
    assert abs(beta_fn(1, 0.5).value - 2.0) <= 1e-12
    assert abs(beta_fn(0.5, 0.5).value - math.pi) <= 1e-12
    assert float(beta_fn(2, 3)) == pytest.approx(1 / 12, rel=1e-14)


@given(st.floats(0.01, 50), st.floats(0.01, 50))
@settings(max_examples=100, deadline=None)
def test_beta_symmetry_and_gamma(a, b):
    assert beta_fn(a, b).value == pytest.approx(beta_fn(b, a).value, rel=1e-14)
    mp.mp.dps = 30
    assert beta_fn(a, b).value == pytest.approx(float(mp.beta(a, b)), rel=1e-12)


def test_beta_overflow_and_domain():
    v = beta_fn(1e-320, 1e-320)
    assert v.overflow and math.isinf(v.value)
    with pytest.raises(ValueError):
        beta_fn(0.0, 1.0)
