import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fkpp.model import (
    ModelParams,
    Outcome,
    OutcomeKind,
    ParameterError,
    RawParams,
    Thresholds,
    classify_trajectory,
    reaction,
    rescale_to_canonical,
    restore_raw,
)

pos = st.floats(0.05, 20.0)


def test_rejects_bad_exponents():
    with pytest.raises(ParameterError):
        ModelParams(2.0, 1.0, 1.0)
    with pytest.raises(ParameterError):
        ModelParams(2.0, 0.5, 1.0)
    with pytest.raises(ParameterError):
        ModelParams(0.0, 2.0, 1.0)
    with pytest.raises(ParameterError):
        ModelParams(2.0, 2.0, -0.5)


def test_hypothesis_flags():
    assert ModelParams(2, 2, 0.9).separatrix_hypotheses
    assert ModelParams(0.8, 2, 0.5).separatrix_hypotheses
    assert ModelParams(0.8, 2, 0.5).blowup_hypotheses
    assert not ModelParams(2, 3, 2.5).separatrix_hypotheses
    assert not ModelParams(1.5, 1.2, 0.5).separatrix_hypotheses


@given(pos, pos, pos, st.floats(0.2, 4), st.floats(1.1, 4), st.floats(0.1, 1.0))
@settings(max_examples=60, deadline=None)
def test_scaling_removes_coefficients(alpha, beta, kappa, m, p, q):
    # substituting u = l v, t = b s, x = a y: every coefficient must become 1
    raw = RawParams(alpha, beta, kappa, m, p, q)
    sc = rescale_to_canonical(raw)
    assert alpha * sc.l ** (p - 1) * sc.b == pytest.approx(1.0, rel=1e-10)
    assert beta * sc.l ** (q - 1) * sc.b == pytest.approx(1.0, rel=1e-10)
    assert kappa * sc.l ** (m - 1) * sc.b / sc.a**2 == pytest.approx(1.0, rel=1e-10)
    back = restore_raw(sc, m, p, q)
    for k in ("alpha", "beta", "kappa"):
        assert getattr(back, k) == pytest.approx(getattr(raw, k), rel=1e-10)


def test_rescale_rejects_equal_exponents():
    with pytest.raises(ParameterError):
        rescale_to_canonical(RawParams(1, 1, 1, 2, 1.0, 1.0))
    with pytest.raises(ParameterError):
        RawParams(-1, 1, 1, 2, 2, 1)


@given(st.floats(0.0, 50.0), st.floats(0.1, 4), st.floats(1.01, 4), st.floats(0.05, 1.0))
@settings(max_examples=100, deadline=None)
def test_reaction_sign(u, m, p, q):
    prm = ModelParams(m, p, q)
    r = reaction(u, prm)
    if u == 0.0 or u == 1.0:
        assert r == 0.0
    elif u < 1.0:
        assert r <= 0.0
    else:
        assert r >= 0.0


def test_reaction_values_and_errors():
    prm = ModelParams(2, 2, 0.5)
    assert reaction(4.0, prm) == 16.0 - 2.0
    np.testing.assert_allclose(reaction(np.array([0.0, 0.25]), prm), [0.0, 0.0625 - 0.5])
    with pytest.raises(ValueError):
        reaction(-1.0, prm)


def test_outcome_roundtrip_and_validation():
    o = Outcome(OutcomeKind.BLOWUP, t_event=0.5)
    assert Outcome.from_dict(o.as_dict()) == o
    with pytest.raises(ValueError):
        Outcome(OutcomeKind.EXTINCTION, t_event=0.0)
    with pytest.raises(ValueError):
        Outcome(OutcomeKind.BLOWUP)


def test_classify_blowup_needs_collapse():
    t = [0.0, 0.1, 0.2, 0.3]
    n = [1.0, 10.0, 2e6, 5e6]
    assert classify_trajectory(t, n, [math.nan, 1e-3, 1e-6, 1e-13]).kind == OutcomeKind.BLOWUP
    assert classify_trajectory(t, n, [math.nan, 1e-3, 1e-6, 1e-9]).kind == OutcomeKind.UNDECIDED
    o = classify_trajectory(t, n, [math.nan, 1e-3, 1e-6, 1e-13], finite_blowup=False)
    assert o.kind == OutcomeKind.GROWTH


def test_classify_blowup_time_is_first_crossing():
    o = classify_trajectory([0, 1, 2, 3], [1, 2e6, 1e9, 1e12], [math.nan, 1, 1, 1e-14])
    assert o.t_event == 1.0
    # data already past the threshold: dated by the collapse
    o = classify_trajectory([0, 1e-3], [2e6, 1e12], [math.nan, 1e-14])
    assert o.kind == OutcomeKind.BLOWUP and o.t_event == 1e-3


def test_classify_extinction_and_vanishing():
    t = [0.0, 1.0, 2.0]
    n = [1.0, 1e-4, 1e-9]
    dts = [math.nan, 0.1, 0.1]
    o = classify_trajectory(t, n, dts)
    assert o.kind == OutcomeKind.EXTINCTION and o.t_event == 2.0
    assert classify_trajectory(t, n, dts, finite_extinction=False).kind == OutcomeKind.VANISHING


def test_classify_horizon_trends():
    t = np.linspace(0, 10, 11)
    grow = np.linspace(1, 5, 11)
    dts = np.full(11, 0.1)
    assert classify_trajectory(t, grow, dts).kind == OutcomeKind.UNDECIDED
    assert classify_trajectory(t, grow, dts, finite_blowup=False).kind == OutcomeKind.GROWTH
    assert classify_trajectory(t, grow[::-1], dts, finite_extinction=False).kind == OutcomeKind.VANISHING
    flat = np.ones(11)
    assert classify_trajectory(t, flat, dts, finite_blowup=False).kind == OutcomeKind.UNDECIDED


def test_classify_zero_data_and_bad_input():
    o = classify_trajectory([0.0], [0.0], [math.nan])
    assert o.kind == OutcomeKind.UNDECIDED and o.final_norm == 0.0
    with pytest.raises(ValueError):
        classify_trajectory([0.0, 1.0], [1.0], [math.nan])
    with pytest.raises(ValueError):
        classify_trajectory([1.0, 0.0], [1.0, 1.0], [math.nan, 1.0])


def test_thresholds_defaults():
    th = Thresholds()
    assert (th.blowup, th.extinction, th.dt_floor) == (1e6, 1e-8, 1e-12)
