import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from morrey_entropy.acceptance import GOLDEN_REGIMES
from morrey_entropy.regimes import (
    ParamTuple,
    Regime,
    RegimeKind,
    classify,
    classify_function_space,
    classify_into_lr,
    is_compact,
    linfty_compact,
    two_sided_condition,
)

NC, CL, AG, BD = (RegimeKind.NOT_COMPACT, RegimeKind.CLASSICAL, RegimeKind.ALPHA_GAP, RegimeKind.BOUNDARY)


def t(delta, u1, p1, u2, p2, d=1):
    return ParamTuple.from_delta(d, delta, u1, p1, u2, p2)


def test_is_compact_examples():
    assert not is_compact(t("0.2", 2, 1, 2, 2))
    assert not is_compact(ParamTuple(1, "1/3", 2, 1, "1/3", 2, 2))
    assert is_compact(t("0.6", 2, 1, 2, 2))


def test_classify_examples():
    r = classify(t("0.4", 2, 1, 2, 2))
    assert r.kind is AG and r.exponent == F(3, 10) and r.gap
    r = classify(t("0.6", 2, 1, 2, 2))
    assert r.kind is CL and r.exponent == F(3, 5)
    assert classify(t("1/2", 2, 1, 2, 2)).kind is BD


@pytest.mark.parametrize("label, thunk, kind, exponent", GOLDEN_REGIMES, ids=[g[0] for g in GOLDEN_REGIMES])
def test_golden_table(label, thunk, kind, exponent):
    reg = thunk()
    assert (reg.kind, reg.exponent) == (kind, exponent)


def test_boundary_float_tolerance():
    # 0.1 + 0.4 is not exactly 0.5 in binary, but is within the relative tolerance
    reg = classify(ParamTuple(1, 0.1 + 0.4, 2, 1, 0, 2, 2))
    assert reg.kind is BD


def test_q_ignored():
    a = classify(ParamTuple(1, "0.4", 2, 1, 0, 2, 2, q1="1/2", q2=3))
    b = classify(ParamTuple(1, "0.4", 2, 1, 0, 2, 2))
    assert a == b


@pytest.mark.parametrize("kw", [dict(u1=1, p1=2), dict(u2=0, p2=0), dict(q1=0), dict(d=0)])
def test_invalid_tuples(kw):
    base = dict(d=1, sigma1=1, u1=2, p1=1, sigma2=0, u2=2, p2=2)
    base.update(kw)
    with pytest.raises(ValueError):
        ParamTuple(**base)


def test_regime_exponent_invariant():
    with pytest.raises(ValueError):
        Regime(CL, F(0))


def test_function_space_wrappers():
    assert classify_function_space(2, 1, 2, 1, 0, 2, 2) == classify(ParamTuple(2, 2, 2, 1, 1, 2, 2))
    r = classify_into_lr(1, "1/2", 4, 2, 2)
    assert r.kind is CL and r.exponent == F(1, 2)
    # p < r inside the gap window: (p/u) d (1/p - 1/r) = 1/8 < s <= 1/2
    r = classify_into_lr(1, "1/4", 4, 1, 2)
    assert r.kind is AG and r.exponent == F(4, 3) * (F(1, 4) - F(1, 8))
    assert not linfty_compact(2, "1/2", 4) and linfty_compact(2, "0.6", 4)
    assert classify_into_lr(2, "0.6", 4, 2, math.inf).kind is CL


rationals = st.fractions(min_value=F(1, 4), max_value=4, max_denominator=6)


@st.composite
def tuples(draw):
    u1, p1 = sorted([draw(rationals), draw(rationals)], reverse=True)
    u2, p2 = sorted([draw(rationals), draw(rationals)], reverse=True)
    delta = draw(st.fractions(min_value=-1, max_value=3, max_denominator=12))
    return ParamTuple.from_delta(draw(st.integers(1, 3)), delta, u1, p1, u2, p2)


@given(tuples())
def test_partition_and_positivity(tp):
    reg = classify(tp)
    assert (reg.kind is NC) == (not is_compact(tp))
    if reg.kind is not NC:
        assert reg.exponent > 0
    if reg.kind is AG:
        assert tp.p1 < tp.u1 and tp.p1 < tp.p2 and tp.p2 / tp.u2 > tp.p1 / tp.u1
        assert reg.exponent < tp.delta


@given(tuples())
def test_two_sided_condition_equivalence(tp):
    assert two_sided_condition(tp) == (tp.p1 < tp.p2 and tp.p2 / tp.u2 > tp.p1 / tp.u1)


@given(st.sampled_from([(2, 1, 2, 2), (4, 1, 2, 2), (3, F(1, 2), 4, 2)]))
def test_exponent_continuity_at_boundary(params):
    u1, p1, u2, p2 = (F(x) for x in params)
    b = 1 / p1 - 1 / p2
    eps = F(1, 10**9)
    below = classify(ParamTuple.from_delta(1, b - eps, u1, p1, u2, p2))
    above = classify(ParamTuple.from_delta(1, b + eps, u1, p1, u2, p2))
    assert below.kind is AG and above.kind is CL
    assert abs(below.exponent - b) < 1e-6 and abs(above.exponent - b) < 1e-6


@given(st.fractions(min_value=F(1, 10), max_value=3, max_denominator=20),
       st.fractions(min_value=F(1, 4), max_value=4, max_denominator=5))
def test_p1_equal_u1_never_alpha_gap(delta, u1):
    for u2, p2 in ((u1 * 2, u1 * 2), (u1 * 3, u1), (u1, u1 / 2)):
        assert classify(ParamTuple.from_delta(1, delta, u1, u1, u2, p2)).kind is not AG
