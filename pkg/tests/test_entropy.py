import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from morrey_entropy.entropy import (
    BoundEntry,
    EntropyBoundSeries,
    ResourceLimitError,
    ball_volume_lp,
    combine_interpolation,
    combine_multiplicativity,
    covering_epsilon,
    covering_upper_bound,
    entropy_series,
    lre_norm,
    packing_lower_bound,
    packing_profile,
    schuett_reference,
    volume_lower_bound,
)
from morrey_entropy.norms import MorreyLevelParams
from morrey_entropy.operators import EmbeddingSpec, opnorm_closed_form

LINF1 = EmbeddingSpec.lp_embedding(1, math.inf, math.inf)


def lvl(d, j, src, tgt):
    return EmbeddingSpec.level_embedding(d, j, src, tgt)


def test_ball_volume_examples():
    assert ball_volume_lp(2, 2, 1) == pytest.approx(math.pi, rel=1e-14)
    assert ball_volume_lp(2, 1, 1) == pytest.approx(2.0, rel=1e-14)
    for p in (F(1, 2), 1, 3, math.inf):
        assert ball_volume_lp(1, p, 0.75) == pytest.approx(1.5, rel=1e-14)
    assert ball_volume_lp(3, 2, 2) == pytest.approx(4 / 3 * math.pi * 8, rel=1e-14)


def test_volume_bound_examples():
    spec = EmbeddingSpec.lp_embedding(4, 2, 2)
    assert volume_lower_bound(spec, 1) == pytest.approx(1.0, rel=1e-14)
    for k in range(1, 8):
        assert volume_lower_bound(LINF1, k) == pytest.approx(2.0 ** -(k - 1), rel=1e-14)
    spec = lvl(1, 2, (2, 1), (4, 2))
    for k in range(1, 20):
        assert volume_lower_bound(spec, k + spec.size) / volume_lower_bound(spec, k) == pytest.approx(0.5, rel=1e-13)


def test_volume_bound_rejects_multilevel():
    from morrey_entropy.norms import SeqSpaceParams
    spec = EmbeddingSpec(1, 2, SeqSpaceParams(1, 2, 1), SeqSpaceParams(0, 2, 2))
    with pytest.raises(ValueError):
        volume_lower_bound(spec, 1)


def test_packing_interval():
    v = packing_lower_bound(LINF1, 2)
    assert 0.5 * (1 - 2e-3) <= v <= 0.5
    prof = packing_profile(LINF1, 6, samples=64, seed=3)
    assert np.all(np.diff(prof) <= 0) and np.all(prof >= 0)


def test_packing_below_covering():
    spec = lvl(1, 2, (2, 1), (2, 2))
    for k in (1, 2, 3, 5):
        lo = packing_lower_bound(spec, k, samples=128, seed=k)
        up, _ = covering_epsilon(spec, k)
        assert 0 <= lo <= up


def test_covering_examples():
    assert covering_upper_bound(LINF1, 0.5) == 2
    assert covering_upper_bound(EmbeddingSpec.lp_embedding(2, 2, 2), 1.0) == 1
    with pytest.raises(ValueError):
        covering_upper_bound(LINF1, 0.0)


@settings(max_examples=25)
@given(st.sampled_from([((2, 1), (2, 2)), ((4, 2), (2, 1)), ((3, 3), (3, 1)), ((2, 2), (2, 2))]),
       st.sampled_from([1, 2]), st.floats(0.05, 2.0))
def test_covering_consistent_with_volume(pair, j, eps):
    spec = lvl(1, j, *pair)
    k = covering_upper_bound(spec, eps)
    assert volume_lower_bound(spec, k) <= eps * (1 + 1e-12)


def test_covering_resource_limit():
    spec = EmbeddingSpec.lp_embedding(64, 2, 2)
    with pytest.raises(ResourceLimitError):
        covering_upper_bound(spec, 1e-3)


def test_schuett_examples():
    assert schuett_reference(1, 2, 8, 32) == pytest.approx(2**-2 * 8**-0.5, rel=1e-14)
    for k in (16, 20, 33):
        assert schuett_reference(2, 2, 8, k) == pytest.approx(2 ** (-k / 16), rel=1e-14)
    assert schuett_reference(1, 2, 8, 4) == pytest.approx(math.sqrt(math.log(3) / 4), rel=1e-14)
    assert schuett_reference(1, 2, 8, 2) == 1.0
    # p2 < p1: third branch for every k
    assert schuett_reference(2, 1, 8, 1) == pytest.approx(2 ** (-1 / 16) * 8**0.5, rel=1e-14)
    assert schuett_reference("inf", 1, 4, 3) == pytest.approx(2 ** (-3 / 8) * 4, rel=1e-14)


def series(values, ks=None):
    ks = list(ks or range(1, len(values) + 1))
    return EntropyBoundSeries.from_bounds(None, ks, [0.0] * len(ks), values)


def test_lre_norm_examples():
    s = series([0.3] * 10)
    assert lre_norm(s, 0.5) == pytest.approx(100 * 0.3)
    vol = EntropyBoundSeries.from_bounds(LINF1, range(1, 60), [volume_lower_bound(LINF1, k) for k in range(1, 60)],
                                         [math.inf] * 59)
    vals = [lre_norm(vol, r, "lower") for r in (0.25, 0.5, 1, 2)]
    assert all(math.isfinite(v) for v in vals)
    assert vals == sorted(vals, reverse=True)
    with pytest.raises(ValueError):
        lre_norm(s, 0)


def test_series_invariants_enforced():
    with pytest.raises(ValueError):
        EntropyBoundSeries(None, (BoundEntry(1, 2.0, 1.0),))
    with pytest.raises(ValueError):
        EntropyBoundSeries(None, (BoundEntry(1, 0, 1), BoundEntry(1, 0, 1)))
    s = EntropyBoundSeries.from_bounds(None, [3, 1, 2], [0.1, 0.5, 0.2], [0.9, 1.0, 0.95])
    assert s.ks == [1, 2, 3]
    assert list(s.uppers()) == [1.0, 0.95, 0.9]
    assert list(s.lowers()) == [0.5, 0.2, 0.1]
    assert s.upper_at(10) == 0.9 and s.lower_at(0) == 0.5


def test_multiplicativity():
    ks = range(1, 13)
    s1 = series([3 * 0.8**k for k in ks])
    ident = series([2.0] * 12)
    m = combine_multiplicativity(s1, ident)
    assert all(m.upper_at(k) <= s1.upper_at(k) * 2.0 * (1 + 1e-12) for k in ks)
    m2 = combine_multiplicativity(ident, s1)
    assert all(m2.upper_at(k) <= 2.0 * s1.upper_at(k) * (1 + 1e-12) for k in ks)
    assert np.all(np.diff(m.uppers()) <= 0)


def test_multiplicativity_composability():
    a = entropy_series(lvl(1, 1, (2, 1), (2, 2)), [1, 2], ("volume",))
    b = entropy_series(lvl(1, 1, (4, 2), (2, 1)), [1, 2], ("volume",))
    with pytest.raises(ValueError):
        combine_multiplicativity(a, b)
    c = entropy_series(lvl(1, 1, (2, 2), (3, 1)), [1, 2], ("volume", "covering"))
    out = combine_multiplicativity(a, c)
    assert out.spec.source == MorreyLevelParams(2, 1) and out.spec.target == MorreyLevelParams(3, 1)


def test_interpolation():
    ks = range(1, 11)
    a0, a1, rho, th = 1.5, 4.0, 0.6, 0.25
    s0, s1 = series([a0 * rho**k for k in ks]), series([a1 * rho**k for k in ks])
    out = combine_interpolation(s0, s1, th)
    for k in ks:
        assert out.upper_at(2 * k) == pytest.approx(a0 ** (1 - th) * a1**th * rho**k, rel=1e-12)
    same = combine_interpolation(s0, s0, 0.5)
    assert all(same.upper_at(2 * k) <= s0.upper_at(k) * (1 + 1e-12) for k in ks)
    assert any("interpolation constant" in n for n in out.notes)
    for th in (0, 1, -0.5, 1.5):
        with pytest.raises(ValueError):
            combine_interpolation(s0, s1, th)


@pytest.mark.parametrize("pair", [((2, 1), (2, 2)), ((4, 2), (2, 1)), ((2, 2), (4, 1))])
def test_series_invariants_and_e1(pair):
    spec = lvl(1, 2, *pair)
    s = entropy_series(spec, range(1, 9), ("volume", "packing", "covering", "step3", "oracle"), samples=96)
    lo, up = s.lowers(), s.uppers()
    assert np.all(lo <= up * (1 + 1e-9))
    assert np.all(np.diff(lo) <= 0) and np.all(np.diff(up) <= 0)
    cf = opnorm_closed_form(spec, oracle_budget=0)
    assert lo[0] <= cf.value * (1 + 1e-12) and up[0] >= cf.lower * (1 - 1e-12)


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_scaling(r):
    spec = lvl(1, 2, (2, 1), (2, 2))
    sc = spec.scaled_source(r)
    for k in (1, 3, 6):
        assert volume_lower_bound(sc, k) == pytest.approx(r * volume_lower_bound(spec, k), rel=1e-12)
        assert packing_lower_bound(sc, k, 64, 5) == pytest.approx(r * packing_lower_bound(spec, k, 64, 5), rel=2e-3)
        assert covering_epsilon(sc, k)[0] == pytest.approx(r * covering_epsilon(spec, k)[0], rel=2e-3)
    for eps in (0.3, 0.7):
        assert covering_upper_bound(sc, r * eps) == covering_upper_bound(spec, eps)


@pytest.mark.parametrize("pair", [((2, 1), (4, 2)), ((4, 2), (1, 1)), ((3, 1), (2, 2))])
def test_geometric_tail(pair):
    src, tgt = pair
    lows = []
    for j in (1, 2, 3):
        spec = lvl(1, j, src, tgt)
        D = spec.size
        ks = list(range(2 * D, 10 * D + 1))
        s = entropy_series(spec, ks, ("volume", "packing"), samples=64)
        slope = np.polyfit(ks, np.log2(s.lowers()), 1)[0]
        assert abs(slope + 1 / D) <= 0.15 / D
        lows.append(s.lower_at(2 * D))
    pred = 2 ** (1 / tgt[0] - 1 / src[0])
    for a, b in zip(lows, lows[1:]):
        assert 0.25 <= (b / a) / pred <= 4


def _ideal_slope(src, tgt, r=1.0):
    vals = []
    for j in (1, 2, 3):
        spec = lvl(1, j, src, tgt)
        s = entropy_series(spec, range(1, 2 * spec.size + 1), ("covering",))
        vals.append(lre_norm(s, r, "upper"))
    return np.polyfit([1, 2, 3], np.log2(vals), 1)[0]


@pytest.mark.parametrize("src, tgt", [((2, 2), (2, 2)), ((4, 2), (2, 1)), ((4, 2), (1, 1))])
def test_operator_ideal_growth(src, tgt):
    pred = 1 - (1 / src[0] - 1 / tgt[0])
    assert abs(_ideal_slope(src, tgt) - pred) <= 0.2 * pred


@pytest.mark.xfail(strict=True, reason="grid covers are too coarse at j <= 3 when u1 < u2; "
                   "measured slope about 1.06 against 0.75")
def test_operator_ideal_growth_u1_below_u2():
    assert abs(_ideal_slope((2, 1), (4, 1)) - 0.75) <= 0.2 * 0.75


def test_geometric_tail_without_large_k_when_u2_below_p1():
    # 0 < p2 <= u2 < p1 <= u1: the tail estimate holds from k = 1
    for j in (1, 2, 3):
        spec = lvl(1, j, (4, 2), (1, 1))
        D = spec.size
        ks = list(range(1, 10 * D + 1))
        s = entropy_series(spec, ks, ("volume", "packing"), samples=64)
        slope = np.polyfit(ks, np.log2(s.lowers()), 1)[0]
        assert abs(slope + 1 / D) <= 0.15 / D
