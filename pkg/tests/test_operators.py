import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from morrey_entropy.dyadic import MultiLevelSequence
from morrey_entropy.norms import LpParams, MorreyLevelParams, SeqSpaceParams, morrey_level_norm, seq_space_norm, rnorm_exponent
from morrey_entropy.operators import (
    CaseTag,
    EmbeddingSpec,
    OpNormResult,
    classify_case,
    extremal_sparse_spread,
    operator_norm_upper,
    opnorm_bruteforce,
    opnorm_closed_form,
    split_blocks,
    spread_indicator,
    step3_lower_diagram,
)
from morrey_entropy.regimes import ParamTuple


def lvl(d, j, src, tgt):
    return EmbeddingSpec.level_embedding(d, j, src, tgt)


def test_closed_form_examples():
    r = opnorm_closed_form(lvl(1, 5, (2, 2), (4, 1)))
    assert (r.value, r.exact, r.case_tag) == (1.0, True, CaseTag.EQ1A)
    r = opnorm_closed_form(lvl(1, 2, (4, 2), (2, 1)))
    assert r.exact and r.case_tag is CaseTag.EQ2
    assert r.value == pytest.approx(2**0.5, rel=1e-15)
    r = opnorm_closed_form(lvl(1, 3, (2, 1), (2, 2)))
    assert not r.exact and r.case_tag is CaseTag.TWO_SIDED
    assert r.value == pytest.approx(2**0.75, rel=1e-15)
    assert 0 < r.lower <= r.value


def test_case_eq1b():
    assert classify_case(MorreyLevelParams(2, 1), MorreyLevelParams(8, 4)) is CaseTag.EQ1B
    assert opnorm_closed_form(lvl(2, 2, (2, 1), (8, 4))).value == 1.0


def test_opnorm_result_invariant():
    with pytest.raises(ValueError):
        OpNormResult(1.0, 2.0, False, CaseTag.TWO_SIDED)


def test_bruteforce_examples():
    assert opnorm_bruteforce(lvl(1, 5, (2, 2), (4, 1)), budget=500).value >= 1 - 1e-9
    assert opnorm_bruteforce(lvl(1, 2, (4, 2), (2, 1))).value == pytest.approx(2**0.5, rel=1e-12)
    assert opnorm_bruteforce(lvl(2, 2, (3, 1), (3, 1)), budget=500).value == pytest.approx(1.0, rel=1e-12)


def test_bruteforce_deterministic_and_bounded():
    spec = lvl(1, 3, (2, 1), (2, 2))
    a = opnorm_bruteforce(spec, budget=5000, seed=4)
    b = opnorm_bruteforce(spec, budget=5000, seed=4)
    assert a.value == b.value and np.array_equal(a.argmax, b.argmax)
    assert a.value <= opnorm_closed_form(spec).value * (1 + 1e-9)


def test_bruteforce_budget_flag():
    r = opnorm_bruteforce(lvl(1, 3, (2, 1), (2, 2)), budget=10)
    assert r.exhausted


def test_bruteforce_size_cap():
    with pytest.raises(ValueError):
        opnorm_bruteforce(lvl(2, 7, (2, 1), (2, 2)))


pairs = st.sampled_from([(F(u), F(p)) for u in (F(1, 2), 1, 2, 3) for p in (F(1, 2), 1, 2, 3) if p <= u])


@settings(max_examples=40)
@given(pairs, pairs, st.sampled_from([1, 2]), st.sampled_from([1, 2]))
def test_oracle_never_exceeds_closed_form(src, tgt, d, j):
    spec = lvl(d, j, src, tgt)
    cf = opnorm_closed_form(spec, oracle_budget=0)
    bf = opnorm_bruteforce(spec, budget=800, seed=1)
    assert bf.value <= cf.value * (1 + 1e-9)
    if cf.exact:
        assert bf.value >= cf.value * (1 - 1e-6)


def test_operator_norm_upper_linf_ends():
    spec = EmbeddingSpec.lp_embedding(8, math.inf, 2)
    assert operator_norm_upper(spec) == pytest.approx(8**0.5)
    spec = EmbeddingSpec(1, 2, MorreyLevelParams(2, 1), LpParams(math.inf))
    assert operator_norm_upper(spec) == 1.0


def test_sparse_spread_examples():
    s = extremal_sparse_spread(1, 2, 2, 1)
    assert s.count == 2 and s.scale == 1.0
    np.testing.assert_array_equal(np.nonzero(s.sequence.coeffs)[0], [0, 2])
    s = extremal_sparse_spread(1, 1, 2, 1)
    assert s.count == 1 and morrey_level_norm(s.sequence, MorreyLevelParams(2, 1)) == 1.0
    with pytest.raises(ValueError):
        extremal_sparse_spread(1, 2, 2, 2)


@pytest.mark.parametrize("d, j, u, p", [(1, 3, 2, 1), (2, 2, 4, 1), (2, 3, 3, F(1, 2)), (1, 6, 3, 2)])
def test_sparse_spread_normalised(d, j, u, p):
    s = extremal_sparse_spread(d, j, u, p)
    assert np.count_nonzero(s.sequence.coeffs) == s.count
    assert s.count == math.floor(2 ** (j * d * (1 - p / u)) + 1e-12)
    assert morrey_level_norm(s.sequence, MorreyLevelParams(u, p)) == pytest.approx(1.0, rel=1e-12)


def test_spread_indicator_placement():
    np.testing.assert_array_equal(spread_indicator(1, 3, 2), [1, 0, 0, 0, 1, 0, 0, 0])
    with pytest.raises(ValueError):
        spread_indicator(1, 2, 5)


def test_step3_value_and_params():
    # k_2 = 2, ||P2|| <= 1, volumetric bound of l_inf^2 -> l_2^2 at k = 2: sqrt(2/pi)
    want = math.sqrt(2 / math.pi)
    assert step3_lower_diagram(1, 2, (2, 1, 2, 2)) == pytest.approx(want, rel=1e-12)
    t = ParamTuple.from_delta(1, "0.4", 2, 1, 2, 2)
    assert step3_lower_diagram(1, 2, t) == pytest.approx(want, rel=1e-12)
    with pytest.raises(ValueError):
        step3_lower_diagram(1, 2, (4, 2, 2, 1))


def test_split_blocks():
    rng = np.random.default_rng(0)
    seq = MultiLevelSequence.from_flat(1, 3, rng.standard_normal(15))
    head, tail = split_blocks(seq, 3)
    assert np.all(tail.flat() == 0) and np.array_equal(head.flat(), seq.flat())
    hi = MultiLevelSequence.from_flat(1, 3, np.r_[np.zeros(3), rng.standard_normal(12)])
    head, tail = split_blocks(hi, 1)
    assert np.all(head.flat() == 0)
    with pytest.raises(ValueError):
        split_blocks(seq, 4)


@given(st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_split_blocks_r_triangle(M, seed):
    seq = MultiLevelSequence.from_flat(1, 3, np.random.default_rng(seed).standard_normal(15))
    sp = SeqSpaceParams(F(1, 2), 2, F(1, 2), 1)
    r = float(rnorm_exponent(sp))
    head, tail = split_blocks(seq, M)
    assert seq_space_norm(head, sp) ** r + seq_space_norm(tail, sp) ** r >= seq_space_norm(seq, sp) ** r * (1 - 1e-12)


def test_spec_validation():
    with pytest.raises(ValueError):
        EmbeddingSpec(1, 2, MorreyLevelParams(2, 1), SeqSpaceParams(0, 2, 1))
    with pytest.raises(ValueError):
        EmbeddingSpec.lp_embedding(6, 1, 2)


def test_multilevel_oracle_runs():
    spec = EmbeddingSpec(1, 2, SeqSpaceParams(1, 2, 1), SeqSpaceParams(0, 2, 2))
    assert opnorm_bruteforce(spec, budget=500).value > 0
