"""Executable exit criteria, shared by ``morrey-entropy selftest`` and the test suite.

Each ``criterion_N`` returns a :class:`CriterionResult`; nothing here
asserts, so callers decide how to report failures.
"""

from __future__ import annotations

import itertools
import math
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction as F
from pathlib import Path

import numpy as np

from ._numbers import pow2, recip
from .entropy import EntropyBoundSeries, combine_interpolation, combine_multiplicativity, volume_lower_bound
from .experiments import ExperimentConfig, fit_series, run_sweep
from .norms import (
    LpParams,
    MorreyLevelParams,
    SeqSpaceParams,
    holder_bound,
    lp_norms,
    morrey_norms,
    morrey_star_norms,
    rnorm_exponent,
    seq_space_norms,
)
from .operators import (
    CaseTag,
    EmbeddingSpec,
    classify_case,
    opnorm_bruteforce,
    opnorm_closed_form,
    sparse_spread_count,
    step3_lower_diagram,
    two_sided_exponent,
)
from .regimes import ParamTuple, RegimeKind, classify, classify_function_space, classify_into_lr

REL = 1e-12
N_RANDOM = 10_000


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    limit_seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.number}. {self.name}: {self.detail} "
                f"({self.seconds:.1f}s, limit {self.limit_seconds:.0f}s)")


def _timed(number: int, name: str, limit: float):
    def wrap(fn):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            passed, detail = fn()
            dt = time.perf_counter() - t0
            if dt > limit:
                passed, detail = False, detail + f"; exceeded runtime limit {limit:.0f}s"
            return CriterionResult(number, name, bool(passed), detail, dt, limit)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


# -- 1 ---------------------------------------------------------------------

_GRID_VALUES = (F(1, 2), F(1), F(2), F(3), F(4))


def exact_case_tuples(per_case: int = 20) -> dict[CaseTag, list[tuple]]:
    """The first ``per_case`` tuples ``(u1, p1, u2, p2)`` of each exact case in a fixed grid order."""
    pairs = [(u, p) for u in _GRID_VALUES for p in _GRID_VALUES if p <= u]
    out: dict[CaseTag, list[tuple]] = {CaseTag.EQ1A: [], CaseTag.EQ1B: [], CaseTag.EQ2: []}
    for (u1, p1), (u2, p2) in itertools.product(pairs, pairs):
        case = classify_case(MorreyLevelParams(u1, p1), MorreyLevelParams(u2, p2))
        if case in out and len(out[case]) < per_case:
            out[case].append((u1, p1, u2, p2))
    return out


@_timed(1, "operator-norm exactness (EQ1a/EQ1b/EQ2)", 60)
def criterion_1():
    tuples = exact_case_tuples(20)
    worst_lo, worst_hi, checked, bad = math.inf, -math.inf, 0, []
    for case, group in tuples.items():
        if len(group) < 20:
            return False, f"only {len(group)} tuples for {case.value}"
        for (u1, p1, u2, p2), d, j in itertools.product(group, (1, 2), (1, 2, 3)):
            spec = EmbeddingSpec.level_embedding(d, j, (u1, p1), (u2, p2))
            cf = opnorm_closed_form(spec).value
            bf = opnorm_bruteforce(spec, budget=1500, seed=0, starts=1).value
            r = bf / cf
            worst_lo, worst_hi = min(worst_lo, r), max(worst_hi, r)
            checked += 1
            if not (1 - 1e-6) <= r <= 1 + 1e-9:
                bad.append((case.value, d, j, (u1, p1, u2, p2), r))
    detail = f"{checked} specs, oracle/closed-form in [{worst_lo:.12f}, {worst_hi:.12f}]"
    if bad:
        detail += f"; {len(bad)} outside, first {bad[0]}"
    return not bad, detail


# -- 2 ---------------------------------------------------------------------

@_timed(2, "TWO_SIDED ratio bounded below", 60)
def criterion_2():
    ratios = []
    for j in (1, 2, 3):
        spec = EmbeddingSpec.level_embedding(1, j, (2, 1), (2, 2))
        cf = opnorm_closed_form(spec, oracle_budget=0)
        bf = opnorm_bruteforce(spec, budget=20000, seed=0).value
        ratios.append(bf / cf.value)
    c0 = min(ratios)
    ok = c0 >= 0.3 and max(ratios) <= 1 + 1e-9
    return ok, "ratios " + ", ".join(f"{r:.4f}" for r in ratios) + f"; c0 = {c0:.4f}"


# -- 3 ---------------------------------------------------------------------

def random_sequences(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """Mixture of dense Gaussian, sparse, heavy-tailed and constant-magnitude rows."""
    out = rng.standard_normal((n, size))
    q = n // 4
    out[:q] *= rng.random((q, size)) < rng.random((q, 1))
    out[q:2 * q] = rng.standard_cauchy((q, size))
    out[2 * q:3 * q] = np.sign(out[2 * q:3 * q]) * rng.random((q, 1))
    return out


_LEVEL_CASES = ((1, 4), (2, 2), (2, 3))
_MORREY_PARAMS = ((F(2), F(1)), (F(4), F(2)), (F(3), F(1, 2)), (F(2), F(2)), (F(5, 2), F(3, 2)))
_SEQ_PARAMS = (
    SeqSpaceParams(F(1, 2), 2, 1, math.inf),
    SeqSpaceParams(1, 4, 2, F(1, 2)),
    SeqSpaceParams(F(-1, 3), 3, F(1, 2), 2),
)
_HOLDER_PAIRS = (((2, 1), (2, 2)), ((4, 1), (2, 2)), ((3, F(1, 2)), (4, 2)), ((4, 2), (3, 3)))


def _violations(lhs: np.ndarray, rhs: np.ndarray) -> int:
    return int(np.count_nonzero(lhs > rhs * (1 + REL)))


def _rel_mismatch(a: np.ndarray, b: np.ndarray) -> int:
    scale = np.maximum(np.abs(a), np.abs(b))
    return int(np.count_nonzero(np.abs(a - b) > REL * scale))


def property_suite(n: int = N_RANDOM, seed: int = 0) -> dict[str, int]:
    """Violation counts per property family (all must be 0)."""
    rng = np.random.default_rng(seed)
    counts = {"homogeneity": 0, "monotonicity": 0, "r-triangle": 0, "m_pp = l_p": 0,
              "ball inclusions": 0, "hoelder": 0}
    for d, j in _LEVEL_CASES:
        size = 1 << (d * j)
        x = random_sequences(rng, n, size)
        y = random_sequences(rng, n, size)
        c = rng.standard_normal(n) * 10.0 ** rng.uniform(-3, 3, n)
        grow = np.abs(x) * (1 + rng.random((n, size)) * (rng.random((n, size)) < 0.5))
        for u, p in _MORREY_PARAMS:
            mp = MorreyLevelParams(u, p)
            nx = morrey_norms(x, d, j, mp)
            counts["homogeneity"] += _rel_mismatch(morrey_norms(c[:, None] * x, d, j, mp), np.abs(c) * nx)
            counts["monotonicity"] += _violations(nx, morrey_norms(grow, d, j, mp))
            r = float(mp.r)
            counts["r-triangle"] += _violations(morrey_norms(x + y, d, j, mp) ** r,
                                                nx ** r + morrey_norms(y, d, j, mp) ** r)
            counts["m_pp = l_p"] += _rel_mismatch(morrey_norms(x, d, j, MorreyLevelParams(p, p)),
                                                  lp_norms(x, p))
            counts["ball inclusions"] += _violations(nx, lp_norms(x, u))
            counts["ball inclusions"] += _violations(
                lp_norms(x, p), pow2(j * d * (recip(p) - recip(u))) * nx)
        for src, tgt in _HOLDER_PAIRS:
            s, t = MorreyLevelParams(*src), MorreyLevelParams(*tgt)
            counts["hoelder"] += _violations(morrey_norms(x, d, j, t), holder_bound(x, d, j, s, t))
    d, J = 1, 4
    size = sum(1 << (i * d) for i in range(J + 1))
    x = random_sequences(rng, n, size)
    y = random_sequences(rng, n, size)
    c = rng.standard_normal(n) * 10.0 ** rng.uniform(-3, 3, n)
    grow = np.abs(x) * (1 + rng.random((n, size)))
    for sp in _SEQ_PARAMS:
        nx = seq_space_norms(x, d, J, sp)
        counts["homogeneity"] += _rel_mismatch(seq_space_norms(c[:, None] * x, d, J, sp), np.abs(c) * nx)
        counts["monotonicity"] += _violations(nx, seq_space_norms(grow, d, J, sp))
        r = float(rnorm_exponent(sp))
        counts["r-triangle"] += _violations(seq_space_norms(x + y, d, J, sp) ** r,
                                            nx ** r + seq_space_norms(y, d, J, sp) ** r)
    for p in (F(1, 2), F(1), F(2), math.inf):
        xs = random_sequences(rng, n, 16)
        ys = random_sequences(rng, n, 16)
        r = float(LpParams(p).r)
        counts["r-triangle"] += _violations(lp_norms(xs + ys, p) ** r, lp_norms(xs, p) ** r + lp_norms(ys, p) ** r)
    return counts


@_timed(3, "quasi-norm property suite", 120)
def criterion_3():
    counts = property_suite()
    detail = ", ".join(f"{k} {v}" for k, v in counts.items())
    return all(v == 0 for v in counts.values()), f"violations per {N_RANDOM} sequences: {detail}"


# -- 4 ---------------------------------------------------------------------

@_timed(4, "geometric tail of the volumetric bound", 60)
def criterion_4():
    src, tgt = (2, 1), (4, 2)
    spec = EmbeddingSpec.level_embedding(1, 2, src, tgt)
    D = spec.size
    ks = list(range(2 * D, 10 * D + 1))
    fit = fit_series(ks, [volume_lower_bound(spec, k) for k in ks], mode="geometric")
    slope2 = fit.slope / math.log(2)
    slope_ok = abs(slope2 + 1 / D) <= 0.15 / D
    pred = 2.0 ** (1 / tgt[0] - 1 / src[0])
    vals = []
    for j in (1, 2, 3):
        sj = EmbeddingSpec.level_embedding(1, j, src, tgt)
        vals.append(volume_lower_bound(sj, 2 * sj.size))
    growth = [b / a / pred for a, b in zip(vals, vals[1:])]
    growth_ok = all(0.25 <= g <= 4 for g in growth)
    detail = (f"log2-slope {slope2:.6f} vs {-1 / D:.6f}; prefactor growth / "
              f"2^(1/u2-1/u1) = " + ", ".join(f"{g:.3f}" for g in growth))
    return slope_ok and growth_ok, detail


# -- 5 ---------------------------------------------------------------------

def step3_table(params=(2, 1, 2, 2), d: int = 1, levels=(1, 2, 3)) -> list[dict]:
    u1, p1, u2, p2 = params
    src, tgt = MorreyLevelParams(u1, p1), MorreyLevelParams(u2, p2)
    rows = []
    for j in levels:
        v = step3_lower_diagram(d, j, params)
        growth = pow2(j * d * two_sided_exponent(src, tgt))
        rows.append({"j": j, "k": sparse_spread_count(d, j, u1, p1), "value": v,
                     "growth": growth, "normalised": v / growth})
    return rows


@_timed(5, "sparse-diagram lower bound tracks the level-norm growth", 120)
def criterion_5():
    rows = step3_table()
    norm = [r["normalised"] for r in rows]
    band = max(norm) / min(norm)
    ks = [r["k"] for r in rows]
    if len(set(ks)) >= 2:
        x, y = np.log(ks), np.log([r["value"] for r in rows])
        slope = float(np.polyfit(x, y, 1)[0])
        slope_txt = f"{slope:.3f}"
    else:
        slope_txt = "undefined"
    detail = (f"k_j = {ks}, values " + ", ".join(f"{r['value']:.4f}" for r in rows)
              + f"; value / 2^(jd(1/u2-p1/(u1 p2))) within factor {band:.3f} (limit 4)"
              + f"; informational log-log slope over k_j {slope_txt}")
    return band <= 4.0 and all(r["value"] > 0 for r in rows), detail


# -- 6 ---------------------------------------------------------------------

NC, CL, AG, BD = (RegimeKind.NOT_COMPACT, RegimeKind.CLASSICAL, RegimeKind.ALPHA_GAP, RegimeKind.BOUNDARY)


def _dt(delta, u1, p1, u2, p2, d=1):
    return lambda: classify(ParamTuple.from_delta(d, delta, u1, p1, u2, p2))


# (label, thunk, expected kind, expected exponent); exponents worked out by hand
GOLDEN_REGIMES = [
    ("two-sided base, delta 1/5", _dt("0.2", 2, 1, 2, 2), NC, F(0)),
    ("two-sided base, delta 2/5", _dt("0.4", 2, 1, 2, 2), AG, F(3, 10)),
    ("two-sided base, delta 3/5", _dt("0.6", 2, 1, 2, 2), CL, F(3, 5)),
    ("two-sided base, delta 1/2", _dt("1/2", 2, 1, 2, 2), BD, F(1, 2)),
    ("two-sided base, delta at threshold", _dt("1/4", 2, 1, 2, 2), NC, F(0)),
    ("sigma1 = sigma2", _dt(0, 2, 1, 2, 2), NC, F(0)),
    ("two-sided base, delta 3/10", _dt("0.3", 2, 1, 2, 2), AG, F(1, 10)),
    ("u1 > u2 two-sided, at threshold", _dt("1/8", 4, 1, 2, 2), NC, F(0)),
    ("u1 > u2 two-sided, delta 1/4", _dt("1/4", 4, 1, 2, 2), AG, F(1, 6)),
    ("u1 > u2 two-sided, boundary", _dt("1/2", 4, 1, 2, 2), BD, F(1, 2)),
    ("u1 > u2 two-sided, delta 1", _dt(1, 4, 1, 2, 2), CL, F(1)),
    ("u1 > u2 two-sided, delta 3/8", _dt("3/8", 4, 1, 2, 2), AG, F(1, 3)),
    ("p1 = u1, at threshold", _dt("1/4", 2, 2, 4, 4), NC, F(0)),
    ("p1 = u1, delta 3/10", _dt("0.3", 2, 2, 4, 4), CL, F(3, 10)),
    ("p1 = u1, p2 < u2, at threshold", _dt("3/8", 2, 2, 8, 4), NC, F(0)),
    ("p1 = u1, p2 < u2, delta 1/2", _dt("1/2", 2, 2, 8, 4), CL, F(1, 2)),
    ("p1 = u1 = 1, below t_u", _dt("0.6", 1, 1, 3, 2), NC, F(0)),
    ("p1 = u1 = 1, delta 1", _dt(1, 1, 1, 3, 2), CL, F(1)),
    ("p1 >= p2, u2 >= u1", _dt("0.1", 4, 2, 4, 1), CL, F(1, 10)),
    ("p1 >= p2, u2 >= u1, delta 0", _dt(0, 4, 2, 4, 1), NC, F(0)),
    ("p1 >= p2, u2 < u1", _dt("0.05", 4, 2, 2, 1), CL, F(1, 20)),
    ("t_u dominant, below", _dt("0.2", 2, 1, 4, 1), NC, F(0)),
    ("t_u dominant, above", _dt("0.3", 2, 1, 4, 1), CL, F(3, 10)),
    ("p2/u2 = p1/u1", _dt("0.4", 2, 1, 8, 4), CL, F(2, 5)),
    ("d = 2 boundary", lambda: classify(ParamTuple(2, 1, 2, 1, 0, 2, 2)), BD, F(1, 2)),
    ("d = 2 alpha gap", lambda: classify(ParamTuple(2, F(3, 5), 2, 1, F(-1, 5), 2, 2)), AG, F(3, 10)),
    ("function space, s1 - s2 = 2/5",
     lambda: classify_function_space(1, "0.4", 2, 1, 0, 2, 2), AG, F(3, 10)),
    ("L_r target, p >= r", lambda: classify_into_lr(1, "1/2", 4, 2, 2), CL, F(1, 2)),
    ("L_r target, p < r", lambda: classify_into_lr(1, "1/4", 4, 1, 2), AG, F(1, 6)),
    ("L_inf target, s = d/u", lambda: classify_into_lr(2, "1/2", 4, 2, "inf"), NC, F(0)),
]


def golden_mismatches() -> list[tuple]:
    bad = []
    for label, thunk, kind, exponent in GOLDEN_REGIMES:
        reg = thunk()
        if reg.kind is not kind or reg.exponent != exponent:
            bad.append((label, reg.kind.value, reg.exponent, kind.value, exponent))
    return bad


@_timed(6, "regime classifier golden table", 1)
def criterion_6():
    bad = golden_mismatches()
    kinds = {row[2] for row in GOLDEN_REGIMES}
    detail = f"{len(GOLDEN_REGIMES) - len(bad)}/{len(GOLDEN_REGIMES)} rows match, {len(kinds)} kinds"
    if bad:
        detail += f"; first mismatch {bad[0]}"
    return not bad and len(kinds) == 4 and len(GOLDEN_REGIMES) >= 30, detail


# -- 7 ---------------------------------------------------------------------

def _geometric(a: float, rho: float, ks) -> EntropyBoundSeries:
    return EntropyBoundSeries.from_bounds(None, list(ks), [0.0] * len(ks), [a * rho**k for k in ks])


def combiner_checks() -> dict[str, bool]:
    ks = range(1, 17)
    s1 = _geometric(3.0, 0.8, ks)
    norm = 2.5
    ident = EntropyBoundSeries.from_bounds(None, list(ks), [0.0] * 16, [norm] * 16)
    m = combine_multiplicativity(s1, ident)
    m_sym = combine_multiplicativity(ident, s1)
    checks = {
        "mult: <= upper1 * ||id||": all(m.upper_at(k) <= s1.upper_at(k) * norm * (1 + REL) for k in ks),
        "mult: symmetric k1 = 1": all(m_sym.upper_at(k) <= norm * s1.upper_at(k) * (1 + REL) for k in ks),
        "mult: nonincreasing": bool(np.all(np.diff(m.uppers()) <= 0)),
    }
    a0, a1, rho, theta = 2.0, 5.0, 0.7, 0.3
    s0, s1g = _geometric(a0, rho, ks), _geometric(a1, rho, ks)
    ip = combine_interpolation(s0, s1g, theta)
    want = [a0 ** (1 - theta) * a1**theta * rho**k for k in ks]
    got = [ip.upper_at(2 * k) for k in ks]
    checks["interp: geometric shape"] = bool(np.allclose(got, want, rtol=REL, atol=0))
    same = combine_interpolation(s0, s0, theta)
    checks["interp: s0 = s1"] = all(same.upper_at(2 * k) <= s0.upper_at(k) * (1 + REL) for k in ks)
    for bad_theta in (0.0, 1.0):
        try:
            combine_interpolation(s0, s1g, bad_theta)
            checks[f"interp: theta = {bad_theta:g} rejected"] = False
        except ValueError:
            checks[f"interp: theta = {bad_theta:g} rejected"] = True
    return checks


def interpolation_hypothesis_violations(n: int = N_RANDOM, seed: int = 1) -> int:
    """``||.|m*|| <= ||.|l_inf||**(1-p1/p2) ||.|m_{u1,p1}||**(p1/p2)`` on random sequences."""
    rng = np.random.default_rng(seed)
    bad = 0
    for d, j in _LEVEL_CASES:
        x = random_sequences(rng, n, 1 << (d * j))
        for src, tgt in _HOLDER_PAIRS:
            s, t = MorreyLevelParams(*src), MorreyLevelParams(*tgt)
            theta = float(s.p / t.p)
            lhs = morrey_star_norms(x, d, j, s, t)
            rhs = lp_norms(x, math.inf) ** (1 - theta) * morrey_norms(x, d, j, s) ** theta
            bad += _violations(lhs, rhs)
    return bad


@_timed(7, "combiners and the interpolation hypothesis", 60)
def criterion_7():
    checks = combiner_checks()
    bad = interpolation_hypothesis_violations()
    failed = [k for k, v in checks.items() if not v]
    detail = f"{len(checks) - len(failed)}/{len(checks)} combiner checks; hypothesis violations {bad}/{N_RANDOM} per case"
    if failed:
        detail += f"; failed {failed}"
    return not failed and bad == 0, detail


# -- 8 ---------------------------------------------------------------------

DETERMINISM_CONFIG = {
    "params": [{"d": 1, "delta": "2/5", "u1": 2, "p1": 1, "u2": 2, "p2": 2}],
    "levels": {"min": 1, "max": 3},
    "k": {"start": 1, "stop": 10},
    "methods": ["volume", "packing", "covering", "schuett", "step3"],
    "seed": 7,
    "samples": 128,
}


@_timed(8, "sweep determinism", 120)
def criterion_8():
    cfg = ExperimentConfig.from_dict(DETERMINISM_CONFIG)
    with tempfile.TemporaryDirectory() as tmp:
        a, b = Path(tmp, "a"), Path(tmp, "b")
        run_sweep(cfg, a, threads=1)
        run_sweep(cfg, b, threads=2)
        da, db = (a / "sweep.csv").read_bytes(), (b / "sweep.csv").read_bytes()
    rows = da.decode().count("\n") - 2
    return da == db, f"{rows} rows, byte-identical: {da == db}"


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8)


def run_all(numbers=None) -> list[CriterionResult]:
    chosen = CRITERIA if numbers is None else [CRITERIA[i - 1] for i in numbers]
    return [c() for c in chosen]
