"""Embedding operators between Morrey sequence spaces.

Closed-form operator norms of the level embedding
``id_j : m_{u1,p1} -> m_{u2,p2}``, an independent brute-force oracle that
produces certified lower bounds, the sparse extremal sequences, and the
level-block splitting used for multi-level spaces.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._numbers import floor_pow2, pow2, recip
from .dyadic import (
    CubeIndex,
    LevelSequence,
    MultiLevelSequence,
    iter_cubes,
    linear_index,
    position_of,
    subcube_indicator,
)
from .norms import LpParams, MorreyLevelParams, SeqSpaceParams, morrey_level_norm
from .volumes import volumetric_bound

MAX_ORACLE_SIZE = 1 << 12
_LEVEL_KINDS = (LpParams, MorreyLevelParams)


@dataclass(frozen=True)
class EmbeddingSpec:
    """Identity map between two quasi-norms on the same coefficient lattice.

    For per-level spaces (:class:`LpParams`, :class:`MorreyLevelParams`)
    ``level`` is ``j`` and vectors have ``2**(j*dim)`` entries.  For
    :class:`SeqSpaceParams` ``level`` is the maximal level ``J`` and vectors
    are the concatenation of levels ``0..J``.
    """

    dim: int
    level: int
    source: LpParams | MorreyLevelParams | SeqSpaceParams
    target: LpParams | MorreyLevelParams | SeqSpaceParams

    def __post_init__(self):
        if self.dim < 1 or self.level < 0:
            raise ValueError("invalid lattice")
        src_seq = isinstance(self.source, SeqSpaceParams)
        tgt_seq = isinstance(self.target, SeqSpaceParams)
        if src_seq != tgt_seq:
            raise ValueError("source and target must both be per-level or both multi-level")
        for space in (self.source, self.target):
            if not isinstance(space, _LEVEL_KINDS + (SeqSpaceParams,)):
                raise TypeError(f"unsupported space {space!r}")

    @classmethod
    def level_embedding(cls, dim: int, level: int, source: tuple, target: tuple) -> "EmbeddingSpec":
        """``m_{u1,p1} -> m_{u2,p2}`` from ``(u, p)`` pairs."""
        return cls(dim, level, MorreyLevelParams(*source), MorreyLevelParams(*target))

    @classmethod
    def lp_embedding(cls, size: int, p_source, p_target) -> "EmbeddingSpec":
        """``l_p^N -> l_q^N`` for ``N`` a power of two (lattice with ``dim = 1``)."""
        level = int(size).bit_length() - 1
        if size < 1 or 1 << level != size:
            raise ValueError("size must be a power of two")
        return cls(1, level, LpParams(p_source), LpParams(p_target))

    @property
    def per_level(self) -> bool:
        return not isinstance(self.source, SeqSpaceParams)

    @property
    def size(self) -> int:
        if self.per_level:
            return 1 << (self.level * self.dim)
        return sum(1 << (j * self.dim) for j in range(self.level + 1))

    def source_norms(self, values: np.ndarray) -> np.ndarray:
        return self.source.batch_norm(values, self.dim, self.level)

    def target_norms(self, values: np.ndarray) -> np.ndarray:
        return self.target.batch_norm(values, self.dim, self.level)

    def scaled_source(self, r: float) -> "ScaledEmbedding":
        return ScaledEmbedding(self, float(r))


@dataclass(frozen=True)
class ScaledEmbedding:
    """The embedding restricted to the ball of radius ``radius`` of the source."""

    base: EmbeddingSpec
    radius: float

    def __getattr__(self, name):
        return getattr(self.base, name)

    def source_norms(self, values: np.ndarray) -> np.ndarray:
        return self.base.source_norms(values) / self.radius


class CaseTag(str, enum.Enum):
    EQ1A = "EQ1a"
    EQ1B = "EQ1b"
    EQ2 = "EQ2"
    TWO_SIDED = "TWO_SIDED"


@dataclass(frozen=True)
class OpNormResult:
    value: float
    lower: float
    exact: bool
    case_tag: CaseTag

    def __post_init__(self):
        if self.lower > self.value * (1 + 1e-12):
            raise ValueError("lower bound exceeds the upper value")


@dataclass(frozen=True)
class OracleResult:
    """Best ratio found by :func:`opnorm_bruteforce` (a certified lower bound)."""

    value: float
    exhausted: bool
    evaluations: int
    argmax: np.ndarray

    def __float__(self):
        return self.value


def _as_morrey(space) -> MorreyLevelParams:
    if isinstance(space, MorreyLevelParams):
        return space
    if isinstance(space, LpParams) and space.p != math.inf:
        return MorreyLevelParams(space.p, space.p)
    raise ValueError(f"no closed form for {space!r}")


def classify_case(source: MorreyLevelParams, target: MorreyLevelParams) -> CaseTag:
    p1, u1, p2, u2 = source.p, source.u, target.p, target.u
    if p1 >= p2:
        return CaseTag.EQ1A if u2 >= u1 else CaseTag.EQ2
    if p2 / u2 <= p1 / u1:
        return CaseTag.EQ1B
    return CaseTag.TWO_SIDED


def two_sided_exponent(source: MorreyLevelParams, target: MorreyLevelParams) -> Fraction:
    """``1/u2 - p1/(u1 p2)``, the growth rate per ``jd`` of the TWO_SIDED norm."""
    return recip(target.u) - source.p / (source.u * target.p)


def opnorm_closed_form(spec: EmbeddingSpec, *, oracle_budget: int = 4000) -> OpNormResult:
    """``||id_j : m_{u1,p1} -> m_{u2,p2}||`` from the four-case formula.

    In the TWO_SIDED case only an upper value is known in closed form; the
    reported ``lower`` is the brute-force oracle's value (seed 0), which is
    a certified lower bound.
    """
    if not spec.per_level:
        raise ValueError("closed form is only available for per-level embeddings")
    src, tgt = _as_morrey(spec.source), _as_morrey(spec.target)
    jd = spec.level * spec.dim
    case = classify_case(src, tgt)
    if case in (CaseTag.EQ1A, CaseTag.EQ1B):
        return OpNormResult(1.0, 1.0, True, case)
    if case is CaseTag.EQ2:
        v = pow2(jd * (recip(tgt.u) - recip(src.u)))
        return OpNormResult(v, v, True, case)
    v = pow2(jd * two_sided_exponent(src, tgt))
    lower = _cached_oracle(spec, oracle_budget)
    return OpNormResult(v, min(lower, v), False, case)


@lru_cache(maxsize=256)
def _cached_oracle(spec: EmbeddingSpec, budget: int) -> float:
    return opnorm_bruteforce(spec, budget=budget, seed=0).value


def operator_norm_upper(spec: EmbeddingSpec) -> float:
    """A certified upper bound on ``||id||`` (exact except in the TWO_SIDED case).

    Covers the closed-form cases plus embeddings with an ``l_inf`` end:
    by monotonicity ``||id : l_inf -> Y|| = ||(1,..,1)|Y||`` and
    ``||id : X -> l_inf|| = 1 / min_i ||e_i|X||``.
    """
    if spec.per_level:
        try:
            return opnorm_closed_form(spec, oracle_budget=0).value
        except ValueError:
            pass
    n = spec.size
    if isinstance(spec.source, LpParams) and spec.source.p == math.inf:
        return float(spec.target_norms(np.ones(n)))
    if isinstance(spec.target, LpParams) and spec.target.p == math.inf:
        return float(1.0 / spec.source_norms(np.eye(n)).min())
    raise ValueError(f"no certified operator norm for {spec!r}")


def _level_blocks(spec: EmbeddingSpec):
    if spec.per_level:
        yield spec.level, slice(0, spec.size)
        return
    start = 0
    for j in range(spec.level + 1):
        n = 1 << (j * spec.dim)
        yield j, slice(start, start + n)
        start += n


def spread_indicator(dim: int, level: int, count: int) -> np.ndarray:
    """0/1 level array with ``count`` ones spread over the coarsest possible level.

    The coarse level ``l`` is the smallest with ``2**(l*dim) >= count``;
    level-``l`` cubes are chosen by evenly strided linear index and each
    receives a one in its lexicographically first level-``level`` cell.
    """
    n = 1 << (level * dim)
    if not 1 <= count <= n:
        raise ValueError(f"count must lie in [1, {n}]")
    coarse = 0
    while (1 << (coarse * dim)) < count:
        coarse += 1
    n_coarse = 1 << (coarse * dim)
    shift = level - coarse
    out = np.zeros(n)
    for i in range(count):
        pos = position_of(i * n_coarse // count, dim, coarse)
        out[linear_index([m << shift for m in pos], level)] = 1.0
    return out


def _structured_candidates(spec: EmbeddingSpec) -> np.ndarray:
    rows = []
    n = spec.size
    rows.append(np.ones(n))
    for j, sl in _level_blocks(spec):
        m = sl.stop - sl.start
        exhaustive = m <= 512
        for idx in range(m if exhaustive else 1):
            v = np.zeros(n)
            v[sl.start + idx] = 1.0
            rows.append(v)
        for nu in range(j + 1):
            cubes = iter_cubes(spec.dim, nu) if exhaustive else [CubeIndex(nu, (0,) * spec.dim)]
            for cube in cubes:
                v = np.zeros(n)
                v[sl] = subcube_indicator(spec.dim, j, cube)
                rows.append(v)
        counts = {1 << i for i in range(j * spec.dim + 1)}
        if isinstance(spec.source, (MorreyLevelParams, SeqSpaceParams)) and spec.source.p < spec.source.u:
            counts.add(floor_pow2(j * spec.dim * (1 - spec.source.p / spec.source.u)))
        for c in sorted(counts):
            v = np.zeros(n)
            v[sl] = spread_indicator(spec.dim, j, c)
            rows.append(v)
    return np.array(rows)


def _ratios(spec: EmbeddingSpec, batch: np.ndarray) -> np.ndarray:
    src = spec.source_norms(batch)
    tgt = spec.target_norms(batch)
    out = np.zeros(len(batch))
    ok = src > 0
    out[ok] = tgt[ok] / src[ok]
    return out


def _perturbations(x: np.ndarray) -> np.ndarray:
    n = x.size
    cands = np.repeat(x[None, :], 4 * n, axis=0)
    idx = np.arange(n)
    cands[idx, idx] = 2.0 * x
    cands[n + idx, idx] = 0.5 * x
    cands[2 * n + idx, idx] = 0.0
    cands[3 * n + idx, idx] = x.max()
    return cands


def opnorm_bruteforce(spec: EmbeddingSpec, budget: int = 20000, seed: int = 0,
                      *, starts: int | None = None) -> OracleResult:
    """Certified lower bound on ``||id||`` by explicit search.

    Evaluates ``||x|target|| / ||x|source||`` on structured candidates
    (spikes, all-ones, indicators of dyadic subcubes, sparse spread
    patterns) and then on random nonnegative vectors refined by coordinate
    ascent with the moves ``x2, x1/2, ->0, ->max``.  Each ascent step
    evaluates every single-coordinate move and keeps the best one if it
    strictly improves the ratio; a start ends when no move improves.
    ``budget`` caps the number of vectors evaluated.
    """
    if spec.size > MAX_ORACLE_SIZE:
        raise ValueError(f"lattice of size {spec.size} is too large for the oracle")
    rng = np.random.default_rng(seed)
    cands = _structured_candidates(spec)
    ratios = _ratios(spec, cands)
    best_i = int(np.argmax(ratios))
    best, arg = float(ratios[best_i]), cands[best_i]
    used = len(cands)
    n = spec.size
    if starts is None:
        starts = 8
    exhausted = False
    for s in range(starts):
        if used >= budget:
            exhausted = budget > 0
            break
        kind = s % 3
        if kind == 0:
            x = rng.random(n)
        elif kind == 1:
            x = rng.random(n) * (rng.random(n) < max(1.0 / n, rng.random()))
            if not x.any():
                x[rng.integers(n)] = 1.0
        else:
            x = rng.pareto(1.0, n) + 1e-3
        r = float(_ratios(spec, x[None, :])[0])
        used += 1
        while used < budget:
            cands = _perturbations(x)
            rs = _ratios(spec, cands)
            used += len(cands)
            i = int(np.argmax(rs))
            if not rs[i] > r * (1 + 1e-12):
                break
            x, r = cands[i], float(rs[i])
            x = x / x.max()
        else:
            exhausted = True
        if r > best:
            best, arg = r, x
    return OracleResult(best, exhausted, used, arg)


@dataclass(frozen=True)
class SparseSpread:
    """Output of :func:`extremal_sparse_spread`."""

    sequence: LevelSequence
    count: int
    scale: float


def extremal_sparse_spread(dim: int, level: int, u1, p1) -> SparseSpread:
    """Sparse 0/1 sequence with ``k_j = floor(2**(jd(1-p1/u1)))`` ones, normalised in ``m_{u1,p1}``."""
    mp = MorreyLevelParams(u1, p1)
    if mp.p >= mp.u:
        raise ValueError("the sparse construction needs p1 < u1")
    count = floor_pow2(level * dim * (1 - mp.p / mp.u))
    ones = LevelSequence(dim, level, spread_indicator(dim, level, count))
    norm = morrey_level_norm(ones, mp)
    scale = 1.0 if norm == 1.0 else 1.0 / norm
    return SparseSpread(ones.scaled(scale), count, scale)


def _unpack_params(params):
    if isinstance(params, tuple):
        u1, p1, u2, p2 = params
        return MorreyLevelParams(u1, p1), MorreyLevelParams(u2, p2)
    return MorreyLevelParams(params.u1, params.p1), MorreyLevelParams(params.u2, params.p2)


def step3_lower_diagram(dim: int, level: int, params) -> float:
    """Certified lower bound on ``e_{k_j}(id_j)`` via the sparse diagram.

    ``l_inf^{k_j} -> m_{u1,p1} -> m_{u2,p2} -> l_{p2}^{k_j}``: the first map
    spreads a vector over the support of the sparse extremal sequence (norm
    one), the last restricts to that support (norm at most
    ``2**(jd(1/p2-1/u2))``).  Multiplicativity then bounds ``e_{k_j}(id_j)``
    below by the volumetric bound for ``l_inf^{k_j} -> l_{p2}^{k_j}``.

    ``params`` is a :class:`~morrey_entropy.regimes.ParamTuple` or a tuple
    ``(u1, p1, u2, p2)``.
    """
    src, tgt = _unpack_params(params)
    if classify_case(src, tgt) is not CaseTag.TWO_SIDED:
        raise ValueError("the sparse diagram needs p1 < p2 and p2/u2 > p1/u1")
    spread = extremal_sparse_spread(dim, level, src.u, src.p)
    k = spread.count
    vol = volumetric_bound(k, k, (math.inf, 1.0), (tgt.p, 1.0))
    p2_norm = pow2(level * dim * (recip(tgt.p) - recip(tgt.u)))
    return spread.scale * vol / p2_norm


def sparse_spread_count(dim: int, level: int, u1, p1) -> int:
    mp = MorreyLevelParams(u1, p1)
    return floor_pow2(level * dim * (1 - mp.p / mp.u))


def split_blocks(seq: MultiLevelSequence, M: int) -> tuple[MultiLevelSequence, MultiLevelSequence]:
    """Split into levels ``0..M`` (head) and ``M+1..J`` (tail), zero-padded."""
    if not 0 <= M <= seq.max_level:
        raise ValueError(f"M must lie in [0, {seq.max_level}]")
    head, tail = [], []
    for lev in seq.levels:
        zero = LevelSequence.zeros(lev.dim, lev.level)
        head.append(lev if lev.level <= M else zero)
        tail.append(zero if lev.level <= M else lev)
    return MultiLevelSequence(seq.dim, tuple(head)), MultiLevelSequence(seq.dim, tuple(tail))
