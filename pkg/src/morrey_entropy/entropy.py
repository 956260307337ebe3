"""Certified bounds on entropy numbers of finite-dimensional embeddings.

``e_k(T)`` is the smallest radius such that ``2**(k-1)`` target balls cover
the image of the source unit ball.  Lower bounds come from volume
comparison, from explicit packings, and (for the sparse regime) from the
factorisation in :func:`~morrey_entropy.operators.step3_lower_diagram`;
upper bounds come from explicit grid covers.  All computations work with
real scalars, so the real dimension of a level lattice is ``D = 2**(jd)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .norms import LpParams, MorreyLevelParams, SeqSpaceParams
from .operators import (
    CaseTag,
    EmbeddingSpec,
    _structured_candidates,
    classify_case,
    MAX_ORACLE_SIZE,
    operator_norm_upper,
    opnorm_bruteforce,
    sparse_spread_count,
    step3_lower_diagram,
)
from ._numbers import pow2, recip
from .volumes import ball_volume_lp, log_ball_volume_lp, volumetric_bound

__all__ = [
    "BoundEntry",
    "EntropyBoundSeries",
    "ResourceLimitError",
    "ball_volume_lp",
    "log_ball_volume_lp",
    "volume_lower_bound",
    "packing_lower_bound",
    "packing_profile",
    "covering_upper_bound",
    "covering_epsilon",
    "schuett_reference",
    "lre_norm",
    "combine_multiplicativity",
    "combine_interpolation",
    "entropy_series",
]

MAX_COUNT = 1 << 40
MAX_FRONTIER = 200_000
BISECTION_RTOL = 1e-3


class ResourceLimitError(RuntimeError):
    """A lattice enumeration would exceed its resource budget."""


@dataclass(frozen=True)
class BoundEntry:
    k: int
    lower: float
    upper: float
    methods: tuple[str, ...] = ()


@dataclass(frozen=True)
class EntropyBoundSeries:
    """Per-``k`` certified ``(lower, upper)`` bounds on ``e_k`` of one embedding."""

    spec: EmbeddingSpec | None
    entries: tuple[BoundEntry, ...]
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        entries = tuple(sorted(self.entries, key=lambda e: e.k))
        object.__setattr__(self, "entries", entries)
        ks = [e.k for e in entries]
        if not entries:
            raise ValueError("empty series")
        if len(set(ks)) != len(ks) or ks[0] < 1:
            raise ValueError("k values must be distinct positive integers")
        for e in entries:
            if e.lower < 0 or e.lower > e.upper * (1 + 1e-9):
                raise ValueError(f"inconsistent bounds at k={e.k}: {e.lower} > {e.upper}")

    @classmethod
    def from_bounds(cls, spec, ks, lowers, uppers, methods=None, notes=()) -> "EntropyBoundSeries":
        """Build a series, tightening raw bounds with monotonicity of ``e_k``.

        ``upper(k)`` is replaced by the running minimum over smaller ``k`` and
        ``lower(k)`` by the running maximum over larger ``k``.
        """
        order = np.argsort(ks)
        ks = [int(ks[i]) for i in order]
        lo = np.maximum.accumulate(np.asarray(lowers, float)[order][::-1])[::-1]
        up = np.minimum.accumulate(np.asarray(uppers, float)[order])
        methods = [tuple(methods[i]) for i in order] if methods is not None else [()] * len(ks)
        entries = tuple(BoundEntry(k, float(a), float(b), m) for k, a, b, m in zip(ks, lo, up, methods))
        return cls(spec, entries, tuple(notes))

    @property
    def ks(self) -> list[int]:
        return [e.k for e in self.entries]

    def lowers(self) -> np.ndarray:
        return np.array([e.lower for e in self.entries])

    def uppers(self) -> np.ndarray:
        return np.array([e.upper for e in self.entries])

    def upper_at(self, k: int) -> float:
        """Best recorded upper bound valid at ``k`` (``e_k <= e_k'`` for ``k' <= k``)."""
        vals = [e.upper for e in self.entries if e.k <= k]
        return min(vals) if vals else math.inf

    def lower_at(self, k: int) -> float:
        vals = [e.lower for e in self.entries if e.k >= k]
        return max(vals) if vals else 0.0


def _radius(spec) -> float:
    return getattr(spec, "radius", 1.0)


def _inner_ball(space, dim: int, level: int) -> tuple:
    if isinstance(space, LpParams):
        return (space.p, 1.0)
    if isinstance(space, MorreyLevelParams):
        return (space.u, 1.0)
    raise ValueError("volume bounds need a per-level space")


def _outer_ball(space, dim: int, level: int) -> tuple:
    if isinstance(space, LpParams):
        return (space.p, 1.0)
    if isinstance(space, MorreyLevelParams):
        return (space.p, pow2(level * dim * (recip(space.p) - recip(space.u))))
    raise ValueError("volume bounds need a per-level space")


def volume_lower_bound(spec, k: int) -> float:
    """``2**(-(k-1)/D) * (vol B_source / vol B_target)**(1/D)`` with sandwiching balls.

    Morrey balls are replaced by ``B_u(0,1)`` (inside the source ball) and
    ``B_p(0, 2**(jd(1/p-1/u)))`` (around the target ball).
    """
    if not spec.per_level:
        raise ValueError("volume bounds are defined for per-level embeddings")
    D = spec.size
    p_in, r_in = _inner_ball(spec.source, spec.dim, spec.level)
    outer = _outer_ball(spec.target, spec.dim, spec.level)
    return volumetric_bound(D, k, (p_in, r_in * _radius(spec)), outer)


def _quasi_constant(space) -> float:
    r = space.r
    return 2.0 ** (float(1 / Fraction(r)) - 1.0)


def _sample_lp_ball(rng: np.random.Generator, n: int, D: int, p, radius: float) -> np.ndarray:
    if p == math.inf:
        return radius * rng.uniform(-1.0, 1.0, size=(n, D))
    pf = float(p)
    g = rng.gamma(1.0 / pf, 1.0, size=(n, D)) ** (1.0 / pf)
    g *= rng.choice([-1.0, 1.0], size=(n, D))
    z = rng.exponential(1.0, size=(n, 1))
    denom = ((np.abs(g) ** pf).sum(axis=1, keepdims=True) + z) ** (1.0 / pf)
    return radius * g / denom


def _source_ball_points(spec, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    D = spec.size
    base = spec.base if hasattr(spec, "base") else spec
    struct = _structured_candidates(base)
    struct = struct / spec.source_norms(struct)[:, None]
    pts = [np.zeros((1, D)), struct, -struct]
    if samples > 0:
        if spec.per_level:
            p_out, r_out = _outer_ball(spec.source, spec.dim, spec.level)
        else:
            p_out, r_out = math.inf, 1.0
        r_out *= _radius(spec)
        if not spec.per_level:
            # the multi-level source ball lies inside the l_inf ball of radius
            # 1 / min spike norm
            r_out = float(1.0 / spec.source_norms(np.eye(D)).min())
        accepted = np.empty((0, D))
        for _ in range(20):
            draw = _sample_lp_ball(rng, samples, D, p_out, r_out)
            ok = spec.source_norms(draw) <= 1.0
            accepted = np.vstack([accepted, draw[ok]])
            if len(accepted) >= samples:
                break
        if len(accepted) < samples:
            draw = _sample_lp_ball(rng, samples - len(accepted), D, p_out, r_out)
            nrm = spec.source_norms(draw)
            draw = draw / np.maximum(nrm, 1.0)[:, None]
            accepted = np.vstack([accepted, draw])
        pts.append(accepted[:samples])
    return np.vstack(pts)


def _pairwise_target(spec, pts: np.ndarray, chunk: int = 1 << 16) -> np.ndarray:
    n = len(pts)
    iu, ju = np.triu_indices(n, k=1)
    out = np.zeros((n, n))
    vals = np.empty(iu.size)
    for s in range(0, iu.size, chunk):
        sl = slice(s, s + chunk)
        vals[sl] = spec.target_norms(pts[iu[sl]] - pts[ju[sl]])
    out[iu, ju] = vals
    out[ju, iu] = vals
    return out


def _greedy_count(dist: np.ndarray, t: float, stop: int) -> int:
    kept: list[int] = []
    for i in range(len(dist)):
        if not kept or dist[i, kept].min() > t:
            kept.append(i)
            if len(kept) > stop:
                break
    return len(kept)


def packing_profile(spec, k_max: int, samples: int = 256, seed: int = 0) -> np.ndarray:
    """Certified packing lower bounds for ``k = 1..k_max`` (index ``k-1``).

    Points of the source unit ball are kept greedily when their target
    quasi-distance to every kept point exceeds ``2*C*eps`` (``C`` the
    quasi-triangle constant of the target).  More than ``2**(k-1)`` such
    points certify ``e_k >= eps``.  ``eps`` is found by bisection to a
    relative tolerance of ``1e-3``; a bound certified for some ``k`` also
    holds for every smaller ``k``, which is applied at the end.
    """
    if spec.size > 1 << 12:
        raise ValueError("lattice too large for packing bounds")
    pts = _source_ball_points(spec, samples, seed)
    dist = _pairwise_target(spec, pts)
    C = _quasi_constant(spec.target)
    dmax = float(dist.max()) if len(pts) > 1 else 0.0
    out = np.zeros(k_max)
    for k in range(1, k_max + 1):
        need = 1 << (k - 1)
        if need >= len(pts) or dmax == 0.0:
            break
        lo, hi = 0.0, dmax / (2 * C)
        if _greedy_count(dist, 0.0, need) <= need:
            break
        while hi - lo > BISECTION_RTOL * hi:
            mid = 0.5 * (lo + hi)
            if _greedy_count(dist, 2 * C * mid, need) > need:
                lo = mid
            else:
                hi = mid
        out[k - 1] = lo
    return np.maximum.accumulate(out[::-1])[::-1]


def packing_lower_bound(spec, k: int, samples: int = 256, seed: int = 0) -> float:
    """Largest packing-certified ``eps <= e_k``; 0 when no packing is found."""
    if k < 1:
        raise ValueError("k must be positive")
    return float(packing_profile(spec, k, samples, seed)[k - 1])


def _max_index(spec, delta: float, offset: bool) -> np.ndarray:
    # largest index a_i with a single nonzero coordinate still admissible
    spikes = spec.source_norms(np.eye(spec.size))
    top = 1.0 / (delta * spikes)
    if offset:
        return np.ceil(top).astype(np.int64) - 1
    return np.ceil(top + 0.5).astype(np.int64) - 1


def _corner(a: np.ndarray, delta: float, offset: bool) -> np.ndarray:
    if offset:
        return delta * a
    return delta * np.maximum(a - 0.5, 0.0)


def _admissible_counts(spec, base: np.ndarray, col: int, top: int, delta: float, offset: bool) -> np.ndarray:
    """For each row of ``base`` (admissible, zero from ``col`` on), the number
    of values ``a`` in ``0..top`` keeping the row admissible when placed at ``col``.

    Admissible values form an initial segment, found by a batched binary search.
    """
    n = len(base)
    lo = np.zeros(n, dtype=np.int64)                # admissible
    hi = np.full(n, top + 1, dtype=np.int64)        # inadmissible
    while np.any(hi - lo > 1):
        mid = (lo + hi) // 2
        trial = base.copy()
        trial[:, col] = _corner(mid.astype(float), delta, offset)
        ok = spec.source_norms(trial) < 1.0
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return lo + 1


def _count_cells(spec, delta: float, offset: bool) -> int:
    """Grid cells of side ``delta`` meeting the source unit ball.

    Cells are indexed by nonnegative integer vectors ``a`` (signs are
    restored by multiplicity).  A cell meets the ball iff the norm of its
    coordinatewise smallest point is ``< 1``; the admissible set is
    downward closed, so it is enumerated coordinate by coordinate, keeping
    only admissible prefixes.
    """
    D = spec.size
    amax = np.maximum(_max_index(spec, delta, offset), 0)
    prefixes = np.zeros((1, 0), dtype=np.int64)
    base = np.zeros((1, D))
    for i in range(D - 1):
        counts = _admissible_counts(spec, base, i, int(amax[i]), delta, offset)
        total = int(counts.sum())
        if total > MAX_FRONTIER:
            raise ResourceLimitError("grid enumeration frontier too large")
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        vals = np.arange(total) - starts
        prefixes = np.hstack([np.repeat(prefixes, counts, axis=0), vals[:, None]])
        base = np.repeat(base, counts, axis=0)
        base[:, i] = _corner(vals.astype(float), delta, offset)
    last = _admissible_counts(spec, base, D - 1, int(amax[D - 1]), delta, offset)
    if offset:
        total = int(last.sum()) << D
    else:
        nz = (prefixes > 0).sum(axis=1)
        per = 1 + 2 * (last - 1)
        total = sum(int(c) << int(z) for c, z in zip(per, nz))
    if total > MAX_COUNT:
        raise ResourceLimitError(f"cover would need {total} cells")
    return total


def covering_upper_bound(spec, eps: float) -> int:
    """Smallest ``k`` certified by a grid cover to satisfy ``e_k <= eps``.

    Every source point is rounded (ties toward zero) to the centre of its
    cell in a grid of side ``delta``; the rounding error has l_inf norm at
    most ``delta/2`` and so target norm at most
    ``(delta/2) * ||id : l_inf -> target||``.  With
    ``delta = 2 eps / ||id : l_inf -> target||`` the cells meeting the
    source ball give a cover by target balls of radius ``eps``.  Both the
    cell-centred and the vertex-centred grid are tried.  If ``eps`` is at
    least the operator norm a single ball suffices.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if eps >= operator_norm_upper(spec.base if hasattr(spec, "base") else spec) * _radius(spec):
        return 1
    to_inf = float(spec.target_norms(np.ones(spec.size)))
    delta = 2.0 * eps / to_inf
    counts, err = [], None
    for offset in (True, False):
        try:
            counts.append(_count_cells(spec, delta, offset))
        except ResourceLimitError as exc:
            err = exc
    if not counts:
        raise err
    return 1 + (min(counts) - 1).bit_length()


def covering_epsilon(spec, k: int, floor: float | None = None) -> tuple[float, bool]:
    """Smallest grid-certified ``eps`` with ``e_k <= eps``, by log-bisection.

    Returns ``(eps, hit_limit)`` where ``hit_limit`` records whether some
    trial radius was abandoned for exceeding the enumeration budget.
    """
    hi = operator_norm_upper(spec.base if hasattr(spec, "base") else spec) * _radius(spec)
    if k == 1:
        return hi, False
    if floor is None:
        floor = volume_lower_bound(spec, k) if spec.per_level else hi * 1e-6
    lo = max(floor, hi * 1e-9)
    hit = False
    best = hi
    while best / lo > 1 + BISECTION_RTOL:
        mid = math.sqrt(lo * best)
        try:
            ok = covering_upper_bound(spec, mid) <= k
        except ResourceLimitError:
            ok, hit = False, True
        if ok:
            best = mid
        else:
            lo = mid
    return best, hit


def schuett_reference(p1, p2, N: int, k: int) -> float:
    """Shape of ``e_k(id : l_{p1}^N -> l_{p2}^N)`` up to constants (natural log).

    ``1`` for ``k <= log 2N``; ``(log(1+N/k)/k)**(1/p1-1/p2)`` for
    ``log 2N <= k <= 2N``; ``2**(-k/2N) N**(1/p2-1/p1)`` for ``k >= 2N``.
    When ``p2 < p1`` the last expression holds for all ``k``.
    """
    if N < 1 or k < 1:
        raise ValueError("N and k must be positive")
    a = float(recip(_param(p1)) - recip(_param(p2)))
    if float(recip(_param(p2))) > float(recip(_param(p1))) or k >= 2 * N:
        return 2.0 ** (-k / (2 * N)) * N ** (-a)
    if k <= math.log(2 * N):
        return 1.0
    return (math.log1p(N / k) / k) ** a


def _param(x):
    from ._numbers import as_rational
    return as_rational(x, allow_inf=True)


def lre_norm(series: EntropyBoundSeries, r: float, which: str = "upper") -> float:
    """``sup_k k**(1/r) * bound(k)`` over the recorded ``k``."""
    if not r > 0:
        raise ValueError("r must be positive")
    if which not in ("lower", "upper"):
        raise ValueError("which must be 'lower' or 'upper'")
    vals = series.uppers() if which == "upper" else series.lowers()
    ks = np.array(series.ks, dtype=float)
    return float(np.max(ks ** (1.0 / float(r)) * vals))


def _envelope(series: EntropyBoundSeries, kmax: int) -> np.ndarray:
    out = np.full(kmax + 1, math.inf)
    for e in series.entries:
        if e.k <= kmax:
            out[e.k] = min(out[e.k], e.upper)
    return np.minimum.accumulate(out)


def combine_multiplicativity(s1: EntropyBoundSeries, s2: EntropyBoundSeries) -> EntropyBoundSeries:
    """Upper bounds for ``T2 o T1`` from ``e_{k1+k2-1} <= e_{k1}(T1) e_{k2}(T2)``."""
    a, b = s1.spec, s2.spec
    if a is not None and b is not None:
        if a.target != b.source or a.dim != b.dim or a.level != b.level:
            raise ValueError("series are not composable")
        spec = EmbeddingSpec(a.dim, a.level, a.source, b.target)
    else:
        spec = None
    k1max, k2max = max(s1.ks), max(s2.ks)
    u1, u2 = _envelope(s1, k1max), _envelope(s2, k2max)
    kmax = k1max + k2max - 1
    ks = list(range(1, kmax + 1))
    ups = []
    for k in ks:
        best = math.inf
        for k1 in range(max(1, k - k2max + 1), min(k, k1max) + 1):
            best = min(best, u1[k1] * u2[k - k1 + 1])
        ups.append(best)
    return EntropyBoundSeries.from_bounds(
        spec, ks, [0.0] * len(ks), ups, [("multiplicativity",)] * len(ks)
    )


def combine_interpolation(s0: EntropyBoundSeries, s1: EntropyBoundSeries, theta: float,
                          target=None) -> EntropyBoundSeries:
    """``upper_theta(2k) = c * upper_0(k)**(1-theta) * upper_1(k)**theta`` with ``c`` reported as 1.

    Requires a common source and an intermediate target whose quasi-norm is
    dominated by ``||.|B_0||**(1-theta) ||.|B_1||**theta``; the constant
    ``c`` depends only on the quasi-norm constants and is carried
    symbolically (see ``notes``).
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie strictly between 0 and 1")
    a, b = s0.spec, s1.spec
    if a is not None and b is not None and a.source != b.source:
        raise ValueError("interpolated series must share the source space")
    spec = None
    if target is not None and a is not None:
        spec = EmbeddingSpec(a.dim, a.level, a.source, target)
    ks = sorted(set(s0.ks) & set(s1.ks))
    if not ks:
        raise ValueError("series have no common k")
    ups = [s0.upper_at(k) ** (1 - theta) * s1.upper_at(k) ** theta for k in ks]
    return EntropyBoundSeries.from_bounds(
        spec, [2 * k for k in ks], [0.0] * len(ks), ups, [("interpolation",)] * len(ks),
        notes=("upper values hold up to the interpolation constant c",),
    )


def _step3_bound(spec, k: int) -> float | None:
    if not spec.per_level or not isinstance(spec.source, MorreyLevelParams):
        return None
    if not isinstance(spec.target, MorreyLevelParams):
        return None
    if classify_case(spec.source, spec.target) is not CaseTag.TWO_SIDED:
        return None
    src, tgt = spec.source, spec.target
    if k > sparse_spread_count(spec.dim, spec.level, src.u, src.p):
        return None
    return _radius(spec) * step3_lower_diagram(spec.dim, spec.level, (src.u, src.p, tgt.u, tgt.p))


def entropy_series(spec, ks: Sequence[int], methods: Iterable[str] = ("volume", "packing", "covering"),
                   seed: int = 0, samples: int = 256) -> EntropyBoundSeries:
    """Bounds for every ``k`` in ``ks`` from the selected methods.

    Methods: ``volume`` / ``packing`` / ``step3`` / ``oracle`` (lower; the
    oracle bounds ``e_1``, the operator norm), ``covering`` (upper).  Without ``covering`` the upper bounds are infinite.
    """
    methods = tuple(methods)
    ks = sorted(int(k) for k in ks)
    if not ks or ks[0] < 1:
        raise ValueError("k values must be positive")
    pack = packing_profile(spec, ks[-1], samples, seed) if "packing" in methods else None
    lowers, uppers, tags = [], [], []
    for k in ks:
        lo, up, tag = 0.0, math.inf, []
        if k == 1 and "oracle" in methods and spec.size <= MAX_ORACLE_SIZE:
            base = spec.base if hasattr(spec, "base") else spec
            lo = max(lo, _radius(spec) * opnorm_bruteforce(base, budget=4000, seed=seed).value)
            tag.append("oracle")
        if "volume" in methods and spec.per_level:
            lo = max(lo, volume_lower_bound(spec, k))
            tag.append("volume")
        if pack is not None:
            lo = max(lo, float(pack[k - 1]))
            tag.append("packing")
        if "step3" in methods:
            s3 = _step3_bound(spec, k)
            if s3 is not None:
                lo = max(lo, s3)
                tag.append("step3")
        if "covering" in methods:
            up, hit = covering_epsilon(spec, k)
            tag.append("covering!limit" if hit else "covering")
        lowers.append(lo)
        uppers.append(up)
        tags.append(tuple(tag))
    return EntropyBoundSeries.from_bounds(spec, ks, lowers, uppers, tags)
