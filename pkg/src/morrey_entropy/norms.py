"""Quasi-norms on the dyadic coefficient lattice.

Three families are supported, each described by a small frozen parameter
object that knows how to evaluate itself on a batch of flattened
coefficient arrays:

* :class:`LpParams` -- the plain ``l_p`` norm (``p = inf`` allowed),
* :class:`MorreyLevelParams` -- the per-level Morrey norm ``m_{u,p}``,
* :class:`SeqSpaceParams` -- the multi-level Besov-Morrey norm ``n~^sigma_{u,p,q}``.

Exponents are kept as :class:`~fractions.Fraction` so that weights such as
``2**(3/4)`` are formed from exact exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._numbers import Number, as_rational, pow2, recip
from .dyadic import LevelSequence, MultiLevelSequence, block_sums


def _positive(x: Number, name: str, allow_inf: bool = False):
    v = as_rational(x, allow_inf=allow_inf)
    if not v > 0:
        raise ValueError(f"{name} must be positive, got {x!r}")
    return v


@dataclass(frozen=True)
class LpParams:
    """``l_p`` on the level lattice; ``p`` may be infinite."""

    p: Fraction | float

    def __post_init__(self):
        object.__setattr__(self, "p", _positive(self.p, "p", allow_inf=True))

    @property
    def r(self) -> Fraction:
        return rnorm_exponent(self)

    def batch_norm(self, values: np.ndarray, dim: int, level: int) -> np.ndarray:
        return lp_norms(values, self.p)


@dataclass(frozen=True)
class MorreyLevelParams:
    """Indices of ``m^{2^{jd}}_{u,p}``; requires ``0 < p <= u < inf``."""

    u: Fraction
    p: Fraction

    def __post_init__(self):
        u = _positive(self.u, "u")
        p = _positive(self.p, "p")
        if p > u:
            raise ValueError(f"need p <= u, got p={p}, u={u}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "p", p)

    @property
    def r(self) -> Fraction:
        return min(Fraction(1), self.p)

    def batch_norm(self, values: np.ndarray, dim: int, level: int) -> np.ndarray:
        return morrey_norms(values, dim, level, self)


@dataclass(frozen=True)
class SeqSpaceParams:
    """Indices of ``n~^sigma_{u,p,q}(Q)``; ``q`` may be infinite."""

    sigma: Fraction
    u: Fraction
    p: Fraction
    q: Fraction | float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "sigma", as_rational(self.sigma))
        level = MorreyLevelParams(self.u, self.p)
        object.__setattr__(self, "u", level.u)
        object.__setattr__(self, "p", level.p)
        object.__setattr__(self, "q", _positive(self.q, "q", allow_inf=True))

    @property
    def level_params(self) -> MorreyLevelParams:
        return MorreyLevelParams(self.u, self.p)

    @property
    def r(self) -> Fraction:
        return rnorm_exponent(self)

    def batch_norm(self, values: np.ndarray, dim: int, level: int) -> np.ndarray:
        return seq_space_norms(values, dim, level, self)


def _pow2_scaled(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``|values|`` divided row-wise by a power of two near its maximum.

    The division is exact, and keeps ``|x|**p`` clear of underflow and
    overflow before the outer ``1/p`` power is taken.
    """
    a = np.abs(np.asarray(values, dtype=float))
    top = a.max(axis=-1, initial=0.0)
    _, e = np.frexp(top)
    scale = np.ldexp(1.0, e)
    return a / scale[..., None], scale


def lp_norms(values: np.ndarray, p) -> np.ndarray:
    """Row-wise ``l_p`` (quasi-)norms of ``values`` along the last axis."""
    if not isinstance(p, (Fraction, float)):
        p = as_rational(p, allow_inf=True)
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    if p == math.inf:
        return np.abs(np.asarray(values, dtype=float)).max(axis=-1, initial=0.0)
    a, scale = _pow2_scaled(values)
    pf = float(p)
    return scale * (a**pf).sum(axis=-1) ** (1.0 / pf)


def lp_norm(v, p) -> float:
    """``(sum |v_i|**p)**(1/p)``, or ``max |v_i|`` for ``p = inf``."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("entries must be finite")
    return float(lp_norms(v.ravel(), p))


def morrey_norms(values: np.ndarray, dim: int, level: int, mp: MorreyLevelParams) -> np.ndarray:
    """Batched ``m^{2^{jd}}_{u,p}`` norms of level arrays of shape ``(..., 2**(level*dim))``.

    The supremum runs over every cube ``Q_{nu,k}`` of the unit cube with
    ``0 <= nu <= level``; for each coarse level only the largest partial
    sum matters since the weight depends on ``nu`` alone.
    """
    pf = float(mp.p)
    a, scale = _pow2_scaled(values)
    sums = block_sums(a**pf, dim, level)
    slope = dim * (recip(mp.u) - recip(mp.p))
    best = None
    for nu, s in enumerate(sums):
        term = pow2((level - nu) * slope) * s.max(axis=-1) ** (1.0 / pf)
        best = term if best is None else np.maximum(best, term)
    return scale * best


def morrey_level_norm(seq: LevelSequence, mp: MorreyLevelParams) -> float:
    """``||lambda | m^{2^{jd}}_{u,p}||`` of a single level."""
    return float(morrey_norms(seq.coeffs, seq.dim, seq.level, mp))


def _level_slices(dim: int, max_level: int):
    start = 0
    for j in range(max_level + 1):
        n = 1 << (j * dim)
        yield j, slice(start, start + n)
        start += n


def seq_space_norms(values: np.ndarray, dim: int, max_level: int, sp: SeqSpaceParams) -> np.ndarray:
    """Batched ``n~^sigma_{u,p,q}`` norms of flattened multi-level arrays."""
    values = np.asarray(values, dtype=float)
    mp = sp.level_params
    weighted = []
    for j, sl in _level_slices(dim, max_level):
        w = pow2(j * (sp.sigma - dim * recip(sp.u)))
        weighted.append(w * morrey_norms(values[..., sl], dim, j, mp))
    weighted = np.stack(weighted, axis=-1)
    return lp_norms(weighted, sp.q)


def seq_space_norm(seq: MultiLevelSequence, sp: SeqSpaceParams) -> float:
    """``||lambda | n~^sigma_{u,p,q}(Q)||`` truncated to levels ``0..J``."""
    return float(seq_space_norms(seq.flat(), seq.dim, seq.max_level, sp))


def rnorm_exponent(sp) -> Fraction:
    """Exponent ``r = min(1, p, q)`` of the r-triangle inequality.

    Accepts any of the parameter objects; ``q`` is taken as infinite when
    absent.
    """
    p = sp.p
    q = getattr(sp, "q", math.inf)
    r = Fraction(1)
    for x in (p, q):
        if x != math.inf and x < r:
            r = Fraction(x)
    return r


def holder_bound(values: np.ndarray, dim: int, level: int,
                 source: MorreyLevelParams, target: MorreyLevelParams) -> np.ndarray:
    """Right-hand side of the Hoelder-type estimate for ``m_{u2,p2}``.

    ``2**(jd(1/u2 - p1/(p2 u1))) * ||.|l_inf||**(1-p1/p2) * ||.|m_{u1,p1}||**(p1/p2)``,
    valid when ``p1 < p2`` and ``p2/u2 > p1/u1``.
    """
    theta = source.p / target.p
    scale = pow2(level * dim * (recip(target.u) - source.p / (target.p * source.u)))
    sup = lp_norms(values, math.inf)
    m1 = morrey_norms(values, dim, level, source)
    return scale * sup ** float(1 - theta) * m1 ** float(theta)


def morrey_star_norms(values: np.ndarray, dim: int, level: int,
                      source: MorreyLevelParams, target: MorreyLevelParams) -> np.ndarray:
    """``m*_{u2,p2}``: the target norm divided by ``2**(jd(1/u2 - p1/(p2 u1)))``.

    With this normalisation the Hoelder-type estimate reads
    ``||.|m*|| <= ||.|l_inf||**(1-theta) * ||.|m_{u1,p1}||**theta``,
    ``theta = p1/p2``, which is the hypothesis of the interpolation
    inequality for entropy numbers.
    """
    scale = pow2(level * dim * (recip(target.u) - source.p / (target.p * source.u)))
    return morrey_norms(values, dim, level, target) / scale
