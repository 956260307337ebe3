"""Compactness and entropy-decay regimes of Besov-Morrey sequence embeddings.

With ``delta = (sigma1 - sigma2)/d`` the embedding
``n~^{sigma1}_{u1,p1,q1} -> n~^{sigma2}_{u2,p2,q2}`` is compact iff
``delta > max(0, t1, t2)`` where ``t1 = 1/u1 - 1/u2`` and
``t2 = (p1/u1)(1/p1 - 1/p2)``.  When ``t2`` is the strict maximum (which
happens iff ``p1 < p2`` and ``p2/u2 > p1/u1``) and ``delta`` does not
exceed ``1/p1 - 1/p2`` the entropy numbers decay at the slower rate
``alpha``.  The ``q`` indices are stored but never used.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from ._numbers import Number, as_rational, recip

REL_TOL = 1e-12


@dataclass(frozen=True)
class ParamTuple:
    """Indices of a source/target pair; numbers are stored as exact rationals."""

    d: int
    sigma1: Fraction
    u1: Fraction
    p1: Fraction
    sigma2: Fraction
    u2: Fraction
    p2: Fraction
    q1: Fraction | float = math.inf
    q2: Fraction | float = math.inf

    def __post_init__(self):
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        for name in ("sigma1", "sigma2", "u1", "p1", "u2", "p2"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        for name in ("q1", "q2"):
            object.__setattr__(self, name, as_rational(getattr(self, name), allow_inf=True))
        for i in (1, 2):
            u, p, q = (getattr(self, f"{c}{i}") for c in "upq")
            if not 0 < p <= u:
                raise ValueError(f"need 0 < p{i} <= u{i} < inf, got p{i}={p}, u{i}={u}")
            if not q > 0:
                raise ValueError(f"q{i} must be positive")

    @classmethod
    def from_delta(cls, d: int, delta: Number, u1, p1, u2, p2, q1=math.inf, q2=math.inf) -> "ParamTuple":
        """Tuple with ``sigma2 = 0`` and ``sigma1 = d * delta``."""
        return cls(d, as_rational(delta) * int(d), u1, p1, 0, u2, p2, q1, q2)

    @property
    def delta(self) -> Fraction:
        return (self.sigma1 - self.sigma2) / self.d

    def thresholds(self) -> dict[str, Fraction]:
        """The three terms whose maximum ``delta`` must exceed."""
        return {
            "zero": Fraction(0),
            "t_u": recip(self.u1) - recip(self.u2),
            "t_p": (self.p1 / self.u1) * (recip(self.p1) - recip(self.p2)),
        }

    def as_dict(self) -> dict[str, str]:
        from ._numbers import fmt
        return {f: fmt(getattr(self, f)) for f in
                ("d", "sigma1", "u1", "p1", "q1", "sigma2", "u2", "p2", "q2")}


class RegimeKind(str, enum.Enum):
    NOT_COMPACT = "NotCompact"
    CLASSICAL = "Classical"
    ALPHA_GAP = "AlphaGap"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    exponent: Fraction
    gap: str | None = None

    def __post_init__(self):
        if self.kind is not RegimeKind.NOT_COMPACT and not self.exponent > 0:
            raise ValueError("a compact regime needs a positive exponent")


def _gt(a: Fraction, b: Fraction) -> bool:
    """``a > b`` beyond a relative tolerance (exact for rationals far apart)."""
    return a > b and not _eq(a, b)


def _eq(a: Fraction, b: Fraction) -> bool:
    if a == b:
        return True
    scale = max(abs(float(a)), abs(float(b)))
    return abs(float(a) - float(b)) <= REL_TOL * scale


def two_sided_condition(t: ParamTuple) -> bool:
    """``(p1/u1)(1/p1-1/p2) > max(0, 1/u1-1/u2)``, i.e. ``p1 < p2`` and ``p2/u2 > p1/u1``."""
    th = t.thresholds()
    return _gt(th["t_p"], max(th["zero"], th["t_u"]))


def is_compact(t: ParamTuple) -> bool:
    return _gt(t.delta, max(t.thresholds().values()))


def classify(t: ParamTuple) -> Regime:
    delta = t.delta
    if not is_compact(t):
        return Regime(RegimeKind.NOT_COMPACT, Fraction(0))
    if not two_sided_condition(t):
        return Regime(RegimeKind.CLASSICAL, delta)
    b = recip(t.p1) - recip(t.p2)
    if _eq(delta, b):
        return Regime(RegimeKind.BOUNDARY, delta,
                      "two-sided bounds k^-delta below and k^-(delta-eps) above for every eps > 0")
    if delta > b:
        return Regime(RegimeKind.CLASSICAL, delta)
    t_p = t.thresholds()["t_p"]
    alpha = t.u1 / (t.u1 - t.p1) * (delta - t_p)
    return Regime(RegimeKind.ALPHA_GAP, alpha,
                  "alpha is a proven lower-bound exponent; the upper bound decays like k^-(alpha-eps)")


def classify_function_space(d: int, s1, u1, p1, s2, u2, p2, q1=math.inf, q2=math.inf) -> Regime:
    """Regime of ``N^{s1}_{u1,p1,q1} -> N^{s2}_{u2,p2,q2}`` via ``sigma_i = s_i + d/2``."""
    half = Fraction(int(d), 2)
    return classify(ParamTuple(d, as_rational(s1) + half, u1, p1,
                               as_rational(s2) + half, u2, p2, q1, q2))


def classify_into_lr(d: int, s, u, p, r, q=math.inf) -> Regime:
    """Regime of ``N^s_{u,p,q} -> L_r`` (target indices ``u2 = p2 = r``, smoothness 0).

    ``r = inf`` is accepted; all formulas only use ``1/r``.
    """
    r = as_rational(r, allow_inf=True)
    if r == math.inf:
        return _classify_inf_target(d, as_rational(s), as_rational(u), as_rational(p))
    return classify_function_space(d, s, u, p, 0, r, r, q, math.inf)


def _classify_inf_target(d: int, s: Fraction, u: Fraction, p: Fraction) -> Regime:
    # with 1/u2 = 1/p2 = 0 both thresholds equal 1/u, so the two-sided
    # condition never holds and compactness reduces to s > d/u
    delta = s / d
    if not _gt(delta, recip(u)):
        return Regime(RegimeKind.NOT_COMPACT, Fraction(0))
    return Regime(RegimeKind.CLASSICAL, delta)


def linfty_compact(d: int, s, u) -> bool:
    """``N^s_{u,p,q}`` embeds compactly into ``L_inf`` / ``C`` iff ``s > d/u``."""
    return _gt(as_rational(s), Fraction(int(d)) / as_rational(u))
