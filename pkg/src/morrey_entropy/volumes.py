"""Volumes of l_p balls in R^D and the volumetric entropy lower bound."""

from __future__ import annotations

import math

from scipy.special import gammaln


def log_ball_volume_lp(D: int, p, r: float = 1.0) -> float:
    """Natural log of the Lebesgue volume of ``{x in R^D : ||x||_p <= r}``."""
    if D < 1:
        raise ValueError("dimension must be positive")
    if not r > 0:
        raise ValueError("radius must be positive")
    if p == math.inf:
        return D * math.log(2.0 * r)
    pf = float(p)
    if not pf > 0:
        raise ValueError("p must be positive")
    return D * math.log(2.0 * r) + D * float(gammaln(1.0 + 1.0 / pf)) - float(gammaln(1.0 + D / pf))


def ball_volume_lp(D: int, p, r: float = 1.0) -> float:
    """``(2r)**D * Gamma(1+1/p)**D / Gamma(1+D/p)``; ``(2r)**D`` for ``p = inf``."""
    return math.exp(log_ball_volume_lp(D, p, r))


def volumetric_bound(D: int, k: int, inner: tuple, outer: tuple) -> float:
    """Lower bound on ``e_k`` from comparing volumes.

    ``inner = (p1, r1)`` is an l_p ball contained in the source unit ball,
    ``outer = (p2, r2)`` an l_p ball containing the target unit ball.  If
    ``2**(k-1)`` target balls of radius ``eps`` cover the source ball then
    ``2**(k-1) * eps**D * vol(outer) >= vol(inner)``.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    log_ratio = log_ball_volume_lp(D, *inner) - log_ball_volume_lp(D, *outer)
    return 2.0 ** (-(k - 1) / D) * math.exp(log_ratio / D)
