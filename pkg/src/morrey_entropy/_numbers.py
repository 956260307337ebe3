"""Exact-rational parameter handling shared by every module."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Union

Number = Union[int, float, str, Fraction]
Exponent = Union[Fraction, float]

_INF_STRINGS = {"inf", "+inf", "infinity", "+infinity", "∞"}


def as_rational(x: Number, *, allow_inf: bool = False) -> Fraction | float:
    """Convert ``x`` to a :class:`~fractions.Fraction`.

    Strings may be decimals (``"0.25"``) or ratios (``"3/4"``).  Floats are
    read through their shortest repr, so ``0.1`` becomes ``1/10`` rather
    than the binary expansion.  ``math.inf`` (or ``"inf"``) is returned
    unchanged when ``allow_inf`` is set.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not numeric parameters")
    if isinstance(x, str):
        s = x.strip()
        if s.lower() in _INF_STRINGS:
            if not allow_inf:
                raise ValueError("infinite value not allowed here")
            return math.inf
        return Fraction(s)
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, float):
        if math.isinf(x) and x > 0:
            if not allow_inf:
                raise ValueError("infinite value not allowed here")
            return math.inf
        if not math.isfinite(x):
            raise ValueError(f"non-finite parameter {x!r}")
        return Fraction(repr(x))
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def recip(x: Fraction | float) -> Fraction:
    """``1/x`` with ``1/inf = 0``."""
    if x == math.inf:
        return Fraction(0)
    return 1 / Fraction(x)


def pow2(x: Exponent) -> float:
    """``2**x`` with the integer part of a rational exponent applied exactly."""
    if isinstance(x, Fraction):
        n, r = divmod(x.numerator, x.denominator)
        return math.ldexp(2.0 ** (r / x.denominator), n)
    return 2.0**x


def floor_pow2(x: Exponent) -> int:
    """``floor(2**x)`` for ``x >= 0``, exact when ``x`` is a small-denominator rational."""
    if x < 0:
        raise ValueError("exponent must be nonnegative")
    guess = math.floor(pow2(x))
    if not isinstance(x, Fraction) or x.denominator > 256 or x.numerator > 4096:
        return guess
    a, b = x.numerator, x.denominator
    target = 1 << a
    # floor(2**(a/b)) is the largest n with n**b <= 2**a
    n = max(guess - 1, 1)
    while n**b > target:
        n -= 1
    while (n + 1) ** b <= target:
        n += 1
    return n


def fmt(x: Fraction | float) -> str:
    """Human/JSON friendly rendering of a parameter."""
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if x == math.inf:
        return "inf"
    return repr(x)
