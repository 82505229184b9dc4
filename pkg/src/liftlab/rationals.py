"""Exact rational values and the truncated unit-interval operations.

All quantities in this package are fractions.Fraction instances kept in
lowest terms (Fraction normalises on construction).  The wire format for a
rational is the string "p/q", or just "p" for integers.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from .errors import ValidationError

ZERO = Fraction(0)
ONE = Fraction(1)

RationalLike = Union[Fraction, int, str]


def parse_rational(value: RationalLike) -> Fraction:
    """Parse "p/q" / "p" strings (or ints) into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {value!r}") from exc
    raise ValidationError(f"not a rational: {value!r}")


def format_rational(q: Fraction) -> str:
    """Render a Fraction as "p/q", or "p" when the denominator is 1."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def decimal_string(value, digits: int = 12) -> str:
    """Fixed-precision decimal rendering used for display next to exact values."""
    from mpmath import mp, mpf, nstr

    with mp.workdps(max(digits + 5, 20)):
        if isinstance(value, Fraction):
            approx = mpf(value.numerator) / mpf(value.denominator)
        else:
            approx = mpf(value)
        return nstr(approx, digits)


def check_unit(q: Fraction, what: str) -> Fraction:
    if not (ZERO <= q <= ONE):
        raise ValidationError(f"{what} must lie in [0, 1], got {format_rational(q)}")
    return q


def oplus(a: Fraction, b: Fraction) -> Fraction:
    """Truncated addition on [0, 1]: min(1, a + b)."""
    return min(ONE, a + b)


def ominus(a: Fraction, b: Fraction) -> Fraction:
    """Truncated subtraction on [0, 1]: max(0, a - b)."""
    return max(ZERO, a - b)
