"""Exact-rational helpers and the 128-bit log layer.

Lengths in the constructions shrink like 4**-465 within a few dozen
levels, so every log is taken of an exact rational at 128 bits and the
running sums are kept at that precision.  Accumulating k terms at 128
bits loses at most ~k * 2**-128 relative, far below what a compensated
double sum would give.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from mpmath import MPContext

LOG_PREC = 128

# private context so callers' mpmath.mp settings are never touched
ctx = MPContext()
ctx.prec = LOG_PREC

# coherence tolerance between the log-space and exact representations
LOG_REL_TOL = 1e-12


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, float):
        raise TypeError("floats are not accepted where an exact rational is required")
    return Fraction(x)


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` (or a bare integer) into a Fraction; decimals are refused."""
    s = text.strip()
    if "." in s or "e" in s.lower():
        raise ValueError(f"expected an exact rational 'p/q', got {text!r}")
    if "/" in s:
        p, q = s.split("/", 1)
        return Fraction(int(p), int(q))
    return Fraction(int(s))


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def bit_size(q: Fraction) -> int:
    return q.numerator.bit_length() + q.denominator.bit_length()


@lru_cache(maxsize=65536)
def log_q(q: Fraction):
    """Natural log of a positive rational as a 128-bit mpf."""
    if q <= 0:
        raise ValueError("log of a non-positive rational")
    return ctx.log(ctx.fdiv(q.numerator, q.denominator))


def log_int(n: int):
    return ctx.log(ctx.mpf(n))


def fsum(values) -> float:
    return math.fsum(values)
