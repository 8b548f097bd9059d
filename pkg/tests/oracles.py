"""Slow, transparent reference computations used to cross-check the package.

Nothing here imports hnup: each routine rebuilds its answer from the gap
recursion with plain Fractions and loops.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def ratio_list(variant: str, a: Fraction, k: int) -> list[Fraction]:
    out = []
    for j in range(1, k + 1):
        if variant == "constant":
            out.append(a)
        elif variant == "sparse-power":
            n = j.bit_length() - 1 if j >= 2 and j & (j - 1) == 0 else 0
            out.append(a**n if n else a)
        elif variant == "geometric-power":
            out.append(a**j)
        else:
            raise ValueError(variant)
    return out


def intervals(ratios: list[Fraction], m: int = 2) -> list[tuple[Fraction, Fraction]]:
    """Depth-len(ratios) basic intervals as (left, length), left to right."""
    ivs = [(Fraction(0), Fraction(1))]
    for a in ratios:
        new = []
        for left, length in ivs:
            child = length * a
            gap = (length - m * child) / (m - 1)
            new.extend((left + j * (child + gap), child) for j in range(m))
        ivs = new
    return ivs


def endpoint_list(ratios, m=2) -> list[Fraction]:
    return sorted({p for left, ln in intervals(ratios, m) for p in (left, left + ln)})


def pair_product(points) -> Fraction:
    prod = Fraction(1)
    for p, q in itertools.combinations(points, 2):
        prod *= abs(p - q)
    return prod


def log_fraction(q: Fraction) -> float:
    return math.log(q.numerator) - math.log(q.denominator)


def annulus_separates_line(c: Fraction, r: Fraction, R: Fraction, ivs) -> bool:
    """Does the open annulus r < |x - c| < R, centred on the real line,
    separate the union of the given intervals?"""
    inside = outside = False
    for left, ln in ivs:
        lo, hi = left - c, left + ln - c
        dmin = Fraction(0) if lo <= 0 <= hi else min(abs(lo), abs(hi))
        dmax = max(abs(lo), abs(hi))
        if dmin < R and dmax > r:
            return False
        inside |= dmax <= r
        outside |= dmin >= R
    return inside and outside


def best_line_ratio(c: Fraction, ivs) -> Fraction:
    """Largest R/r over separating annuli centred at c, from the gaps in the
    set of distances |x - c|, x in the union of intervals."""
    spans = []
    for left, ln in ivs:
        lo, hi = left - c, left + ln - c
        dmin = Fraction(0) if lo <= 0 <= hi else min(abs(lo), abs(hi))
        spans.append((dmin, max(abs(lo), abs(hi))))
    spans.sort()
    best = Fraction(0)
    reach = spans[0][1]
    for dmin, dmax in spans[1:]:
        if dmin > reach and reach > 0:
            best = max(best, dmin / reach)
        reach = max(reach, dmax)
    return best


def mu_from_indices(i: int, j: int, k: int, m: int = 2) -> int:
    """Shared address length of depth-k intervals i and j."""
    shared = 0
    for level in range(k - 1, -1, -1):
        if i // m**level != j // m**level:
            break
        shared += 1
    return shared


def geometric_series_partials(a: Fraction, terms: int, m: int = 2) -> list[float]:
    """Partial sums of sum_l m^-(l+1) log(B A_l), B = 1 - m a."""
    B = 1 - m * a
    total, out = 0.0, []
    for l in range(terms):
        A = a ** (l * (l + 1) // 2)
        total += log_fraction(B * A) / m ** (l + 1)
        out.append(total)
    return out
