"""Hausdorff-dimension estimates for the Cantor-like sets, plus box counting.

For equally spaced constructions the dimension is

    dim_H I = liminf_k  k log m / (-log A_k),

so the estimator records s_k = k log m / (-log A_k) for every k <= K and
reports the minimum over a final tail window as the liminf estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arith import as_fraction, ctx, log_int, log_q
from .cantor import (CONSTANT, GEOMETRIC_POWER, RANDOM, SPARSE_POWER, CantorApprox,
                     RatioSpec, as_approx, random_numerators)
from .errors import EnumerationBudget, Unsupported

# Fraction of the samples (the deepest ones) scanned for the tail minimum.
DEFAULT_WINDOW = Fraction(1, 4)


@dataclass(frozen=True)
class ClosedForm:
    expression: str
    value: float
    label: str


@dataclass(frozen=True)
class DimEstimate:
    samples: tuple[tuple[int, float], ...]
    liminf_estimate: float
    window: tuple[int, int]
    closed_form: ClosedForm | None
    mode: str  # "log-space" or "monte-carlo"

    def at(self, k: int) -> float:
        return self.samples[k - 1][1]


def closed_form_dim(spec: RatioSpec) -> ClosedForm:
    m = spec.m
    if spec.variant in (CONSTANT, SPARSE_POWER):
        a = spec.a
        value = float(log_int(m) / -log_q(a))
        return ClosedForm(f"log({m})/log({a.denominator}/{a.numerator})", value,
                          "log m / (-log a)")
    if spec.variant == GEOMETRIC_POWER:
        return ClosedForm("0", 0.0, "zero-dimensional (a_k = a^k)")
    if spec.variant == RANDOM:
        value = float(log_int(m) / (log_int(m + 1) + 1))
        return ClosedForm(f"log({m})/(log({m + 1}) + 1)", value,
                          "almost-sure limit for i.i.d. uniform ratios")
    raise Unsupported(f"no closed form for {spec.variant} specs")


def random_log_ratios(spec: RatioSpec, K: int) -> np.ndarray:
    """log a_1 .. log a_K of a random spec in double precision (Monte Carlo path)."""
    u = random_numerators(spec, 1, K).astype(np.float64)
    return np.log(u) - spec.precision_bits * math.log(2.0)


def _tail_window(K: int, window) -> tuple[int, int]:
    w = Fraction(window)
    if not 0 < w <= 1:
        raise ValueError("window must be a fraction in (0, 1]")
    start = K - math.floor(w * K)
    return max(start, 1), K


def dim_estimate_seq(params, K: int, window=DEFAULT_WINDOW) -> DimEstimate:
    if K < 1:
        raise ValueError("K must be >= 1")
    spec = params.spec if isinstance(params, CantorApprox) else params
    log_m = log_int(spec.m)
    if spec.variant == RANDOM:
        logs = np.cumsum(random_log_ratios(spec, K))
        ks = np.arange(1, K + 1)
        s = ks * float(log_m) / -logs
        samples = tuple((int(k), float(v)) for k, v in zip(ks, s))
        mode = "monte-carlo"
    else:
        approx = as_approx(params)
        samples = tuple((k, float(k * log_m / -approx.log_A(k))) for k in range(1, K + 1))
        mode = "log-space"
    lo, hi = _tail_window(K, window)
    tail = min(v for k, v in samples[lo - 1:hi])
    try:
        cf = closed_form_dim(spec)
    except Unsupported:
        cf = None
    return DimEstimate(samples, tail, (lo, hi), cf, mode)


def sparse_power_logA_bounds(a, m: int, k: int):
    """Strict brackets (lower, upper) on log A_k for the sparse-power sequence.

    With L = log2(k):
        lower = (k - L + 1 + L(L+1)/2) log a
        upper = (k - L + (L-1)L/2) log a
    Both are 128-bit mpf values.
    """
    if k < 2:
        raise ValueError("bounds need k >= 2")
    a = as_fraction(a)
    L = ctx.log(k) / ctx.log(2)
    la = log_q(a)
    lower = (k - L + 1 + L * (L + 1) / 2) * la
    upper = (k - L + (L - 1) * L / 2) * la
    return lower, upper


# ---------------------------------------------------------------- box counting

@dataclass(frozen=True)
class BoxCount:
    scale: Fraction
    count: int
    slope_estimate: float | None = None


def _cell_range(lo: Fraction, hi: Fraction, delta: Fraction) -> tuple[int, int]:
    """Grid cells [i*delta, (i+1)*delta) meeting [lo, hi] in positive length
    (a single cell for a degenerate segment)."""
    first = math.floor(lo / delta)
    if hi == lo:
        return first, first
    return first, math.ceil(hi / delta) - 1


def _count_1d(intervals, delta: Fraction) -> int:
    total = 0
    cur_lo = cur_hi = None
    for lo, hi in sorted(intervals):
        a, b = _cell_range(lo, hi, delta)
        if cur_hi is None or a > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo + 1
            cur_lo, cur_hi = a, b
        else:
            cur_hi = max(cur_hi, b)
    if cur_hi is not None:
        total += cur_hi - cur_lo + 1
    return total


def _count_2d(rects, delta: Fraction) -> int:
    rows: dict[int, list[tuple[int, int]]] = {}
    for x0, x1, y0, y1 in rects:
        cx = _cell_range(x0, x1, delta)
        cy = _cell_range(y0, y1, delta)
        for j in range(cy[0], cy[1] + 1):
            rows.setdefault(j, []).append(cx)
    total = 0
    for spans in rows.values():
        spans.sort()
        cur_lo, cur_hi = spans[0]
        for a, b in spans[1:]:
            if a > cur_hi:
                total += cur_hi - cur_lo + 1
                cur_lo, cur_hi = a, b
            else:
                cur_hi = max(cur_hi, b)
        total += cur_hi - cur_lo + 1
    return total


def box_count(shape, delta, depth: int | None = None,
              max_cells: int = 2**20) -> BoxCount:
    """Number of delta-grid boxes meeting a finite-depth approximation.

    ``shape`` is a CantorApprox (counted on the line, at ``depth``), anything
    with a ``rectangles()`` method (a PlanarSet), or an iterable of exact
    rectangles (x0, x1, y0, y1).  Boxes are counted when they meet the
    approximation in positive length/area, so a grid line touching an
    interval endpoint does not add a box.
    """
    delta = as_fraction(delta)
    if delta <= 0:
        raise ValueError("box side must be positive")
    if isinstance(shape, CantorApprox):
        if depth is None:
            raise ValueError("depth required for a CantorApprox")
        A = shape.A(depth)
        ints = ((x, x + A) for x in shape.lefts(depth))
        return BoxCount(delta, _count_1d(ints, delta))
    rects = shape.rectangles() if hasattr(shape, "rectangles") else shape
    rects = list(rects)
    if len(rects) > max_cells:
        raise EnumerationBudget(f"{len(rects)} rectangles exceed the limit {max_cells}")
    return BoxCount(delta, _count_2d(rects, delta))


def box_count_sweep(shape, deltas: Sequence, depth: int | None = None) -> list[BoxCount]:
    """Counts at each scale plus the least-squares slope of log N vs -log delta."""
    counts = [box_count(shape, d, depth) for d in deltas]
    if len(counts) >= 2:
        x = np.array([-float(log_q(c.scale)) for c in counts])
        y = np.array([math.log(c.count) for c in counts])
        slope = float(np.polyfit(x, y, 1)[0])
        counts = [BoxCount(c.scale, c.count, slope) for c in counts]
    return counts
