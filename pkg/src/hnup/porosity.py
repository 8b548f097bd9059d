"""Empty-ball probes for porosity in the plane.

A set E is porous with constant c when every ball B(a, r) centred on E
contains a ball B(b, c r) missing E.  Numerically we can only witness: the
probe searches a float grid for a large empty ball, then verifies the best
candidate exactly with rational arithmetic.  Shapes therefore expose a
vectorized float ``distance`` and an exact ``clear_of`` check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from .arith import as_fraction
from .cantor import as_approx
from .errors import EnumerationBudget
from .perfectness import Point, as_point

DEFAULT_CIRCLE_POINTS = 1000


def _dist_sq(p: Point, q: Point) -> Fraction:
    return (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2


def _seg_dist_sq(b: Point, x0: Fraction, x1: Fraction) -> Fraction:
    """Squared distance from b to the real segment [x0, x1]."""
    nx = min(max(b[0], x0), x1)
    return (b[0] - nx) ** 2 + b[1] ** 2


def _outside_circle_band(b: Point, radius: Fraction, rho: Fraction, center=(0, 0)) -> bool:
    """dist(b, circle) >= rho, exactly."""
    d2 = _dist_sq(b, center)
    if d2 >= (radius + rho) ** 2:
        return True
    return rho <= radius and d2 <= (radius - rho) ** 2


@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of closed real intervals, embedded in the plane."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        ivs = tuple(sorted((as_fraction(a), as_fraction(b)) for a, b in self.intervals))
        if any(a > b for a, b in ivs):
            raise ValueError("interval with left end above right end")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def from_approx(cls, params, k: int) -> "IntervalUnion":
        approx = as_approx(params)
        A = approx.A(k)
        return cls(tuple((x, x + A) for x in approx.lefts(k)))

    def distance(self, xy: np.ndarray) -> np.ndarray:
        lo = np.array([float(a) for a, _ in self.intervals])
        hi = np.array([float(b) for _, b in self.intervals])
        x, y = xy[:, 0], xy[:, 1]
        i = np.clip(np.searchsorted(lo, x, "right") - 1, 0, len(lo) - 1)
        j = np.clip(i + 1, 0, len(lo) - 1)
        dx_i = np.maximum(0, np.maximum(lo[i] - x, x - hi[i]))
        dx_j = np.maximum(0, np.maximum(lo[j] - x, x - hi[j]))
        return np.hypot(np.minimum(dx_i, dx_j), y)

    def clear_of(self, b: Point, rho: Fraction) -> bool:
        r2 = rho * rho
        return all(_seg_dist_sq(b, a, c) >= r2 for a, c in self.intervals)


def Segment(x0=0, x1=1) -> IntervalUnion:
    return IntervalUnion(((as_fraction(x0), as_fraction(x1)),))


@dataclass(frozen=True)
class FilledDisk:
    center: Point
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "radius", as_fraction(self.radius))

    def distance(self, xy: np.ndarray) -> np.ndarray:
        c = np.array([float(self.center[0]), float(self.center[1])])
        return np.maximum(0.0, np.hypot(*(xy - c).T) - float(self.radius))

    def clear_of(self, b: Point, rho: Fraction) -> bool:
        return _dist_sq(b, self.center) >= (self.radius + rho) ** 2


@dataclass(frozen=True)
class CircleFamily:
    """Circles |z| = 1/n for n = 1..n_max plus the origin.

    With ``core`` (the default) the disk |z| <= 1/n_max stands in for the
    untruncated tail of circles.  The stand-in contains the tail, so every
    ball it certifies empty is also empty for the infinite family.
    """

    n_max: int
    core: bool = True

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def radii(self) -> list[Fraction]:
        return [Fraction(1, n) for n in range(1, self.n_max + 1)]

    def distance(self, xy: np.ndarray) -> np.ndarray:
        rad = np.hypot(xy[:, 0], xy[:, 1])
        inv = 1.0 / np.arange(1, self.n_max + 1)
        d = np.abs(rad[:, None] - inv[None, :]).min(axis=1)
        if self.core:
            return np.minimum(d, np.maximum(0.0, rad - inv[-1]))
        return np.minimum(d, rad)

    def clear_of(self, b: Point, rho: Fraction) -> bool:
        if self.core:
            if _dist_sq(b, (0, 0)) < (Fraction(1, self.n_max) + rho) ** 2:
                return False
        elif _dist_sq(b, (0, 0)) < rho * rho:
            return False
        return all(_outside_circle_band(b, r, rho) for r in self.radii)


@dataclass(frozen=True)
class DiscreteCircleFamily:
    """Each circle |z| = 1/n replaced by ``points_per_circle`` equally spaced
    points (float-rounded, then held as exact rationals), plus the origin.

    ``core`` adds the disk |z| <= 1/n_max as a stand-in for the tail.
    """

    n_max: int
    points_per_circle: int = DEFAULT_CIRCLE_POINTS
    core: bool = True
    _pts: np.ndarray = field(init=False, repr=False, compare=False)
    _tree: cKDTree = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_max < 1 or self.points_per_circle < 3:
            raise ValueError("need n_max >= 1 and at least 3 points per circle")
        theta = 2 * np.pi * np.arange(self.points_per_circle) / self.points_per_circle
        ring = np.column_stack([np.cos(theta), np.sin(theta)])
        pts = np.vstack([ring / n for n in range(1, self.n_max + 1)] + [np.zeros((1, 2))])
        object.__setattr__(self, "_pts", pts)
        object.__setattr__(self, "_tree", cKDTree(pts))

    @property
    def point_count(self) -> int:
        return len(self._pts)

    def distance(self, xy: np.ndarray) -> np.ndarray:
        d, _ = self._tree.query(xy)
        if self.core:
            d = np.minimum(d, np.maximum(0.0, np.hypot(xy[:, 0], xy[:, 1]) - 1.0 / self.n_max))
        return d

    def clear_of(self, b: Point, rho: Fraction) -> bool:
        if self.core and _dist_sq(b, (0, 0)) < (Fraction(1, self.n_max) + rho) ** 2:
            return False
        # exact check on every point the float query puts anywhere near
        near = self._tree.query_ball_point([float(b[0]), float(b[1])], float(rho) * 1.001 + 1e-12)
        r2 = rho * rho
        for i in near:
            p = (Fraction(self._pts[i, 0]), Fraction(self._pts[i, 1]))
            if _dist_sq(b, p) < r2:
                return False
        return True


@dataclass(frozen=True)
class PorosityProbe:
    a: Point
    r: Fraction
    b: Point | None
    radius: Fraction
    slack: float

    @property
    def ratio(self) -> Fraction:
        return self.radius / self.r


def _best_on_grid(shape, a, r, cx, cy, half, g):
    xs = np.linspace(cx - half, cx + half, g)
    ys = np.linspace(cy - half, cy + half, g)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    xy = np.column_stack([X.ravel(), Y.ravel()])
    room = r - np.hypot(xy[:, 0] - a[0], xy[:, 1] - a[1])
    val = np.minimum(shape.distance(xy), room)
    order = np.lexsort((xy[:, 1], xy[:, 0], -val))  # largest radius, then lexicographic
    return xy[order], val[order]


def _certify(shape, a: Point, r: Fraction, x: float, y: float, value: float):
    """Largest rational radius near ``value`` that verifies exactly, or None."""
    if value <= 0:
        return None
    b = (Fraction(x).limit_denominator(2**40), Fraction(y).limit_denominator(2**40))
    rho = Fraction(value * (1 - 1e-9)).limit_denominator(2**50)
    for _ in range(8):
        inside = rho <= r and _dist_sq(b, a) <= (r - rho) ** 2
        if rho > 0 and inside and shape.clear_of(b, rho):
            return b, rho
        rho *= Fraction(1) - Fraction(1, 10**6)
        rho = rho.limit_denominator(2**50)
    return None


def empty_ball_search(shape, a, r, grid: int = 65, rounds: int = 4,
                      max_points: int = 2**22) -> PorosityProbe:
    """Largest exactly verified empty ball B(b, rho) inside B(a, r).

    A uniform grid over the bounding square seeds the search, followed by
    ``rounds`` local refinements around the best centre.  The returned
    ratio rho / r is a lower bound; the coarse grid alone guarantees it is
    within ``slack`` = sqrt(2)/(grid - 1) of the true optimum.
    """
    if grid < 8:
        raise ValueError("grid resolution must be at least 8")
    if grid * grid > max_points:
        raise EnumerationBudget(f"grid of {grid}x{grid} exceeds {max_points} probes")
    a = as_point(a)
    r = as_fraction(r)
    if r <= 0:
        raise ValueError("probe radius must be positive")
    af = (float(a[0]), float(a[1]))
    rf = float(r)
    xy, val = _best_on_grid(shape, af, rf, af[0], af[1], rf, grid)
    cx, cy = xy[0]
    best = val[0]
    h = 2 * rf / (grid - 1)
    for _ in range(rounds):
        xy2, val2 = _best_on_grid(shape, af, rf, cx, cy, h, grid)
        if val2[0] > best:
            cx, cy = xy2[0]
            best = val2[0]
        h = 2 * h / (grid - 1)
    slack = math.sqrt(2) / (grid - 1)
    found = _certify(shape, a, r, cx, cy, best)
    if found is None:
        # fall back to the coarse candidates, best first
        for (x, y), v in zip(xy[:64], val[:64]):
            found = _certify(shape, a, r, x, y, v)
            if found:
                break
    if found is None:
        return PorosityProbe(a, r, None, Fraction(0), slack)
    b, rho = found
    return PorosityProbe(a, r, b, rho, slack)


def circle_family_ratio(n: int) -> Fraction:
    """Largest empty-ball ratio inside B(0, 1/n) for the circles C(0, 1/j):
    the ball between radii 1/(n+1) and 1/n, giving 1/(2(n+1))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Fraction(1, 2 * (n + 1))


def line_porosity_constant() -> Fraction:
    """Porosity constant of any subset of the real line viewed in the plane:
    B(x, r) contains B(x + i r/2, r/2), which misses the line."""
    return Fraction(1, 2)
