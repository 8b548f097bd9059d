"""Separating annuli, HNUP witnesses and the uniform-perfectness bound.

All geometry is exact: an annulus stores its centre and the *squares* of
its radii as rationals, so inner radii such as sqrt(2) * r_k stay exact.

Separation of a finite-depth approximation is decided by a pruned descent
through the cells (intervals, or squares for products).  A cell wholly in
the closed inner disk or wholly outside the open outer disk is never
refined; only cells straddling the annulus are.  Cell corners are points
of the limit set, which makes positive verdicts transfer from I_k to I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import as_fraction, log_q
from .cantor import CONSTANT, Address, CantorApprox, as_approx
from .errors import Degenerate, EnumerationBudget, WitnessNotFound

Point = tuple[Fraction, Fraction]
Rect = tuple[Fraction, Fraction, Fraction, Fraction]  # x0, x1, y0, y1

DEFAULT_MAX_NODES = 2**20


def as_point(p) -> Point:
    if isinstance(p, tuple):
        return as_fraction(p[0]), as_fraction(p[1])
    return as_fraction(p), Fraction(0)


@dataclass(frozen=True)
class Annulus:
    """Open annulus {z : r < |z - center| < R}, radii held as r**2, R**2."""

    center: Point
    inner_sq: Fraction
    outer_sq: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not 0 < self.inner_sq < self.outer_sq:
            raise Degenerate("need 0 < r < R")

    @classmethod
    def from_radii(cls, center, r, R) -> "Annulus":
        r, R = as_fraction(r), as_fraction(R)
        return cls(as_point(center), r * r, R * R)

    @property
    def ratio_sq(self) -> Fraction:
        return self.outer_sq / self.inner_sq

    @property
    def ratio(self) -> float:
        return math.sqrt(self.ratio_sq)

    @property
    def modulus(self) -> float:
        return float(log_q(self.ratio_sq) / 2)

    @property
    def inner(self) -> float:
        return math.sqrt(self.inner_sq)

    @property
    def outer(self) -> float:
        return math.sqrt(self.outer_sq)

    def ratio_at_least(self, M) -> bool:
        M = as_fraction(M)
        return M <= 0 or self.ratio_sq >= M * M


def dist_range_sq(rect: Rect, c: Point) -> tuple[Fraction, Fraction]:
    """Squared min and max distance from c to the closed rectangle."""
    x0, x1, y0, y1 = rect
    cx, cy = c
    nx = min(max(cx, x0), x1) - cx
    ny = min(max(cy, y0), y1) - cy
    fx = max(abs(x0 - cx), abs(x1 - cx))
    fy = max(abs(y0 - cy), abs(y1 - cy))
    return nx * nx + ny * ny, fx * fx + fy * fy


def _corners(rect: Rect):
    x0, x1, y0, y1 = rect
    return ((x0, y0), (x1, y0), (x0, y1), (x1, y1))


@dataclass(frozen=True)
class SeparationVerdict:
    separates: bool
    inner_witness: Point | None
    outer_witness: Point | None
    depth_used: int
    sound: bool
    reason: str
    nodes_visited: int = 0


class CantorTree:
    """Cells of a Cantor approximation (dim=1) or of its square (dim=2),
    optionally pushed through a similarity x -> scale * x + shift."""

    def __init__(self, approx: CantorApprox, dim: int = 1,
                 scale: Fraction = Fraction(1), shift: Point = (Fraction(0), Fraction(0))):
        if dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        self.approx = approx
        self.dim = dim
        self.scale = as_fraction(scale)
        self.shift = as_point(shift)

    def root(self):
        return (Fraction(0), Fraction(0), 0)

    def depth(self, node) -> int:
        return node[2]

    def terminal(self, node) -> bool:
        return False

    def children(self, node):
        lx, ly, j = node
        s = self.approx.spacing(j + 1)
        m = self.approx.m
        if self.dim == 1:
            return [(lx + d * s, ly, j + 1) for d in range(m)]
        return [(lx + dx * s, ly + dy * s, j + 1) for dx in range(m) for dy in range(m)]

    def rect(self, node) -> Rect:
        lx, ly, j = node
        A = self.approx.A(j)
        sc, (tx, ty) = self.scale, self.shift
        if self.dim == 1:
            return (sc * lx + tx, sc * (lx + A) + tx, ty, ty)
        return (sc * lx + tx, sc * (lx + A) + tx, sc * ly + ty, sc * (ly + A) + ty)


class PointTree:
    """A single point viewed as a one-cell tree."""

    def __init__(self, point):
        self.point = as_point(point)

    def root(self):
        return self.point

    def depth(self, node) -> int:
        return 0

    def terminal(self, node) -> bool:
        return True

    def children(self, node):
        return []

    def rect(self, node) -> Rect:
        x, y = node
        return (x, x, y, y)


def scan_annulus(annulus: Annulus, trees, depth: int,
                 max_nodes: int = DEFAULT_MAX_NODES) -> SeparationVerdict:
    """Decide whether ``annulus`` separates the union of the trees' depth-k cells."""
    c = annulus.center
    r2, R2 = annulus.inner_sq, annulus.outer_sq
    inner = outer = None
    crossing = False
    point_inside = False      # a set point (cell corner) lies in the open annulus
    reach_inner = reach_outer = False
    visited = 0
    stack = [(t, t.root()) for t in reversed(list(trees))]
    while stack:
        tree, node = stack.pop()
        visited += 1
        if visited > max_nodes:
            raise EnumerationBudget(f"separation scan visited more than {max_nodes} cells")
        rect = tree.rect(node)
        dmin2, dmax2 = dist_range_sq(rect, c)
        if dmax2 <= r2:
            reach_inner = True
            if inner is None:
                inner = (rect[0], rect[2])
            continue
        if dmin2 >= R2:
            reach_outer = True
            if outer is None:
                outer = (rect[0], rect[2])
            continue
        if tree.terminal(node) or tree.depth(node) >= depth:
            crossing = True
            reach_inner = reach_inner or dmin2 <= r2
            reach_outer = reach_outer or dmax2 >= R2
            for p in _corners(rect):
                d2 = (p[0] - c[0]) ** 2 + (p[1] - c[1]) ** 2
                if r2 < d2 < R2:
                    point_inside = True
                elif d2 <= r2 and inner is None:
                    inner = p
                elif d2 >= R2 and outer is None:
                    outer = p
            if point_inside:
                break
            continue
        stack.extend((tree, ch) for ch in reversed(tree.children(node)))
    if crossing:
        if point_inside:
            return SeparationVerdict(False, inner, outer, depth, True,
                                     "a point of the set lies inside the annulus", visited)
        if not reach_inner or not reach_outer:
            return SeparationVerdict(False, inner, outer, depth, True,
                                     "a complementary component holds no point of the set", visited)
        return SeparationVerdict(False, inner, outer, depth, False,
                                 f"depth-{depth} cells meet the annulus; deeper levels may clear it",
                                 visited)
    if inner is None or outer is None:
        side = "bounded" if inner is None else "unbounded"
        return SeparationVerdict(False, inner, outer, depth, True,
                                 f"the {side} complementary component holds no point of the set",
                                 visited)
    return SeparationVerdict(True, inner, outer, depth, True, "separates", visited)


def is_separating(annulus: Annulus, params, k: int,
                  max_nodes: int = DEFAULT_MAX_NODES) -> SeparationVerdict:
    approx = as_approx(params)
    return scan_annulus(annulus, [CantorTree(approx, 1)], k, max_nodes)


def canonical_ratio(m: int, a_k: Fraction) -> Fraction:
    """R_k / r_k = 1 + 2(1/a_k - m)/(m - 1) for the canonical annulus."""
    return 1 + Fraction(2, m - 1) * (1 / as_fraction(a_k) - m)


def canonical_annulus(params, address: Address) -> Annulus:
    """Ann(midpoint of J; A_k/2, A_k/2 + e_k) around the addressed interval J."""
    approx = as_approx(params)
    k = address.depth
    if k < 1:
        raise ValueError("canonical annuli start at depth 1")
    J = approx.interval(address)
    r = J.length / 2
    return Annulus.from_radii(J.midpoint, r, r + approx.e(k))


def up_modulus_bound(m: int, delta) -> tuple[Fraction, float]:
    """M = 1 + 2(1/delta - m)/(m - 1) and log M: the largest ratio R/r of any
    annulus separating I when inf a_k = delta."""
    delta = as_fraction(delta)
    if not 0 < delta <= Fraction(1, m + 1):
        raise ValueError("delta must lie in (0, 1/(m+1)]")
    M = canonical_ratio(m, delta)
    return M, float(log_q(M))


@dataclass(frozen=True)
class HnupWitness:
    point: Address
    depth: int
    annulus: Annulus
    verdict: SeparationVerdict

    @property
    def achieved_ratio(self) -> float:
        return self.annulus.ratio

    @property
    def achieved_ratio_sq(self) -> Fraction:
        return self.annulus.ratio_sq

    @property
    def achieved_modulus(self) -> float:
        return self.annulus.modulus


def _point_address(approx: CantorApprox, point, K: int) -> Address:
    if isinstance(point, Address):
        return point.extended(K)
    if isinstance(point, str):
        return Address.parse(point, approx.m).extended(K)
    loc = approx.locate(as_fraction(point), K)
    if not isinstance(loc, Address):
        raise ValueError(f"point {point} is not in I_{K} (gap at depth {loc.depth})")
    return loc


def hnup_witness(params, point, M, K: int, max_nodes: int = DEFAULT_MAX_NODES) -> HnupWitness:
    """First depth k <= K whose canonical annulus around the point's depth-k
    interval has ratio >= M and separates.

    ``point`` is an Address (padded with zeros, i.e. followed down its left
    endpoint), an address string, or an exact coordinate in I_K.
    """
    M = as_fraction(M)
    if M <= 1:
        raise ValueError("target ratio M must exceed 1")
    approx = as_approx(params)
    addr = _point_address(approx, point, K)
    for k in range(1, K + 1):
        if canonical_ratio(approx.m, approx.ratio(k)) < M:
            continue
        ann = canonical_annulus(approx, addr.prefix(k))
        verdict = is_separating(ann, approx, k, max_nodes)
        if verdict.separates and verdict.sound:
            return HnupWitness(addr.prefix(k), k, ann, verdict)
    spec = approx.spec
    if spec.variant == CONSTANT:
        bound, _ = up_modulus_bound(spec.m, spec.a)
        if M > bound:
            raise WitnessNotFound(
                K, f"every separating annulus has R/r <= {bound} (constant ratio {spec.a})",
                conclusive=True)
    raise WitnessNotFound(K, f"no canonical annulus with ratio >= {M} up to depth {K}"
                             " (inconclusive: budget exhausted)")


@dataclass(frozen=True)
class BruteForceResult:
    depth: int
    max_ratio: Fraction | None
    annulus: Annulus | None
    candidates: int
    separators: int


def max_separating_ratio_bruteforce(params, k: int, max_intervals: int = 2**14) -> BruteForceResult:
    """Largest R/r among separating annuli in a canonical candidate family.

    Centres: every depth-k interval midpoint and every gap midpoint.  Radii:
    consecutive distinct distances from the centre to the endpoints E_k.
    Work is in integers scaled by 2D (exact); the winning annulus is then
    re-verified with ``is_separating``.  Ties go to the leftmost centre,
    then the smaller inner radius.
    """
    approx = as_approx(params)
    n = approx.m**k
    if n > max_intervals:
        raise EnumerationBudget(f"{n} intervals exceed the brute-force limit {max_intervals}")
    ints, D = approx.lefts_scaled(k)
    A = approx.A(k)
    Ak = A.numerator * (D // A.denominator)
    big = (max(ints) + 2 * Ak) * 4 >= 2**62
    dtype = object if big else np.int64
    X = np.array([2 * x for x in ints], dtype=dtype)
    L2 = 2 * Ak
    P = np.empty(2 * n, dtype=dtype)
    P[0::2] = X
    P[1::2] = X + L2
    centers = list(X + Ak)
    if n > 1:
        centers += list((X[:-1] + X[1:]) // 2 + Ak)
    centers.sort()

    best = None  # (ratio Fraction, center int, inner int, outer int)
    candidates = separators = 0
    for c in centers:
        dl = np.abs(P - c)
        u = np.unique(dl)
        if len(u) < 2:
            continue
        lo_e = np.abs(X - c)
        hi_e = np.abs(X + L2 - c)
        inside = (X <= c) & (c <= X + L2)
        dmin = np.where(inside, 0, np.minimum(lo_e, hi_e))
        dmax = np.maximum(lo_e, hi_e)
        if dtype is object:
            lo_idx = np.array([int(np.searchsorted(u, v, "left")) for v in dmin])
            hi_idx = np.array([int(np.searchsorted(u, v, "right")) - 1 for v in dmax])
        else:
            lo_idx = np.searchsorted(u, dmin, "left")
            hi_idx = np.searchsorted(u, dmax, "right") - 1
        cover = np.zeros(len(u) + 1, dtype=np.int64)
        valid = hi_idx > lo_idx
        np.add.at(cover, lo_idx[valid], 1)
        np.add.at(cover, hi_idx[valid], -1)
        cover = np.cumsum(cover)[: len(u) - 1]
        free = np.nonzero(cover == 0)[0]
        candidates += len(u) - 1
        separators += len(free)
        if len(free) == 0:
            continue
        num = u[free + 1]
        den = u[free]
        approx_r = np.array([float(a) / float(b) for a, b in zip(num, den)])
        top = approx_r.max()
        for j in np.nonzero(approx_r >= top * (1 - 1e-12))[0]:
            q = Fraction(int(num[j]), int(den[j]))
            cand = (q, int(c), int(den[j]), int(num[j]))
            if best is None or q > best[0]:
                best = cand
    if best is None:
        return BruteForceResult(k, None, None, candidates, separators)
    q, c, r, R = best
    scale = 2 * D
    ann = Annulus.from_radii(Fraction(c, scale), Fraction(r, scale), Fraction(R, scale))
    verdict = is_separating(ann, approx, k)
    if not verdict.separates:
        raise AssertionError("brute-force winner failed exact re-verification")
    return BruteForceResult(k, q, ann, candidates, separators)
