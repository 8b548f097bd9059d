"""Planar composites: products I x I, similarity images and annular packings.

The packing places a scaled copy of component m inside the ring
B_{2m} = Ann(0; rho_{2m+1}, rho_{2m}), so the odd rings B_{2m+1} stay empty
and separate consecutive components.  With rho_n = 2**(-n*n) every radius
is dyadic and all containment checks are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import as_fraction, log_int
from .cantor import Address, CantorApprox, RatioSpec, as_approx
from .errors import ContainmentFailure, Degenerate, EnumerationBudget, WitnessNotFound
from .perfectness import (DEFAULT_MAX_NODES, Annulus, CantorTree, Point, PointTree,
                          SeparationVerdict, as_point, canonical_ratio, dist_range_sq,
                          scan_annulus)

DEFAULT_COMPONENT_DEPTH = 8
DEFAULT_WITNESS_DEPTH = 64
ORIGIN = (Fraction(0), Fraction(0))


@dataclass(frozen=True)
class SimilarityMap:
    """z -> scale * z + shift."""

    scale: Fraction = Fraction(1)
    shift: Point = ORIGIN

    def __post_init__(self):
        object.__setattr__(self, "scale", as_fraction(self.scale))
        object.__setattr__(self, "shift", as_point(self.shift))
        if self.scale <= 0:
            raise ValueError("similarity scale must be positive")

    def __call__(self, p) -> Point:
        x, y = as_point(p)
        return (self.scale * x + self.shift[0], self.scale * y + self.shift[1])

    def inverse(self, p) -> Point:
        x, y = as_point(p)
        return ((x - self.shift[0]) / self.scale, (y - self.shift[1]) / self.scale)

    def then(self, other: "SimilarityMap") -> "SimilarityMap":
        """Apply self first, then other."""
        return SimilarityMap(self.scale * other.scale, other(self.shift))

    def annulus(self, ann: Annulus) -> Annulus:
        s2 = self.scale * self.scale
        return Annulus(self(ann.center), ann.inner_sq * s2, ann.outer_sq * s2)


@dataclass(frozen=True)
class RhoSequence:
    """rho_n = base**(-n**2); consecutive ratios base**(2n+1) grow without bound."""

    base: int = 2

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be an integer >= 2")

    def __call__(self, n: int) -> Fraction:
        if n < 1:
            raise ValueError("rho is indexed from n = 1")
        return Fraction(1, self.base ** (n * n))

    def ratio(self, n: int) -> Fraction:
        return self(n) / self(n + 1)

    def ring(self, n: int) -> Annulus:
        """B_n = Ann(0; rho_{n+1}, rho_n)."""
        return Annulus.from_radii(ORIGIN, self(n + 1), self(n))


# ---------------------------------------------------------------- components

@dataclass(frozen=True)
class CantorComponent:
    """I_a on the real axis, or I_a x I_a when ``dim`` is 2."""

    spec: RatioSpec
    depth: int = DEFAULT_COMPONENT_DEPTH
    dim: int = 2
    approx: CantorApprox = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "approx", CantorApprox(self.spec))

    @property
    def m(self) -> int:
        return self.spec.m

    def tree(self, f: SimilarityMap | None = None) -> CantorTree:
        f = f or SimilarityMap()
        return CantorTree(self.approx, self.dim, f.scale, f.shift)

    def dimension_bounds(self) -> tuple[float, float]:
        """Lower and upper bounds on dim_H for a = 1/(m+1) components."""
        d = float(log_int(self.m) / log_int(self.m + 1))
        if self.dim == 1:
            return d, d
        return 2 * d, d + 1


def ProductComponent(spec: RatioSpec, depth: int = DEFAULT_COMPONENT_DEPTH) -> CantorComponent:
    return CantorComponent(spec, depth, 2)


@dataclass(frozen=True)
class SimilarityImage:
    base: CantorComponent
    map: SimilarityMap

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def depth(self) -> int:
        return self.base.depth

    @property
    def dim(self) -> int:
        return self.base.dim

    def tree(self) -> CantorTree:
        return self.base.tree(self.map)

    def bounding_rect(self):
        return self.tree().rect(self.tree().root())

    def dimension_bounds(self) -> tuple[float, float]:
        return self.base.dimension_bounds()


@dataclass(frozen=True)
class PointComponent:
    point: Point = ORIGIN

    def tree(self) -> PointTree:
        return PointTree(self.point)


def _cells(tree, depth: int, limit: int):
    out = []
    stack = [tree.root()]
    while stack:
        node = stack.pop()
        if tree.terminal(node) or tree.depth(node) >= depth:
            out.append(tree.rect(node))
            if len(out) > limit:
                raise EnumerationBudget(f"more than {limit} cells")
            continue
        stack.extend(tree.children(node))
    return out


@dataclass
class PlanarSet:
    """Origin plus similarity images of components m = 2..M_max."""

    components: list
    rho: RhoSequence
    kind: str  # "E" (planar) or "W" (real line)

    def trees(self) -> list:
        return [c.tree() for c in self.components]

    @property
    def images(self) -> list[SimilarityImage]:
        return [c for c in self.components if isinstance(c, SimilarityImage)]

    def rectangles(self, depth: int | None = None, limit: int = 2**20) -> list:
        rects = []
        for c in self.components:
            d = c.depth if depth is None or not hasattr(c, "depth") else min(depth, c.depth)
            rects += _cells(c.tree(), d if hasattr(c, "depth") else 0, limit - len(rects))
        return sorted(rects)

    def dimension_report(self) -> list[dict]:
        rows = []
        for c in self.images:
            lo, hi = c.dimension_bounds()
            rows.append({"m": c.m, "lower": lo, "upper": hi})
        return rows

    def dimension_sup(self) -> float:
        return max(r["lower"] for r in self.dimension_report())


def _place(m: int, rho: RhoSequence, dim: int) -> SimilarityMap:
    """Scale by s = (rho_2m - rho_{2m+1})/2 and centre at ((rho_2m + rho_{2m+1})/2, 0)."""
    outer, inner = rho(2 * m), rho(2 * m + 1)
    s = (outer - inner) / 2
    cx = (outer + inner) / 2
    return SimilarityMap(s, (cx - s / 2, -s / 2 if dim == 2 else Fraction(0)))


def _check_containment(img: SimilarityImage, rho: RhoSequence, on_line: bool):
    m = img.m
    ring = rho.ring(2 * m)
    dmin2, dmax2 = dist_range_sq(img.bounding_rect(), ORIGIN)
    if not (ring.inner_sq < dmin2 and dmax2 < ring.outer_sq):
        raise ContainmentFailure(f"component {m} leaves the ring B_{2 * m}")
    if on_line:
        x0, x1, _, _ = img.bounding_rect()
        if x0 < 0 or x1 > 1:
            raise ContainmentFailure(f"component {m} leaves [0, 1]")


def _build(M_max: int, depth, rho: RhoSequence | None, dim: int) -> PlanarSet:
    if M_max < 2:
        raise ValueError("M_max must be >= 2")
    rho = rho or RhoSequence()
    comps: list = [PointComponent()]
    for m in range(2, M_max + 1):
        k = depth(m) if callable(depth) else depth
        spec = RatioSpec.sparse_power(Fraction(1, m + 1), m)
        img = SimilarityImage(CantorComponent(spec, k, dim), _place(m, rho, dim))
        _check_containment(img, rho, dim == 1)
        comps.append(img)
    return PlanarSet(comps, rho, "E" if dim == 2 else "W")


def build_E(M_max: int, depth=DEFAULT_COMPONENT_DEPTH, rho: RhoSequence | None = None) -> PlanarSet:
    """{0} together with scaled copies G_m' of W_m x W_m, m = 2..M_max."""
    return _build(M_max, depth, rho, 2)


def build_W(M_max: int, depth=DEFAULT_COMPONENT_DEPTH, rho: RhoSequence | None = None) -> PlanarSet:
    """{0} together with scaled copies W_m' on [0, 1], m = 2..M_max."""
    return _build(M_max, depth, rho, 1)


def packing_separation(pset: PlanarSet) -> list[tuple[int, SeparationVerdict]]:
    """Verdict of every odd ring B_{2m+1} between consecutive components."""
    out = []
    trees = pset.trees()
    for img in pset.images[:-1]:
        ring = pset.rho.ring(2 * img.m + 1)
        out.append((img.m, scan_annulus(ring, trees, depth=0)))
    return out


# ----------------------------------------------------------------- witnesses

def product_annulus(params, k: int, address: tuple[Address, Address] | None = None) -> Annulus:
    """Ann((x_J, y_J); sqrt(2) r_k, R_k) around the product cell J x J'."""
    approx = as_approx(params)
    if address is None:
        address = (Address((0,) * k, approx.m),) * 2
    jx, jy = approx.interval(address[0]), approx.interval(address[1])
    if address[0].depth != k or address[1].depth != k:
        raise ValueError("addresses must have depth k")
    r = approx.A(k) / 2
    R = r + approx.e(k)
    if R * R <= 2 * r * r:
        raise Degenerate(f"R_{k} <= sqrt(2) r_{k}: the product annulus is empty")
    return Annulus((jx.midpoint, jy.midpoint), 2 * r * r, R * R)


@dataclass(frozen=True)
class ProductWitness:
    point: tuple[Address, Address]
    depth: int
    annulus: Annulus
    verdict: SeparationVerdict

    @property
    def achieved_ratio(self) -> float:
        return self.annulus.ratio

    @property
    def achieved_modulus(self) -> float:
        return self.annulus.modulus


def _planar_address(approx: CantorApprox, point, K: int) -> tuple[Address, Address]:
    if isinstance(point, tuple) and isinstance(point[0], Address):
        return point[0].extended(K), point[1].extended(K)
    x, y = as_point(point)
    out = []
    for c in (x, y):
        loc = approx.locate(c, K)
        if not isinstance(loc, Address):
            raise ValueError(f"coordinate {c} is not in I_{K}")
        out.append(loc)
    return out[0], out[1]


def product_hnup_witness(params, point, M, K: int,
                         max_nodes: int = DEFAULT_MAX_NODES) -> ProductWitness:
    """First k <= K whose product annulus around the point's cell has
    R_k / (sqrt(2) r_k) >= M and separates I_k x I_k."""
    M = as_fraction(M)
    if M <= 1:
        raise ValueError("target ratio M must exceed 1")
    approx = as_approx(params)
    ax, ay = _planar_address(approx, point, K)
    for k in range(1, K + 1):
        q = canonical_ratio(approx.m, approx.ratio(k))
        if q * q < 2 * M * M:
            continue
        addr = (ax.prefix(k), ay.prefix(k))
        ann = product_annulus(approx, k, addr)
        verdict = scan_annulus(ann, [CantorTree(approx, 2)], k, max_nodes)
        if verdict.separates:
            return ProductWitness(addr, k, ann, verdict)
    raise WitnessNotFound(K, f"no product annulus with ratio >= {M} up to depth {K}"
                             " (inconclusive: budget exhausted)")


@dataclass(frozen=True)
class PropertyWitness:
    """Ann(x; r, R), empty of the set, with a set point beyond R."""

    x: Point
    annulus: Annulus
    depth: int | None
    component: int | None  # None for the origin
    verdict: SeparationVerdict

    @property
    def ratio(self) -> float:
        return self.annulus.ratio

    @property
    def r(self) -> float:
        return self.annulus.inner

    @property
    def R(self) -> float:
        return self.annulus.outer


def _origin_witness(pset: PlanarSet, M: Fraction, max_nodes: int) -> PropertyWitness:
    trees = pset.trees()
    for img in pset.images:
        ring = pset.rho.ring(2 * img.m + 1)
        if not ring.ratio_at_least(M):
            continue
        verdict = scan_annulus(ring, trees, 0, max_nodes)
        if verdict.separates:
            return PropertyWitness(ORIGIN, ring, None, None, verdict)
    raise WitnessNotFound(0, f"no empty odd ring of ratio >= {M} in the truncation")


def _component_of(pset: PlanarSet, x: Point) -> SimilarityImage:
    for img in pset.images:
        x0, x1, y0, y1 = img.bounding_rect()
        if x0 <= x[0] <= x1 and y0 <= x[1] <= y1:
            return img
    raise ValueError(f"{x} lies in no component")


def _cell_annulus(img: SimilarityImage, x: Point, k: int) -> Annulus | None:
    """Ann(x; r, R) in global coordinates: r reaches the far corner of x's
    depth-k cell, R = e_k + distance from x to the cell boundary."""
    approx = img.base.approx
    local = img.map.inverse(x)
    coords = local[:img.dim]
    far2 = Fraction(0)
    edge = None
    for c in coords:
        loc = approx.locate(c, k)
        if not isinstance(loc, Address):
            raise ValueError(f"{x} is not in the component's depth-{k} approximation")
        J = approx.interval(loc)
        lo, hi = c - J.left, J.right - c
        far2 += max(lo, hi) ** 2
        near = min(lo, hi)
        edge = near if edge is None else min(edge, near)
    R = approx.e(k) + edge
    if far2 == 0 or R * R <= far2:
        return None
    s2 = img.map.scale ** 2
    return Annulus(x, far2 * s2, R * R * s2)


def additional_property_witness(pset: PlanarSet, x, M, K: int = DEFAULT_WITNESS_DEPTH,
                                max_nodes: int = DEFAULT_MAX_NODES) -> PropertyWitness:
    """r, R with R/r >= M, Ann(x; r, R) missing the set and a set point at
    distance >= R.  The verdict is checked against the limit components
    (scanned as deep as needed), not only against the stored depth."""
    M = as_fraction(M)
    if M <= 1:
        raise ValueError("target ratio M must exceed 1")
    x = as_point(x)
    if x == ORIGIN:
        return _origin_witness(pset, M, max_nodes)
    img = _component_of(pset, x)
    trees = pset.trees()
    approx = img.base.approx
    for k in range(1, K + 1):
        # cheap necessary test before any geometry: e_k / (sqrt(dim) A_k) >= M
        if (canonical_ratio(approx.m, approx.ratio(k)) - 1) ** 2 < 4 * img.dim * M * M:
            continue
        ann = _cell_annulus(img, x, k)
        if ann is None or not ann.ratio_at_least(M):
            continue
        verdict = scan_annulus(ann, trees, k, max_nodes)
        if verdict.separates:
            return PropertyWitness(x, ann, k, img.m, verdict)
    raise WitnessNotFound(K, f"no annulus of ratio >= {M} around {x} up to depth {K}"
                             " (inconclusive: budget exhausted)")


def sample_component_points(pset: PlanarSet, count: int, seed: int = 0,
                            digits: int = 12) -> list[Point]:
    """Deterministic points of the limit components: left/bottom corners of
    cells with random addresses, cycling through the components."""
    gen = np.random.Generator(np.random.Philox(seed))
    pts = []
    imgs = pset.images
    for i in range(count):
        img = imgs[i % len(imgs)]
        approx = img.base.approx
        local = []
        for _ in range(img.dim):
            addr = Address(tuple(int(d) for d in gen.integers(0, img.m, digits)), img.m)
            local.append(approx.interval(addr).left)
        if img.dim == 1:
            local.append(Fraction(0))
        pts.append(img.map(tuple(local)))
    return pts


def dimension_sup_closed_form(M_max: int, kind: str = "E") -> float:
    """sup over m <= M_max of 2 log m / log(m+1) (planar) or log m / log(m+1)."""
    f = 2 if kind == "E" else 1
    return max(f * math.log(m) / math.log(m + 1) for m in range(2, M_max + 1))
