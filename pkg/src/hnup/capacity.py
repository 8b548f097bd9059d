"""Pair products, transfinite-diameter estimates and the capacity series bound.

Pair distances are exact rationals; their logs are taken from the exact
numerator and denominator (``math.log`` accepts arbitrarily large ints), so
nothing underflows even when lengths are far below 1e-308.  Large endpoint
configurations use the translation self-similarity of the construction
instead of enumerating pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .arith import as_fraction, log_q
from .cantor import GEOMETRIC_POWER, as_approx
from .errors import DuplicatePoints, EnumerationBudget, Unsupported

EXACT_PRODUCT_MAX_N = 64
BRUTE_FORCE_MAX_N = 2048
FAST_PATH_MAX_POINTS = 2**16
SMALL_ORACLE_MAX_CANDIDATES = 24
SMALL_ORACLE_MAX_N = 8


def _flog(q: Fraction) -> float:
    return math.log(q.numerator) - math.log(q.denominator)


def _as_planar(p) -> tuple[Fraction, Fraction]:
    if isinstance(p, tuple):
        return as_fraction(p[0]), as_fraction(p[1])
    return as_fraction(p), Fraction(0)


def _log_dist(p, q) -> float:
    dx, dy = p[0] - q[0], p[1] - q[1]
    if dy == 0:
        return _flog(abs(dx))
    return 0.5 * _flog(dx * dx + dy * dy)


@dataclass(frozen=True)
class ConfigProduct:
    """Sum of log pairwise distances of an n-point configuration."""

    n: int
    logP: float
    exact_P: Fraction | None = None  # prod |z_i - z_j|**2 for planar input

    @property
    def logD(self) -> float:
        if self.n < 2:
            raise ValueError("D_n needs at least two points")
        return 2 * self.logP / (self.n * (self.n - 1))

    @property
    def D(self) -> float:
        return math.exp(self.logD)

    @property
    def logP_sq(self) -> float:
        """log of P**2 = prod over ordered pairs z != z'."""
        return 2 * self.logP


def log_pair_product(points) -> ConfigProduct:
    pts = [_as_planar(p) for p in points]
    n = len(pts)
    if n < 2:
        raise ValueError("need at least two points")
    if len(set(pts)) != n:
        raise DuplicatePoints("configuration has repeated points")
    planar = any(p[1] != 0 for p in pts)
    if n > BRUTE_FORCE_MAX_N:
        raise EnumerationBudget(f"{n} points exceed the pairwise limit {BRUTE_FORCE_MAX_N}")
    logs = [_log_dist(p, q) for p, q in combinations(pts, 2)]
    exact = None
    if n <= EXACT_PRODUCT_MAX_N:
        exact = Fraction(1)
        for p, q in combinations(pts, 2):
            dx, dy = p[0] - q[0], p[1] - q[1]
            exact *= dx * dx + dy * dy if planar else abs(dx)
    return ConfigProduct(n, math.fsum(logs), exact)


def endpoint_log_pair_product(params, k: int) -> ConfigProduct:
    """Pair-product log for the 2 m**k endpoints E_k without listing pairs.

    Every depth-l interval holds a translate of the same endpoint pattern,
    so pairs are grouped by the depth l at which they split:

        log P = sum_{l<k} m**l * T_l + m**k * log A_k,

    T_l summing over pairs in different children of one depth-l interval.
    Child offsets are normalized by the sibling spacing s_{l+1}, which keeps
    every distance O(1) and well conditioned in double precision.
    """
    approx = as_approx(params)
    m = approx.m
    n = 2 * m**k
    if n > FAST_PATH_MAX_POINTS:
        raise EnumerationBudget(f"{n} endpoints exceed {FAST_PATH_MAX_POINTS}")
    if k == 0:
        return ConfigProduct(2, 0.0)
    A_k = approx.A(k)
    # pattern[l] = endpoint offsets inside one depth-l interval (exact)
    pattern = [Fraction(0), A_k]
    total = m**k * _flog(A_k)
    for l in range(k - 1, -1, -1):
        s = approx.spacing(l + 1)
        g = np.array([float(p / s) for p in pattern])
        diff = g[None, :] - g[:, None]  # y - x
        T = 0.0
        for d in range(1, m):
            T += (m - d) * float(np.log(d + diff).sum())
        T += m * (m - 1) // 2 * len(pattern) ** 2 * _flog(s)
        total += m**l * T
        if l:
            pattern = [c * s + p for c in range(m) for p in pattern]
    return ConfigProduct(n, total)


def endpoint_product_lower_bound(params, k: int) -> float:
    """2**(k+1) * sum_{l=0}^{k} 2**(k-l) * log e_{l+1}  (m = 2)."""
    approx = as_approx(params)
    if approx.m != 2:
        raise Unsupported("the structural lower bound is stated for m = 2 only")
    s = math.fsum(2.0 ** (k - l) * float(approx.log_e(l + 1)) for l in range(k + 1))
    return 2.0 ** (k + 1) * s


@dataclass(frozen=True)
class EndpointDiameter:
    k: int
    product: ConfigProduct
    rhs: float | None
    holds: bool | None
    certified: bool  # proven exactly by the termwise distance bracket

    @property
    def margin(self) -> float | None:
        return None if self.rhs is None else self.product.logP_sq - self.rhs


def endpoint_diameter_seq(params, K: int, certify_up_to: int = 8) -> list[EndpointDiameter]:
    """Endpoint-configuration products for E_0 .. E_K.

    For m = 2 each entry carries the structural bound and whether it holds;
    at depths <= ``certify_up_to`` the bound is proven exactly from the
    census of split depths and the pairwise distance bracket.
    """
    approx = as_approx(params)
    out = []
    for k in range(K + 1):
        prod = endpoint_log_pair_product(approx, k)
        if approx.m != 2:
            out.append(EndpointDiameter(k, prod, None, None, False))
            continue
        rhs = endpoint_product_lower_bound(approx, k)
        certified = False
        if k <= certify_up_to:
            c = mu_census(approx, k)
            certified = c.counts_ok and c.bracket_ok
        holds = certified or prod.logP_sq >= rhs
        out.append(EndpointDiameter(k, prod, rhs, holds, certified))
    return out


# ------------------------------------------------------------------- mu

def mu(params, z, z2, k: int) -> int:
    """Deepest level whose basic interval contains both endpoints z, z2 of E_k."""
    approx = as_approx(params)
    z, z2 = as_fraction(z), as_fraction(z2)
    if z == z2:
        raise ValueError("mu is defined for distinct points")
    a, b = approx.locate(z, k), approx.locate(z2, k)
    for loc, x in ((a, z), (b, z2)):
        if not hasattr(loc, "digits"):
            raise ValueError(f"{x} is not in I_{k}")
    shared = 0
    for d1, d2 in zip(a.digits, b.digits):
        if d1 != d2:
            break
        shared += 1
    return shared


def mu_table(params, k: int) -> np.ndarray:
    """Matrix of mu over E_k (entry [i, j] for endpoints i, j in sorted order;
    the diagonal is -1)."""
    approx = as_approx(params)
    m = approx.m
    n = 2 * m**k
    if n > BRUTE_FORCE_MAX_N:
        raise EnumerationBudget(f"{n} endpoints exceed {BRUTE_FORCE_MAX_N}")
    idx = np.arange(n) // 2
    p, q = idx[:, None].copy(), idx[None, :].copy()
    table = np.full((n, n), k, dtype=np.int64)
    diff = p != q
    while diff.any():
        table -= diff
        p //= m
        q //= m
        diff = p != q
    np.fill_diagonal(table, -1)
    return table


@dataclass(frozen=True)
class MuCensus:
    k: int
    counts: tuple[tuple[int, ...], ...]  # counts[i][l] = #{z' : mu(z_i, z') = l}
    counts_ok: bool | None  # None when m != 2 (no stated census)
    bracket_ok: bool
    violations: tuple = ()


def mu_census(params, k: int) -> MuCensus:
    """Exhaustive split-depth census and the bracket e_{l+1} <= |z - z'| <= A_l
    over all endpoint pairs of E_k, with exact integer distances."""
    approx = as_approx(params)
    m = approx.m
    table = mu_table(approx, k)
    n = table.shape[0]
    counts = tuple(tuple(int(c) for c in np.bincount(row[row >= 0], minlength=k + 1))
                   for row in table)
    counts_ok = None
    if m == 2:
        want = tuple(2 ** (k - l) for l in range(k + 1))
        counts_ok = all(c == want for c in counts)
    lefts, D = approx.lefts_scaled(k)
    A = approx.A(k)
    Ak = A.numerator * (D // A.denominator)
    pts = [x + d for x in lefts for d in (0, Ak)]
    lo = [approx.e(l + 1) * D for l in range(k)]
    hi = [approx.A(l) * D for l in range(k + 1)]
    violations = []
    for i in range(n):
        zi = pts[i]
        row = table[i]
        for j in range(i + 1, n):
            l = row[j]
            d = pts[j] - zi
            if d > hi[l] or (l < k and d < lo[l]):
                violations.append((i, j, int(l)))
    return MuCensus(k, counts, counts_ok, not violations, tuple(violations[:10]))


# ------------------------------------------------------------ series bound

@dataclass(frozen=True)
class SeriesBound:
    partial_sums: tuple[float, ...]
    limit_estimate: float
    closed_form: float | None
    cap_lower_bound: float
    cap_lower_bound_exact: Fraction | None
    certified: bool


def series_capacity_bound(params, tol: float = 1e-9, max_terms: int = 4096,
                          terms: int | None = None) -> SeriesBound:
    """Partial sums S_L = sum_{l=0}^{L} 2**(-l-1) log(B A_l), stopping once
    the increment drops below ``tol`` (or after exactly ``terms`` terms);
    exp(limit) bounds Cap from below.

    For geometric ratios a_k = a**k the limit is log B + 2 log a and the
    bound is the exact rational B * a**2, which is what ``certified`` marks.
    """
    approx = as_approx(params)
    spec = approx.spec
    if spec.m != 2:
        raise Unsupported("the capacity series is stated for m = 2 only")
    logB = log_q(spec.B)
    total = 0
    sums = []
    for l in range(terms or max_terms):
        term = (logB + approx.log_A(l)) / 2 ** (l + 1)
        total += term
        sums.append(float(total))
        if terms is None and l > 0 and abs(term) < tol:
            break
    closed = exact = None
    if spec.variant == GEOMETRIC_POWER:
        exact = spec.B * spec.a**2
        closed = float(logB + 2 * log_q(spec.a))
    limit = closed if closed is not None else sums[-1]
    return SeriesBound(tuple(sums), sums[-1], closed, math.exp(limit), exact, exact is not None)


# ------------------------------------------------------- small-n oracles

def _pair_log_matrix(pts) -> np.ndarray:
    n = len(pts)
    L = np.zeros((n, n))
    for i, j in combinations(range(n), 2):
        L[i, j] = L[j, i] = _log_dist(pts[i], pts[j])
    return L


def _sorted_candidates(candidates):
    pts = sorted({_as_planar(p) for p in candidates})
    if len(pts) != len(list(candidates)):
        raise DuplicatePoints("candidate set has repeated points")
    return pts


@dataclass(frozen=True)
class Configuration:
    points: tuple
    product: ConfigProduct


def _unplanar(pts):
    if all(p[1] == 0 for p in pts):
        return tuple(p[0] for p in pts)
    return tuple(pts)


def exact_small_transfinite(candidates, n: int) -> Configuration:
    """Exhaustive maximum of the pair product over n-subsets (oracle for D_n)."""
    pts = _sorted_candidates(list(candidates))
    if len(pts) > SMALL_ORACLE_MAX_CANDIDATES or n > SMALL_ORACLE_MAX_N:
        raise EnumerationBudget(
            f"exhaustive search limited to {SMALL_ORACLE_MAX_CANDIDATES} candidates, n <= {SMALL_ORACLE_MAX_N}")
    if not 2 <= n <= len(pts):
        raise ValueError("need 2 <= n <= number of candidates")
    L = _pair_log_matrix(pts)
    combos = np.array(list(combinations(range(len(pts)), n)), dtype=np.int64)
    scores = np.zeros(len(combos))
    for i, j in combinations(range(n), 2):
        scores += L[combos[:, i], combos[:, j]]
    top = scores.max()
    # settle near-ties exactly; first in lexicographic order wins equal products
    best = None
    for row in combos[scores >= top - 1e-9 * max(1.0, abs(top))]:
        cfg = [pts[i] for i in row]
        prod = log_pair_product(cfg)
        if best is None or prod.exact_P > best[1].exact_P:
            best = (cfg, prod)
    return Configuration(_unplanar(best[0]), best[1])


def greedy_fekete(candidates, n: int, max_candidates: int = 4096) -> Configuration:
    """Diameter pair, then repeatedly the candidate maximizing the added log
    product; ties go to the smallest coordinate."""
    pts = _sorted_candidates(list(candidates))
    if len(pts) > max_candidates:
        raise EnumerationBudget(f"{len(pts)} candidates exceed {max_candidates}")
    if not 2 <= n <= len(pts):
        raise ValueError("need 2 <= n <= number of candidates")
    L = _pair_log_matrix(pts)
    masked = np.where(np.eye(len(pts), dtype=bool), -np.inf, L)
    i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
    chosen = [min(i, j), max(i, j)]
    gain = L[chosen[0]] + L[chosen[1]]
    free = np.ones(len(pts), dtype=bool)
    free[chosen] = False
    while len(chosen) < n:
        g = np.where(free, gain, -np.inf)
        nxt = int(np.argmax(g))  # first maximal index = smallest coordinate
        chosen.append(nxt)
        free[nxt] = False
        gain = gain + L[nxt]
    cfg = [pts[c] for c in sorted(chosen)]
    return Configuration(_unplanar(cfg), log_pair_product(cfg))

