"""Finite-depth approximations of Cantor-like sets with variable ratios.

I_0 = [0, 1]; every basic interval of I_{k-1} (length A_{k-1}) holds m
equally spaced children of length A_k = a_k * A_{k-1}, the outer two
children sharing the parent's endpoints.  Sibling gaps e_k satisfy

    (m - 1) * e_k = A_{k-1} - m * A_k.

Geometry is kept exact (``Fraction``) while the values fit the bit budget,
with a 128-bit log of every length alongside so very deep levels stay
analyzable once the exact values are dropped.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .arith import as_fraction, bit_size, ctx, log_int, log_q
from .errors import EnumerationBudget, ExactBudgetExceeded, InvariantViolation

DEFAULT_BUDGET_BITS = 10**6
MAX_ENUMERATION = 2**20

CONSTANT = "constant"
SPARSE_POWER = "sparse-power"
GEOMETRIC_POWER = "geometric-power"
EXPLICIT = "explicit"
RANDOM = "random"
VARIANTS = (CONSTANT, SPARSE_POWER, GEOMETRIC_POWER, EXPLICIT, RANDOM)


@dataclass(frozen=True)
class RatioSpec:
    """Rule producing the ratio sequence a_1, a_2, ... and branching count m.

    Use the classmethod constructors; ``a`` is the uniform upper bound on
    the ratios (for ``random`` it is 1/(m+1), the top of the sampling law).
    ``relaxed`` admits 1/(m+1) < a < 1/m, where gap monotonicity is no
    longer guaranteed and is only warned about.
    """

    m: int
    variant: str
    a: Fraction
    values: tuple[Fraction, ...] = ()
    seed: int = 0
    precision_bits: int = 64
    relaxed: bool = False

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 2:
            raise ValueError("branching count m must be an integer >= 2")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        object.__setattr__(self, "a", as_fraction(self.a))
        object.__setattr__(self, "values", tuple(as_fraction(v) for v in self.values))
        if self.variant == EXPLICIT:
            if not self.values:
                raise ValueError("explicit spec needs at least one ratio")
            for v in self.values:
                self._check_ratio(v)
        else:
            self._check_ratio(self.a)
        if self.variant == RANDOM:
            if self.a != self.cap:
                raise ValueError("random spec samples on (0, 1/(m+1)]; a must equal 1/(m+1)")
            if not 32 <= self.precision_bits <= 64:
                raise ValueError("precision_bits must lie in [32, 64]")
            if not 0 <= self.seed < 2**128:
                raise ValueError("seed must be a non-negative integer below 2**128")

    def _check_ratio(self, v: Fraction):
        if v <= 0:
            raise ValueError(f"ratio {v} must be positive")
        if v <= self.cap:
            return
        if self.relaxed and v < Fraction(1, self.m):
            warnings.warn(
                f"ratio {v} exceeds 1/(m+1); gap monotonicity is not guaranteed",
                stacklevel=3,
            )
            return
        raise ValueError(f"ratio {v} outside (0, 1/(m+1)] for m={self.m}")

    @property
    def cap(self) -> Fraction:
        return Fraction(1, self.m + 1)

    @property
    def B(self) -> Fraction:
        """1 - m*a, a lower bound for 1 - m*a_k at every level."""
        return 1 - self.m * self.a

    @classmethod
    def constant(cls, a, m=2, **kw):
        return cls(m=m, variant=CONSTANT, a=as_fraction(a), **kw)

    @classmethod
    def sparse_power(cls, a, m=2, **kw):
        return cls(m=m, variant=SPARSE_POWER, a=as_fraction(a), **kw)

    @classmethod
    def geometric_power(cls, a, m=2, **kw):
        return cls(m=m, variant=GEOMETRIC_POWER, a=as_fraction(a), **kw)

    @classmethod
    def explicit(cls, values: Sequence, m=2, **kw):
        vals = tuple(as_fraction(v) for v in values)
        return cls(m=m, variant=EXPLICIT, a=max(vals), values=vals, **kw)

    @classmethod
    def random(cls, seed=0, m=2, precision_bits=64):
        return cls(m=m, variant=RANDOM, a=Fraction(1, m + 1), seed=seed,
                   precision_bits=precision_bits)

    def inf_ratio(self) -> Fraction | None:
        """inf a_k when it is known exactly (0 for the shrinking variants)."""
        if self.variant == CONSTANT:
            return self.a
        if self.variant in (SPARSE_POWER, GEOMETRIC_POWER):
            return Fraction(0)
        if self.variant == EXPLICIT:
            return min(self.values)
        return None  # random: 0 almost surely, never observed at finite depth

    def describe(self) -> dict:
        d = {"m": self.m, "variant": self.variant, "a": f"{self.a.numerator}/{self.a.denominator}"}
        if self.variant == EXPLICIT:
            d["values"] = [f"{v.numerator}/{v.denominator}" for v in self.values]
        if self.variant == RANDOM:
            d["seed"] = self.seed
            d["precision_bits"] = self.precision_bits
        if self.relaxed:
            d["relaxed"] = True
        return d


def _power_of_two_exponent(k: int) -> int:
    """n >= 1 with k == 2**n, else 0."""
    if k >= 2 and k & (k - 1) == 0:
        return k.bit_length() - 1
    return 0


def random_numerators(spec: RatioSpec, start: int, count: int) -> np.ndarray:
    """Numerators u of draws a_start .. a_{start+count-1}, each a_k = u / 2**p.

    Draw k lives in Philox block k-1 (keyed by the seed), so any draw can be
    replayed by index.  Each block gives four 64-bit words; the first word
    accepted by the unbiased rejection step becomes a uniform index into the
    dyadic grid {1, ..., floor(2**p / (m+1))} / 2**p, a subset of (0, 1/(m+1)].
    """
    if start < 1 or count < 0:
        raise ValueError("draw indices start at 1")
    p = spec.precision_bits
    n = (1 << p) // (spec.m + 1)
    limit = ((1 << p) // n) * n
    words = np.random.Philox(key=spec.seed, counter=start - 1).random_raw(4 * count)
    words = words.reshape(count, 4)
    if p < 64:
        words = words >> np.uint64(64 - p)
    if limit >= 1 << 64:
        ok = np.ones(words.shape, dtype=bool)
    else:
        ok = words < np.uint64(limit)
    if not ok.any(axis=1).all():
        raise RuntimeError("random stream rejected a whole block")  # p >= 32: prob < 2**-112
    first = ok.argmax(axis=1)
    chosen = words[np.arange(count), first]
    return chosen % np.uint64(n) + np.uint64(1)


def ratio_at(spec: RatioSpec, k: int) -> Fraction:
    """a_k for k >= 1."""
    if k < 1:
        raise ValueError("ratios are indexed from k = 1")
    v = spec.variant
    if v == CONSTANT:
        return spec.a
    if v == SPARSE_POWER:
        n = _power_of_two_exponent(k)
        return spec.a**n if n else spec.a
    if v == GEOMETRIC_POWER:
        return spec.a**k
    if v == EXPLICIT:
        if k > len(spec.values):
            raise IndexError(f"explicit spec defines {len(spec.values)} ratios, asked for a_{k}")
        return spec.values[k - 1]
    u = int(random_numerators(spec, k, 1)[0])
    return Fraction(u, 1 << spec.precision_bits)


def ratios(spec: RatioSpec, start: int, stop: int) -> list[Fraction]:
    """a_start .. a_{stop-1}; batched for the random variant."""
    if stop <= start:
        return []
    if spec.variant == RANDOM:
        den = 1 << spec.precision_bits
        return [Fraction(int(u), den) for u in random_numerators(spec, start, stop - start)]
    return [ratio_at(spec, k) for k in range(start, stop)]


@dataclass(frozen=True)
class DepthState:
    """Lengths at depth k in both representations.

    ``A``/``e`` are exact while they fit the bit budget and None after;
    ``log_A``/``log_e`` (128-bit mpf) are always present (``log_e`` is None
    at k = 0, where there are no gaps).
    """

    k: int
    m: int
    B: Fraction
    log_A: object
    A: Fraction | None
    log_e: object = None
    e: Fraction | None = None
    ratio: Fraction | None = None

    @property
    def exact(self) -> bool:
        return self.A is not None

    @property
    def A_exact(self) -> Fraction:
        if self.A is None:
            raise ExactBudgetExceeded(f"exact A_{self.k} dropped (bit budget exceeded)")
        return self.A

    @property
    def e_exact(self) -> Fraction:
        if self.e is None:
            if self.k == 0:
                raise ValueError("no gaps at depth 0")
            raise ExactBudgetExceeded(f"exact e_{self.k} dropped (bit budget exceeded)")
        return self.e


def initial_state(m: int, B: Fraction) -> DepthState:
    return DepthState(k=0, m=m, B=B, log_A=ctx.mpf(0), A=Fraction(1))


def refine(state: DepthState, a_next: Fraction, budget_bits: int = DEFAULT_BUDGET_BITS,
           relaxed: bool = False) -> DepthState:
    """Depth k+1 state from depth k and a_{k+1}."""
    m = state.m
    a_next = as_fraction(a_next)
    if relaxed:
        ok = 0 < a_next < Fraction(1, m)
    else:
        ok = 0 < a_next <= Fraction(1, m + 1)
    if not ok:
        raise ValueError(f"a_{state.k + 1} = {a_next} outside the admissible range")
    shrink = 1 - m * a_next
    log_A = state.log_A + log_q(a_next)
    log_e = state.log_A + log_q(shrink) - log_int(m - 1)
    A = e = None
    if state.A is not None:
        A = state.A * a_next
        e = state.A * shrink / (m - 1)
        if bit_size(A) > budget_bits or bit_size(e) > budget_bits:
            A = e = None
    return DepthState(k=state.k + 1, m=m, B=state.B, log_A=log_A, A=A,
                      log_e=log_e, e=e, ratio=a_next)


@dataclass(frozen=True)
class Address:
    """Word over {0..m-1}; the empty word names I_0 = [0, 1]."""

    digits: tuple[int, ...]
    m: int

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        if any(not 0 <= d < self.m for d in self.digits):
            raise ValueError(f"address digits must lie in 0..{self.m - 1}")

    @property
    def depth(self) -> int:
        return len(self.digits)

    def prefix(self, k: int) -> "Address":
        if k > self.depth:
            raise ValueError("prefix longer than address")
        return Address(self.digits[:k], self.m)

    def extended(self, k: int, digit: int = 0) -> "Address":
        """Pad to depth k (the all-``digit`` tail names a point of I)."""
        if k <= self.depth:
            return self.prefix(k)
        return Address(self.digits + (digit,) * (k - self.depth), self.m)

    def index(self) -> int:
        """Position among the depth-k intervals in left-to-right order."""
        i = 0
        for d in self.digits:
            i = i * self.m + d
        return i

    @classmethod
    def from_index(cls, i: int, k: int, m: int) -> "Address":
        digits = []
        for _ in range(k):
            i, d = divmod(i, m)
            digits.append(d)
        if i:
            raise ValueError("index out of range for depth")
        return cls(tuple(reversed(digits)), m)

    @classmethod
    def parse(cls, text: str, m: int) -> "Address":
        text = text.strip()
        if not text:
            return cls((), m)
        if "." in text:
            return cls(tuple(int(t) for t in text.split(".")), m)
        return cls(tuple(int(c) for c in text), m)

    def __str__(self):
        if self.m <= 10:
            return "".join(str(d) for d in self.digits)
        return ".".join(str(d) for d in self.digits)


@dataclass(frozen=True)
class Outside:
    """x fell strictly inside a gap first created at ``depth``."""

    depth: int


@dataclass(frozen=True)
class BasicInterval:
    address: Address
    left: Fraction
    length: Fraction

    @property
    def right(self) -> Fraction:
        return self.left + self.length

    @property
    def midpoint(self) -> Fraction:
        return self.left + self.length / 2


@dataclass(frozen=True)
class EndpointSet:
    """Sorted endpoints of the depth-k intervals; entry 2i / 2i+1 is the
    left / right end of interval i."""

    k: int
    points: tuple[Fraction, ...]

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass
class CantorApprox:
    """Lazily extended sequence of depth states for one RatioSpec.

    Values never change once computed, so instances can be shared between
    threads; extension is serialized by a lock.
    """

    spec: RatioSpec
    budget_bits: int = DEFAULT_BUDGET_BITS
    max_enumeration: int = MAX_ENUMERATION
    _states: list = field(default_factory=list, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        if self.budget_bits <= 0 or self.max_enumeration <= 0:
            raise ValueError("budgets must be positive")
        self._states.append(initial_state(self.spec.m, self.spec.B))

    def __hash__(self):
        return hash((self.spec, self.budget_bits))

    def __eq__(self, other):
        return (isinstance(other, CantorApprox) and self.spec == other.spec
                and self.budget_bits == other.budget_bits)

    @property
    def m(self) -> int:
        return self.spec.m

    def state(self, k: int) -> DepthState:
        if k < 0:
            raise ValueError("depth must be non-negative")
        if k >= len(self._states):
            with self._lock:
                have = len(self._states)
                if k >= have:
                    s = self._states[-1]
                    for a in ratios(self.spec, have, k + 1):
                        nxt = refine(s, a, self.budget_bits, self.spec.relaxed)
                        self._check_gap(s, nxt)
                        self._states.append(nxt)
                        s = nxt
        return self._states[k]

    def _check_gap(self, prev: DepthState, nxt: DepthState):
        if prev.k == 0:
            return
        if prev.e is not None and nxt.e is not None:
            ok = nxt.e < prev.e
        else:
            ok = nxt.log_e < prev.log_e
        if ok:
            return
        msg = f"gap e_{nxt.k} is not smaller than e_{prev.k}"
        if self.spec.relaxed:
            warnings.warn(msg, stacklevel=3)
        else:
            raise InvariantViolation(msg)

    def ratio(self, k: int) -> Fraction:
        return self.state(k).ratio

    def A(self, k: int) -> Fraction:
        return self.state(k).A_exact

    def e(self, k: int) -> Fraction:
        return self.state(k).e_exact

    def log_A(self, k: int):
        return self.state(k).log_A

    def log_e(self, k: int):
        return self.state(k).log_e

    def spacing(self, k: int) -> Fraction:
        """Offset between consecutive sibling left endpoints at depth k."""
        return self.A(k) + self.e(k)

    def _check_enumeration(self, k: int):
        if self.m**k > self.max_enumeration:
            raise EnumerationBudget(
                f"refusing to enumerate {self.m}**{k} intervals (limit {self.max_enumeration})")

    def interval(self, address: Address) -> BasicInterval:
        if address.m != self.m:
            raise ValueError("address branching count differs from spec")
        left = Fraction(0)
        for j, d in enumerate(address.digits, start=1):
            if d:
                left += d * self.spacing(j)
        return BasicInterval(address, left, self.A(address.depth))

    def lefts_scaled(self, k: int) -> tuple[list[int], int]:
        """Left endpoints of all depth-k intervals as integers over a common
        denominator D (left = n / D), in left-to-right order."""
        self._check_enumeration(k)
        spacings = [self.spacing(j) for j in range(1, k + 1)]
        D = 1
        for q in spacings + [self.A(k)]:
            D = D * q.denominator // math.gcd(D, q.denominator)
        ints = [0]
        for s in spacings:
            step = s.numerator * (D // s.denominator)
            ints = [x + d * step for x in ints for d in range(self.m)]
        return ints, D

    def lefts(self, k: int) -> list[Fraction]:
        ints, D = self.lefts_scaled(k)
        return [Fraction(n, D) for n in ints]

    def intervals(self, k: int) -> Iterator[BasicInterval]:
        A = self.A(k)
        for i, left in enumerate(self.lefts(k)):
            yield BasicInterval(Address.from_index(i, k, self.m), left, A)

    def endpoints(self, k: int) -> EndpointSet:
        A = self.A(k)
        pts = []
        for left in self.lefts(k):
            pts.append(left)
            pts.append(left + A)
        return EndpointSet(k, tuple(pts))

    def locate(self, x, k: int) -> Address | Outside:
        x = as_fraction(x)
        if x < 0 or x > 1:
            return Outside(0)
        left = Fraction(0)
        digits = []
        for j in range(1, k + 1):
            s = self.spacing(j)
            d = min(int((x - left) // s), self.m - 1)
            child = left + d * s
            if x > child + self.A(j):
                return Outside(j)
            digits.append(d)
            left = child
        return Address(tuple(digits), self.m)


def as_approx(obj, **kw) -> CantorApprox:
    if isinstance(obj, CantorApprox):
        return obj
    if isinstance(obj, RatioSpec):
        return CantorApprox(obj, **kw)
    raise TypeError(f"expected CantorApprox or RatioSpec, got {type(obj).__name__}")


def interval_of(params, address: Address) -> BasicInterval:
    return as_approx(params).interval(address)


def endpoints(params, k: int) -> EndpointSet:
    return as_approx(params).endpoints(k)


def locate(params, x, k: int) -> Address | Outside:
    return as_approx(params).locate(x, k)
