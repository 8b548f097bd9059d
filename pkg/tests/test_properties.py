import csv
import io
import math
from fractions import Fraction as F

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from hnup import report as rpt
from hnup.assembly import RhoSequence, SimilarityMap
from hnup.cantor import Address, CantorApprox, RatioSpec
from hnup.capacity import (endpoint_diameter_seq, exact_small_transfinite, greedy_fekete,
                           log_pair_product, mu_census)
from hnup.dimension import box_count, box_count_sweep, dim_estimate_seq, sparse_power_logA_bounds
from hnup.perfectness import (CantorTree, canonical_annulus, canonical_ratio, hnup_witness,
                              is_separating, max_separating_ratio_bruteforce, scan_annulus,
                              up_modulus_bound)
from hnup.porosity import CircleFamily, IntervalUnion, circle_family_ratio, empty_ball_search

import oracles

FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
SLOW = settings(max_examples=12, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def specs(draw, variants=("constant", "sparse-power", "geometric-power"), max_m=4):
    m = draw(st.integers(2, max_m))
    a = F(1, m + 1 + draw(st.integers(0, 6)))
    return RatioSpec(m=m, variant=draw(st.sampled_from(variants)), a=a)


@st.composite
def spec_and_address(draw, max_cells=256):
    spec = draw(specs())
    k_max = max(1, int(math.log(max_cells, spec.m)))
    k = draw(st.integers(1, k_max))
    digits = tuple(draw(st.lists(st.integers(0, spec.m - 1), min_size=k, max_size=k)))
    return spec, Address(digits, spec.m)


# ------------------------------------------------------------ construction

@FAST
@given(specs(), st.integers(1, 14))
def test_gap_identity_and_lower_bound(spec, k):
    ap = CantorApprox(spec)
    m = spec.m
    assert (m - 1) * ap.e(k) == ap.A(k - 1) - m * ap.A(k)
    assert ap.e(k) >= spec.B * ap.A(k - 1) / (m - 1)
    assert ap.e(k + 1) < ap.e(k)


@FAST
@given(specs(), st.integers(1, 64))
def test_log_lengths_track_exact_lengths(spec, k):
    ap = CantorApprox(spec)
    assert float(ap.log_A(k)) == pytest.approx(oracles.log_fraction(ap.A(k)), rel=1e-12)
    assert float(ap.log_e(k)) == pytest.approx(oracles.log_fraction(ap.e(k)), rel=1e-12)


@FAST
@given(specs())
def test_intervals_are_spaced_by_the_gap(spec):
    ap = CantorApprox(spec)
    k = max(1, int(math.log(256, spec.m)))
    ivs = list(ap.intervals(k))
    gaps = [b.left - a.right for a, b in zip(ivs, ivs[1:])]
    assert min(gaps) >= ap.e(k)
    assert all(J.address.depth == k and J.length == ap.A(k) for J in ivs)


@FAST
@given(specs(), st.integers(0, 5))
def test_endpoints_nest(spec, k):
    ap = CantorApprox(spec)
    Ek, Ek1 = set(ap.endpoints(k)), set(ap.endpoints(k + 1))
    assert len(Ek) == 2 * spec.m**k and Ek <= Ek1
    assert all(isinstance(ap.locate(z, k + 3), Address) for z in Ek)


# -------------------------------------------------------------- dimension

@FAST
@given(st.integers(2, 5), st.integers(0, 6))
def test_constant_and_geometric_dimension_identities(m, j):
    a = F(1, m + 1 + j)
    est = dim_estimate_seq(RatioSpec.constant(a, m), 80)
    want = math.log(m) / -math.log(a)
    assert all(v == pytest.approx(want, rel=1e-12) for _, v in est.samples)
    geo = dim_estimate_seq(RatioSpec.geometric_power(a, m), 80)
    assert all(v * (k + 1) == pytest.approx(2 * want, rel=1e-12) for k, v in geo.samples)


@FAST
@given(st.integers(2, 3000), st.integers(0, 4))
def test_sparse_logA_strictly_bracketed(k, j):
    a = F(1, 3 + j)
    lo, hi = sparse_power_logA_bounds(a, 2, k)
    logA = CantorApprox(RatioSpec.sparse_power(a)).log_A(k)
    assert lo < logA < hi


@FAST
@given(specs(variants=("constant",)), st.integers(1, 6), st.integers(1, 5))
def test_box_counts_non_increasing(spec, k, j):
    ap = CantorApprox(spec)
    small, large = ap.A(k), ap.A(k) * (j + 1)
    assert box_count(ap, small, depth=k).count >= box_count(ap, large, depth=k).count


@SLOW
@given(st.integers(2, 4), st.integers(0, 3))
def test_box_slope_matches_dimension(m, j):
    a = F(1, m + 1 + j)
    ap = CantorApprox(RatioSpec.constant(a, m))
    k = 8 if m == 2 else 5 if m == 3 else 4
    sweep = box_count_sweep(ap, [ap.A(i) for i in range(1, k + 1)], depth=k)
    assert sweep[0].slope_estimate == pytest.approx(math.log(m) / -math.log(a), rel=0.05)


# ------------------------------------------------------------ perfectness

@FAST
@given(spec_and_address())
def test_canonical_annulus_separates(sa):
    spec, addr = sa
    ann = canonical_annulus(spec, addr)
    v = is_separating(ann, spec, addr.depth)
    assert v.separates and v.sound
    ap = CantorApprox(spec)
    ivs = [(J.left, J.length) for J in ap.intervals(addr.depth)]
    J = ap.interval(addr)
    r = J.length / 2
    assert oracles.annulus_separates_line(J.midpoint, r, r + ap.e(addr.depth), ivs)


@FAST
@given(spec_and_address())
def test_canonical_ratio_identity(sa):
    spec, addr = sa
    ap = CantorApprox(spec)
    k = addr.depth
    exact_ratio = (ap.A(k) / 2 + ap.e(k)) / (ap.A(k) / 2)
    assert exact_ratio == canonical_ratio(spec.m, ap.ratio(k))
    assert canonical_annulus(spec, addr).ratio_sq == exact_ratio**2


@SLOW
@given(st.integers(2, 3), st.integers(0, 3), st.integers(1, 5))
def test_bruteforce_never_beats_up_bound(m, j, k):
    a = F(1, m + 1 + j)
    if m**k > 256:
        k = 4
    res = max_separating_ratio_bruteforce(RatioSpec.constant(a, m), k)
    bound, _ = up_modulus_bound(m, a)
    assert res.max_ratio == bound


@SLOW
@given(st.integers(0, 5), st.lists(st.integers(0, 1), min_size=16, max_size=16))
def test_sparse_witness_ratios_grow_along_powers_of_two(j, digits):
    spec = RatioSpec.sparse_power(F(1, 3 + j))
    addr = Address(tuple(digits), 2)
    ratios = []
    for n in range(1, 5):
        k = 2**n
        ann = canonical_annulus(spec, addr.prefix(k))
        assert is_separating(ann, spec, k).separates
        ratios.append(ann.ratio_sq)
    assert all(x < y for x, y in zip(ratios, ratios[1:]))
    w = hnup_witness(spec, addr, canonical_ratio(2, spec.a**4), 16)
    assert w.depth == 16


# ---------------------------------------------------------------- capacity

@SLOW
@given(specs(variants=("constant", "sparse-power", "geometric-power"), max_m=2), st.integers(1, 6))
def test_mu_bracket_and_census(spec, k):
    c = mu_census(spec, k)
    assert c.bracket_ok and c.counts_ok


@SLOW
@given(st.integers(0, 6))
def test_lower_bound_holds_for_geometric_ratios(j):
    seq = endpoint_diameter_seq(RatioSpec.geometric_power(F(1, 3 + j)), 6)
    assert all(e.holds and e.certified for e in seq)


rationals = st.fractions(min_value=-2, max_value=2, max_denominator=64)
planar = st.tuples(rationals, rationals)


@FAST
@given(st.lists(rationals, min_size=4, max_size=9, unique=True))
def test_transfinite_diameter_non_increasing(cands):
    ds = [exact_small_transfinite(cands, n).product.logD for n in range(2, min(5, len(cands)) + 1)]
    assert all(x >= y - 1e-12 for x, y in zip(ds, ds[1:]))


@FAST
@given(st.lists(planar, min_size=3, max_size=10, unique=True), st.integers(2, 6))
def test_greedy_below_exact(cands, n):
    n = min(n, len(cands))
    exact = exact_small_transfinite(cands, n).product.logP
    assert greedy_fekete(cands, n).product.logP <= exact + 1e-9


@FAST
@given(st.lists(rationals, min_size=2, max_size=12, unique=True))
def test_pair_product_matches_oracle(pts):
    got = log_pair_product(pts)
    assert got.exact_P == oracles.pair_product(pts)
    assert got.logP == pytest.approx(oracles.log_fraction(got.exact_P), rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------- porosity

@SLOW
@given(st.integers(1, 9))
def test_circle_family_ratio_bracketed(n):
    p = empty_ball_search(CircleFamily(12), 0, F(1, n))
    want = float(circle_family_ratio(n))
    assert want - p.slack <= float(p.ratio) <= want


@SLOW
@given(specs(max_m=3), st.integers(1, 4))
def test_line_probe_in_adjacent_gap(spec, k):
    ap = CantorApprox(spec)
    shape = IntervalUnion.from_approx(ap, k)
    J = next(iter(ap.intervals(k)))
    p = empty_ball_search(shape, J.midpoint, ap.e(k) / 2, grid=33)
    assert float(p.ratio) >= 0.5 - p.slack


# ---------------------------------------------------------------- assembly

@FAST
@given(spec_and_address(max_cells=64),
       st.fractions(min_value=F(1, 1000), max_value=10, max_denominator=1000), planar)
def test_similarity_invariance(sa, s, shift):
    spec, addr = sa
    f = SimilarityMap(s, shift)
    ann = canonical_annulus(spec, addr)
    moved = f.annulus(ann)
    assert moved.ratio_sq == ann.ratio_sq
    tree = CantorTree(CantorApprox(spec), 1, f.scale, f.shift)
    assert scan_annulus(moved, [tree], addr.depth).separates


@FAST
@given(st.integers(1, 40), st.integers(2, 5))
def test_rho_ratios_diverge(n, base):
    rho = RhoSequence(base)
    assert 0 < rho(n + 1) < rho(n) < 1
    assert rho.ratio(n) == base ** (2 * n + 1) and rho.ratio(n + 1) > rho.ratio(n)


# ---------------------------------------------------------------- reports

@FAST
@given(specs(max_m=3), st.integers(0, 4))
def test_build_csv_round_trip(spec, k):
    payload = rpt.build_payload(spec, k, budget_bits=10**6, max_enumeration=2**12)
    rows = list(csv.DictReader(io.StringIO(rpt.build_csv(payload))))
    ap = CantorApprox(spec)
    got = [(F(int(r["left_num"]), int(r["left_den"])), F(int(r["len_num"]), int(r["len_den"])))
           for r in rows]
    assert got == [(J.left, J.length) for J in ap.intervals(k)]
    assert [r["address"] for r in rows] == [str(J.address) for J in ap.intervals(k)]


@SLOW
@given(st.integers(0, 2**32))
def test_random_reports_are_deterministic(seed):
    spec = RatioSpec.random(seed)
    one = rpt.dumps(rpt.envelope({"seed": seed}, rpt.dim_payload(spec, 300)))
    two = rpt.dumps(rpt.envelope({"seed": seed}, rpt.dim_payload(RatioSpec.random(seed), 300)))
    assert one == two
