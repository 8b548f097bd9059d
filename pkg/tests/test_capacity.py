import itertools
import math
from fractions import Fraction as F

import pytest

from hnup.cantor import RatioSpec
from hnup.capacity import (endpoint_diameter_seq, endpoint_log_pair_product, endpoint_product_lower_bound,
                           exact_small_transfinite, greedy_fekete, log_pair_product, mu,
                           mu_census, mu_table, series_capacity_bound)
from hnup.errors import DuplicatePoints, EnumerationBudget, Unsupported

import oracles

THIRD = RatioSpec.constant(F(1, 3))
GEOM = RatioSpec.geometric_power(F(1, 4))
# pair product of the eight endpoints of the depth-2 middle-thirds approximation
THIRD_K2_PRODUCT = F(11239424000, 26588814358957503287787)


def test_four_point_product():
    p = log_pair_product([0, F(1, 4), F(3, 4), 1])
    assert p.exact_P == F(9, 512)
    assert p.logP_sq == pytest.approx(2 * math.log(9 / 512), rel=1e-14)
    assert p.logD == pytest.approx(math.log(9 / 512) / 6, rel=1e-14)
    assert p.D == pytest.approx((9 / 512) ** (1 / 6), rel=1e-14)


def test_small_products():
    assert log_pair_product([0, 1]).logP == 0 and log_pair_product([0, 1]).D == 1
    assert log_pair_product([0, F(1, 2), 1]).D == pytest.approx(0.25 ** (1 / 3), rel=1e-14)


def test_planar_product_is_squared():
    p = log_pair_product([(0, 0), (3, 4)])
    assert p.exact_P == 25 and p.logP == pytest.approx(math.log(5))


def test_product_rejects_duplicates():
    with pytest.raises(DuplicatePoints):
        log_pair_product([0, F(1, 3), F(1, 3)])


def test_third_k2_regression():
    assert oracles.pair_product(oracles.endpoint_list([F(1, 3)] * 2)) == THIRD_K2_PRODUCT
    got = endpoint_log_pair_product(THIRD, 2)
    assert got.n == 8
    assert got.logP == pytest.approx(oracles.log_fraction(THIRD_K2_PRODUCT), rel=1e-13)


@pytest.mark.parametrize("variant, a, m, k", [
    ("constant", F(1, 3), 2, 4),
    ("geometric-power", F(1, 4), 2, 5),
    ("sparse-power", F(1, 3), 2, 4),
    ("constant", F(1, 5), 3, 3),
])
def test_fast_path_matches_pairwise(variant, a, m, k):
    spec = RatioSpec(m=m, variant=variant, a=a)
    pts = oracles.endpoint_list(oracles.ratio_list(variant, a, k), m)
    slow = math.fsum(oracles.log_fraction(abs(p - q)) for p, q in itertools.combinations(pts, 2))
    fast = endpoint_log_pair_product(spec, k)
    assert fast.n == len(pts)
    assert fast.logP == pytest.approx(slow, rel=1e-12)


def test_lower_bound_at_depth_one():
    rhs = endpoint_product_lower_bound(GEOM, 1)
    assert rhs == pytest.approx(4 * (2 * math.log(1 / 2) + math.log(7 / 32)), rel=1e-14)
    assert rhs == pytest.approx(-11.6245, abs=1e-4)
    assert endpoint_log_pair_product(GEOM, 1).logP_sq == pytest.approx(2 * math.log(9 / 512))


def test_lower_bound_needs_binary_branching():
    with pytest.raises(Unsupported):
        endpoint_product_lower_bound(RatioSpec.constant(F(1, 4), m=3), 1)


def test_endpoint_sequence_certified():
    seq = endpoint_diameter_seq(GEOM, 8)
    assert [e.k for e in seq] == list(range(9))
    assert all(e.holds and e.certified and e.margin >= 0 for e in seq)


def test_mu_examples():
    assert mu(THIRD, 0, 1, 3) == 0
    assert mu(THIRD, 0, F(1, 3), 3) == 1
    assert mu(THIRD, 0, F(1, 9), 2) == 2
    with pytest.raises(ValueError):
        mu(THIRD, 0, 0, 2)
    with pytest.raises(ValueError):
        mu(THIRD, 0, F(1, 2), 2)


@pytest.mark.parametrize("k", [1, 3, 5])
def test_mu_table_matches_index_oracle(k):
    table = mu_table(GEOM, k)
    n = 2 * 2**k
    for i in range(n):
        for j in range(n):
            want = -1 if i == j else oracles.mu_from_indices(i // 2, j // 2, k)
            assert table[i, j] == want


@pytest.mark.parametrize("k", range(1, 7))
def test_mu_census_counts_and_bracket(k):
    c = mu_census(GEOM, k)
    assert c.counts_ok and c.bracket_ok and not c.violations


def test_mu_census_too_large():
    with pytest.raises(EnumerationBudget):
        mu_census(GEOM, 12)


def test_series_partials_and_limit():
    sb = series_capacity_bound(GEOM, terms=61)
    assert sb.partial_sums[1] == pytest.approx(0.5 * math.log(0.5) + 0.25 * math.log(1 / 8), rel=1e-14)
    assert sb.partial_sums[1] == pytest.approx(-0.86643, abs=1e-5)
    ref = oracles.geometric_series_partials(F(1, 4), 61)
    assert sb.partial_sums == pytest.approx(ref, rel=1e-13)
    assert abs(sb.partial_sums[60] + 5 * math.log(2)) < 1e-9
    assert sb.cap_lower_bound_exact == F(1, 32) and sb.certified


@pytest.mark.parametrize("a", [F(1, 3), F(1, 5), F(1, 10)])
def test_series_converges_monotonically(a):
    sb = series_capacity_bound(RatioSpec.geometric_power(a))
    s = sb.partial_sums
    assert all(x > y for x, y in zip(s, s[1:]))
    assert math.isfinite(sb.limit_estimate)
    assert sb.limit_estimate == pytest.approx(sb.closed_form, abs=1e-8)


def test_series_uncertified_outside_geometric():
    sb = series_capacity_bound(THIRD)
    assert not sb.certified and sb.cap_lower_bound_exact is None


def test_exact_small_examples():
    cands = [0, F(1, 3), F(2, 3), 1]
    two = exact_small_transfinite(cands, 2)
    assert two.points == (0, 1) and two.product.D == 1
    three = exact_small_transfinite(cands, 3)
    assert three.product.exact_P == F(2, 9)
    assert three.product.D == pytest.approx((2 / 9) ** (1 / 3), rel=1e-14)
    assert three.points == (0, F(1, 3), 1)


def test_greedy_examples():
    cands = [0, F(1, 3), F(2, 3), 1]
    assert greedy_fekete(cands, 2).points == (0, 1)
    assert greedy_fekete(cands, 4).points == tuple(cands)


def test_oracle_limits():
    with pytest.raises(EnumerationBudget):
        exact_small_transfinite([F(i, 30) for i in range(30)], 3)
    with pytest.raises(ValueError):
        exact_small_transfinite([0, 1], 3)
