from fractions import Fraction as F

import pytest

from hnup.cantor import (Address, CantorApprox, Outside, RatioSpec, endpoints, interval_of,
                         locate, ratio_at, ratios, refine, initial_state)
from hnup.errors import EnumerationBudget, ExactBudgetExceeded

import oracles


@pytest.mark.parametrize("spec, k, want", [
    (RatioSpec.sparse_power(F(1, 3)), 4, F(1, 9)),
    (RatioSpec.sparse_power(F(1, 3)), 5, F(1, 3)),
    (RatioSpec.sparse_power(F(1, 3)), 8, F(1, 27)),
    (RatioSpec.geometric_power(F(1, 4)), 3, F(1, 64)),
    (RatioSpec.constant(F(1, 3)), 17, F(1, 3)),
])
def test_ratio_at(spec, k, want):
    assert ratio_at(spec, k) == want


def test_ratio_validation():
    with pytest.raises(ValueError):
        RatioSpec.constant(F(1, 2))
    with pytest.raises(ValueError):
        RatioSpec.constant(F(0))
    with pytest.raises(ValueError):
        RatioSpec.constant(F(1, 3), m=1)
    with pytest.raises(TypeError):
        RatioSpec.constant(0.3)
    with pytest.warns(UserWarning):
        RatioSpec.constant(F(2, 5), relaxed=True)


def test_explicit_spec_runs_out():
    spec = RatioSpec.explicit([F(1, 3), F(1, 4)])
    assert ratios(spec, 1, 3) == [F(1, 3), F(1, 4)]
    with pytest.raises(IndexError):
        ratio_at(spec, 3)


@pytest.mark.parametrize("m, a, A1, e1", [
    (2, F(1, 3), F(1, 3), F(1, 3)),
    (3, F(1, 4), F(1, 4), F(1, 8)),
])
def test_refine_first_level(m, a, A1, e1):
    s = refine(initial_state(m, 1 - m * a), a)
    assert (s.A_exact, s.e_exact) == (A1, e1)


def test_refine_geometric_second_level():
    g = CantorApprox(RatioSpec.geometric_power(F(1, 4)))
    assert g.A(2) == F(1, 64)
    assert g.e(2) == F(7, 32)


def test_refine_budget():
    s = initial_state(2, F(1, 3))
    for _ in range(40):
        s = refine(s, F(1, 3), budget_bits=32)
    assert not s.exact
    with pytest.raises(ExactBudgetExceeded):
        s.A_exact
    with pytest.raises(ValueError):
        refine(s, F(1, 2))


def test_budget_fallback_keeps_logs():
    approx = CantorApprox(RatioSpec.constant(F(1, 3)), budget_bits=40)
    st = approx.state(60)
    assert not st.exact
    assert float(st.log_A) == pytest.approx(60 * -1.0986122886681098, rel=1e-12)


@pytest.mark.parametrize("m, a, addr, left, length", [
    (3, F(1, 4), "1", F(3, 8), F(1, 4)),
    (2, F(1, 3), "11", F(8, 9), F(1, 9)),
])
def test_interval_examples(m, a, addr, left, length):
    J = interval_of(RatioSpec.constant(a, m=m), Address.parse(addr, m))
    assert (J.left, J.length) == (left, length)


def test_interval_geometric_leftmost():
    J = interval_of(RatioSpec.geometric_power(F(1, 4)), Address.parse("000", 2))
    assert (J.left, J.length) == (0, F(1, 4096))


@pytest.mark.parametrize("spec, k, want", [
    (RatioSpec.geometric_power(F(1, 4)), 1, [0, F(1, 4), F(3, 4), 1]),
    (RatioSpec.constant(F(1, 3)), 1, [0, F(1, 3), F(2, 3), 1]),
    (RatioSpec.constant(F(1, 3)), 0, [0, 1]),
    (RatioSpec.sparse_power(F(1, 3)), 0, [0, 1]),
])
def test_endpoint_examples(spec, k, want):
    assert list(endpoints(spec, k).points) == want


def test_locate_examples():
    third = RatioSpec.constant(F(1, 3))
    out = locate(third, F(1, 2), 1)
    assert isinstance(out, Outside) and out.depth == 1
    assert str(locate(third, F(1), 3)) == "111"
    # 7/16 sits in the first-level gap (1/4, 3/4)
    out = locate(RatioSpec.geometric_power(F(1, 4)), F(7, 16), 2)
    assert isinstance(out, Outside) and out.depth == 1
    assert isinstance(locate(third, F(1, 6), 2), Outside)
    assert locate(third, F(2), 1) == Outside(0)


@pytest.mark.parametrize("variant, a, m, k", [
    ("constant", F(1, 3), 2, 6),
    ("constant", F(1, 4), 3, 4),
    ("sparse-power", F(1, 3), 2, 8),
    ("geometric-power", F(1, 4), 2, 5),
])
def test_intervals_match_oracle(variant, a, m, k):
    approx = CantorApprox(RatioSpec(m=m, variant=variant, a=a))
    want = oracles.intervals(oracles.ratio_list(variant, a, k), m)
    got = [(J.left, J.length) for J in approx.intervals(k)]
    assert got == want


def test_enumeration_budget():
    approx = CantorApprox(RatioSpec.constant(F(1, 3)), max_enumeration=100)
    with pytest.raises(EnumerationBudget):
        approx.lefts(10)


def test_address_round_trip():
    a = Address.parse("0121", 3)
    assert Address.from_index(a.index(), 4, 3) == a
    assert a.prefix(2) == Address.parse("01", 3)
    assert str(a.extended(6)) == "012100"
    with pytest.raises(ValueError):
        Address.parse("03", 3)


def test_random_spec_replays_by_index():
    spec = RatioSpec.random(seed=5)
    seq = ratios(spec, 1, 50)
    assert ratio_at(spec, 37) == seq[36]
    assert all(0 < a <= F(1, 3) for a in seq)
    assert ratios(RatioSpec.random(seed=6), 1, 50) != seq
