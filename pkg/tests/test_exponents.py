from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from quasimod.exponents import (
    INF,
    MixedExponent,
    as_mixed,
    conjugate_exponent,
    from_recip,
    holder_holds,
    parse_exponent,
    pq_conditions,
    recip,
)

exponents = st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=12).map(float) | st.just(INF)


def test_parse_forms():
    assert parse_exponent("inf") == INF
    assert parse_exponent("2/3") == pytest.approx(2 / 3)
    assert parse_exponent(1.5) == 1.5
    for bad in (0, -1, "0", "nan"):
        with pytest.raises(ValueError):
            parse_exponent(bad)


def test_conjugate_examples():
    assert conjugate_exponent(INF) == 1
    assert conjugate_exponent(2) == 2
    assert conjugate_exponent(0.5) == INF
    assert conjugate_exponent(1) == INF
    assert conjugate_exponent(4) == pytest.approx(4 / 3)


@given(exponents)
def test_recip_round_trip(p):
    assert from_recip(recip(p)) == p


@given(exponents)
def test_conjugate_is_involution_above_one(p):
    if p >= 1:
        q = conjugate_exponent(p)
        assert recip(p) + recip(q) == 1
        assert conjugate_exponent(q) == pytest.approx(p)


def test_holder_exact_fractions():
    assert holder_holds("1/2", 1, 1)
    assert holder_holds(1, 2, 2)
    assert holder_holds("2/3", 1, 2)
    assert holder_holds("3/2", "inf", "3/2")
    assert not holder_holds(1, 2, 3)
    assert holder_holds(1, 2, 3, equality=False) is False
    assert holder_holds(2, 2, 3, equality=False)


def test_mixed_exponent_validation():
    e = MixedExponent((1, INF), (1, 0))
    assert e.sigma == (1, 0) and e.dim == 2
    with pytest.raises(ValueError):
        MixedExponent((1, 2), (0, 0))
    assert as_mixed(2, 3).p == (2.0, 2.0, 2.0)
    with pytest.raises(ValueError):
        as_mixed((1, 2), 3)


@pytest.mark.parametrize("p1,p2,p,q", [
    ((2, 2), (2, 2), INF, 1), ((INF, INF), (1, 1), 1, 1), ((1, 1), (2, 2), INF, 2),
    (("1/2", "1/2"), ("1/2", "1/2"), INF, "1/2"), ((2, 4), (2, 4), 4, "4/3"),
])
def test_admissible_tuples(p1, p2, p, q):
    assert pq_conditions(p1, p2, p, q) == []


def test_inadmissible_tuple_names_relation():
    problems = pq_conditions((2, 2), (1, 1), INF, 1)
    assert problems and "1/p2 - 1/p1" in problems[0]
    assert any("exceeds" in m for m in pq_conditions((1, 1), (1, 1), INF, 2))
    assert pq_conditions((1,), (1, 1), INF, 1)[0].startswith("dimension mismatch")
