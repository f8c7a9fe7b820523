import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from heightlab.errors import InvalidPoint
from heightlab.heights import (HeightValue, ProjPoint, format_point, height_pn, height_rational,
                               normalize_point, parse_point)

ints = st.integers(min_value=-10**6, max_value=10**6)
vectors = st.lists(ints, min_size=2, max_size=5).filter(any)


def projectively_equal(u, v):
    # cross-multiplication oracle
    return all(Fraction(u[i]) * v[j] == Fraction(u[j]) * v[i]
               for i in range(len(u)) for j in range(len(u)))


@pytest.mark.parametrize("raw, expected", [
    ((4, 6), (2, 3)),
    ((0, -5), (0, 1)),
    ((Fraction(1, 2), Fraction(1, 3)), (3, 2)),
    (("-1/2", "1/3"), (3, -2)),
])
def test_normalize_examples(raw, expected):
    p = normalize_point(raw)
    assert p.coordinates == expected
    assert projectively_equal(p.coordinates, [Fraction(x) for x in raw])


def test_normalize_rejects_zero():
    with pytest.raises(InvalidPoint):
        normalize_point((0, 0, 0))


def test_projpoint_rejects_unnormalized():
    with pytest.raises(InvalidPoint):
        ProjPoint((2, 4))
    with pytest.raises(InvalidPoint):
        ProjPoint((-1, 2))


@pytest.mark.parametrize("raw, value", [((1, 0), 0.0), ((3, 2), math.log(3)), ((4, 6), math.log(3))])
def test_height_pn_examples(raw, value):
    h = height_pn(normalize_point(raw))
    assert h.exact and h.value == pytest.approx(value, abs=0)


@pytest.mark.parametrize("q, value", [(0, 0.0), (Fraction(3, 2), math.log(3)), (Fraction(-7, 5), math.log(7))])
def test_height_rational_examples(q, value):
    assert height_rational(q).value == value


@given(vectors, st.fractions().filter(lambda q: q != 0))
def test_height_scaling_invariance(v, lam):
    assert height_pn(normalize_point([lam * x for x in v])) == height_pn(normalize_point(v))


@given(vectors, st.randoms())
def test_height_permutation_invariance(v, rnd):
    w = list(v)
    rnd.shuffle(w)
    assert height_pn(normalize_point(w)) == height_pn(normalize_point(v))


@given(vectors)
def test_height_nonnegative_zero_iff_units(v):
    p = normalize_point(v)
    h = height_pn(p)
    assert h.value >= 0
    assert (h.value == 0) == all(abs(x) <= 1 for x in p.coordinates)


@given(st.fractions())
def test_height_rational_matches_pn(q):
    assert height_rational(q) == height_pn(normalize_point((q.numerator, q.denominator)))


@given(vectors)
def test_parse_format_roundtrip(v):
    p = normalize_point(v)
    assert parse_point(format_point(p)) == p


def test_parse_renormalizes_and_rejects():
    assert parse_point("4:6").coordinates == (2, 3)
    for bad in ("0:0", "3", "a:b", "1:"):
        with pytest.raises(InvalidPoint):
            parse_point(bad)


def test_exact_height_arithmetic():
    a, b = HeightValue.of_magnitude(6), HeightValue.of_magnitude(Fraction(1, 2))
    assert (a + b) == HeightValue.of_magnitude(3)
    assert (a - a).value == 0.0
    assert a.scale(3) == HeightValue.of_magnitude(216)
    assert b < a
