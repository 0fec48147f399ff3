from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twisthodge.arith import (
    InvalidInput,
    UniPoly,
    as_rational,
    fmt_rational,
    poly_from_linear_factors,
    rational_roots,
)

F = Fraction
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
small_polys = st.lists(rationals, min_size=0, max_size=6).map(lambda cs: UniPoly(tuple(cs)))


def expand(roots):
    p = UniPoly.constant(1)
    for r in roots:
        p = p * UniPoly((-r, F(1)))
    return p


def test_repeated_linear_factor():
    rl = rational_roots(UniPoly((1, 2, 1)))
    assert rl.entries == ((F(-1), 2),)
    assert rl.cofactor == UniPoly.constant(1)


def test_cusp_b_function_roots():
    # the expanded form, built here by hand from the three linear factors
    p = UniPoly((F(35, 36), F(107, 36), F(3), F(1)))
    assert p == expand([F(-1), F(-5, 6), F(-7, 6)])
    rl = rational_roots(p)
    assert rl.entries == ((F(-7, 6), 1), (F(-1), 1), (F(-5, 6), 1))


def test_no_rational_roots():
    rl = rational_roots(UniPoly((1, 0, 1)))
    assert rl.entries == ()
    assert rl.cofactor == UniPoly((1, 0, 1))


def test_zero_polynomial_is_rejected():
    with pytest.raises(InvalidInput):
        rational_roots(UniPoly())


def test_linear_factor_products():
    assert poly_from_linear_factors([]) == UniPoly.constant(1)
    assert poly_from_linear_factors([(F(1, 6), 1)]) == UniPoly((F(1, 6), F(1)))
    assert poly_from_linear_factors([(F(0), 2)]) == UniPoly((0, 0, 1))


def test_rational_text_forms():
    assert fmt_rational(F(-7, 6)) == "-7/6"
    assert fmt_rational(F(4, 2)) == "2"
    assert as_rational("3/9") == F(1, 3)
    with pytest.raises(InvalidInput):
        as_rational("x")


def test_text_form_of_univariate():
    assert UniPoly((F(1, 6), -1)).to_str("s") == "-s + 1/6"
    assert UniPoly((0, 0, 1)).to_str("s") == "s^2"


@settings(max_examples=300, deadline=None)
@given(
    roots=st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=6), min_size=0, max_size=6),
    lead=st.fractions(min_value=-9, max_value=9, max_denominator=5).filter(bool),
    extra=st.sampled_from([None, (1, 0, 1), (-2, 0, 1), (1, 1, 1)]),
)
def test_planted_roots_are_recovered(roots, lead, extra):
    p = expand(roots) * UniPoly.constant(lead)
    if extra is not None:
        p = p * UniPoly(extra)
    rl = rational_roots(p)
    planted: dict = {}
    for r in roots:
        planted[r] = planted.get(r, 0) + 1
    assert dict(rl.entries) == planted
    assert rl.reconstruct() == p
    # the shifts with flipped sign rebuild the monic root part
    rebuilt = poly_from_linear_factors([(-r, m) for r, m in rl.entries]) * rl.cofactor
    assert rebuilt == p.monic()


@settings(max_examples=1000, deadline=None)
@given(a=small_polys, b=small_polys)
def test_exact_ring_identities(a, b):
    assert (a + b) - b == a
    if not b.is_zero():
        q, r = (a * b).divmod(b)
        assert q == a and r.is_zero()
        q, r = a.divmod(b)
        assert q * b + r == a
        assert r.is_zero() or r.degree < b.degree


@settings(max_examples=200, deadline=None)
@given(p=small_polys, a=rationals.filter(bool), b=rationals, x=rationals)
def test_compose_linear_is_substitution(p, a, b, x):
    assert p.compose_linear(a, b)(x) == p(a * x + b)
