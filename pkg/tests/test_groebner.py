from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import CUSP, NODE, X, rand_poly, rand_weyl
from twisthodge.annbs import ann_fs_order1, bs_polynomial, beta_polynomial
from twisthodge.groebner import (
    buchberger,
    commutative_gb,
    commutative_normal_form,
    commutative_syzygies,
    eliminate,
    elimination_order,
    filtration_intersect,
    grlex_order,
    left_division,
    normal_form,
    normal_form_with_certificate,
    sharp_order_key,
)
from twisthodge.linalg import Echelon
from twisthodge.polynomial import Poly, monomials_up_to
from twisthodge.weyl import AlgebraSignature, WeylElement, sharp_order

F = Fraction
D1 = AlgebraSignature(1)
S1 = AlgebraSignature(1, has_s=True)
S2 = AlgebraSignature(2, has_s=True)
D3 = AlgebraSignature(3)


def W(sig, terms):
    return WeylElement(sig, terms)


def s_pair(g, h, order):
    lg, lh = max(g.terms, key=order.key), max(h.terms, key=order.key)
    L = tuple(max(a, b) for a, b in zip(lg, lh))
    mg = WeylElement.monomial(g.sig, tuple(a - b for a, b in zip(L, lg)))
    mh = WeylElement.monomial(h.sig, tuple(a - b for a, b in zip(L, lh)))
    return (mg * g).scale(1 / g.terms[lg]) - (mh * h).scale(1 / h.terms[lh])


def assert_is_reduced_gb(gens, gb):
    order = gb.order
    for g in gens:
        assert normal_form(g, gb).is_zero()
    for i, g in enumerate(gb.basis):
        for h in gb.basis[i + 1:]:
            assert normal_form(s_pair(g, h, order), gb).is_zero()
    lms = gb.leading_monomials()
    for i, g in enumerate(gb.basis):
        for j, lm in enumerate(lms):
            if i != j:
                assert not any(all(a >= b for a, b in zip(m, lm)) for m in g.terms)


def test_x_and_d_generate_everything():
    x, d = WeylElement.x(D1, 0), WeylElement.d(D1, 0)
    gb = buchberger([x, d], grlex_order())
    assert gb.basis == [WeylElement.const(D1, 1)]
    assert gb.is_unit()


def test_euler_relation_forces_s_plus_one():
    x, d, s = WeylElement.x(S1, 0), WeylElement.d(S1, 0), WeylElement.s(S1)
    gb = buchberger([x * d - s, x], grlex_order())
    assert gb.contains(s + 1)


def test_principal_ideal():
    f = WeylElement.from_poly(S2, CUSP)
    assert buchberger([f], grlex_order()).basis == [f]


def test_normal_form_examples():
    x, d, s = WeylElement.x(S1, 0), WeylElement.d(S1, 0), WeylElement.s(S1)
    gb = buchberger([x * d - s], grlex_order())
    assert normal_form(x * d, gb) == s
    assert normal_form(x * d - s, gb).is_zero()
    gb2 = buchberger([x, s], grlex_order())
    # 1 is not in D[s]x + D[s]s: modulo s the ideal is D x, a proper ideal
    assert normal_form(WeylElement.const(S1, 1), gb2) == WeylElement.const(S1, 1)


def test_normal_form_certificate_reproduces_input():
    x, d, s = WeylElement.x(S1, 0), WeylElement.d(S1, 0), WeylElement.s(S1)
    gens = [x * d - s, x ** 2]
    gb = buchberger(gens, grlex_order(), track=True)
    P = d ** 2 * x ** 3 + s * x * d + d
    r, cert = normal_form_with_certificate(P, gb)
    total = r
    for j, q in cert.items():
        total = total + q * gens[j]
    assert total == P
    quots, r2 = left_division(P, gb)
    assert r2 == r


def test_eliminate_examples():
    x, d, s = WeylElement.x(S1, 0), WeylElement.d(S1, 0), WeylElement.s(S1)
    gb, free = eliminate([x * d - s, x], [0, 1], back_block=[2])
    assert [gb.basis[i] for i in free] == [s + 1]
    gb, free = eliminate([x, s], [1, 2])
    assert [gb.basis[i] for i in free] == [x]
    ann = ann_fs_order1(CUSP)
    f = WeylElement.from_poly(S2, CUSP)
    gb, free = eliminate(ann + [f], [0, 1, 2, 3])
    assert len(free) == 1
    b = gb.basis[free[0]]
    roots = [F(-1), F(-5, 6), F(-7, 6)]
    expected = WeylElement.const(S2, 1)
    for r in roots:
        expected = expected * (s_of(S2) - r)
    lc = b.terms[max(b.terms)]
    assert b.scale(1 / lc) == expected


def s_of(sig):
    return WeylElement.s(sig)


def test_eliminate_validates_blocks():
    x = WeylElement.x(S1, 0)
    with pytest.raises(ValueError):
        eliminate([x], [0, 1], back_block=[1, 2])


def test_filtration_intersect_examples():
    one = WeylElement.const(S1, 1)
    gb = buchberger([one], sharp_order_key(S1))
    assert filtration_intersect(gb, 0) == [one]
    x, s = WeylElement.x(S1, 0), WeylElement.s(S1)
    gb = buchberger([x, s], sharp_order_key(S1))
    assert filtration_intersect(gb, 0) == [x]
    with pytest.raises(ValueError):
        filtration_intersect(buchberger([x, s], grlex_order()), 0)


def test_filtration_intersect_exhausts_at_large_k():
    ann = ann_fs_order1(CUSP, -1)
    gb = buchberger(ann + [WeylElement.from_poly(S2, CUSP)], sharp_order_key(S2))
    top = max(sharp_order(g) for g in gb.basis)
    elems = filtration_intersect(gb, top)
    for g in gb.basis:
        assert any(e == g or e == g.scale(-1) for e in elems) or g in elems


def test_syzygy_examples():
    syz = commutative_syzygies([X.diff(0), -X])
    assert any(rel == [Poly.var(1, 0), Poly.one(1)] for rel in syz)
    for f in (CUSP, NODE):
        fi = [f.diff(i) for i in range(2)]
        syz = commutative_syzygies(fi + [-f])
        for rel in syz:
            assert rel[0] * fi[0] + rel[1] * fi[1] == rel[2] * f
    # E - s for the cusp: (x/2, y/3, 1)
    syz = commutative_syzygies([CUSP.diff(0), CUSP.diff(1), -CUSP])
    target = [Poly(2, {(1, 0): F(1, 2)}), Poly(2, {(0, 1): F(1, 3)}), Poly.one(2)]
    assert _in_module(target, syz)


def _in_module(vec, gens, deg=3):
    # truncated linear-algebra membership of vec in the module spanned by gens
    n = vec[0].n
    ech = Echelon()
    for g in gens:
        for a in monomials_up_to(n, deg):
            ech.add(_vec_row([p.mul_monomial(a) for p in g]))
    return ech.contains(_vec_row(vec))


def _vec_row(v):
    return {(i,) + m: c for i, p in enumerate(v) for m, c in p.terms.items()}


def test_monomial_orders_are_admissible():
    rng = random.Random(7)
    orders = [grlex_order(), sharp_order_key(S2), elimination_order([0, 1, 2, 3])]
    for order in orders:
        for _ in range(500):
            a, b, m = (tuple(rng.randint(0, 3) for _ in range(5)) for _ in range(3))
            ka, kb = order.key(a), order.key(b)
            assert (ka < kb) or (ka > kb) or a == b
            plus = lambda u, v: tuple(p + q for p, q in zip(u, v))
            if ka < kb:
                assert order.key(plus(a, m)) < order.key(plus(b, m))
            assert order.key((0,) * 5) <= ka


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_leading_monomial_is_additive(seed):
    rng = random.Random(seed)
    order = sharp_order_key(S2)
    g = rand_weyl(rng, S2)
    m = tuple(rng.randint(0, 3) for _ in range(S2.size))
    if g.is_zero():
        return
    prod = WeylElement.monomial(S2, m) * g
    lm = max(g.terms, key=order.key)
    assert max(prod.terms, key=order.key) == tuple(a + b for a, b in zip(m, lm))


FIXTURE_IDEALS = {
    "cusp-ann+f": lambda: ann_fs_order1(CUSP) + [WeylElement.from_poly(S2, CUSP)],
    "cusp-gamma": lambda: _gamma_gens(CUSP, F(1, 6)),
    "node-gamma": lambda: _gamma_gens(NODE, F(1, 2)),
    "mixed": lambda: [W(S1, {(2, 1, 0): 1, (0, 0, 1): -1}), W(S1, {(1, 2, 0): 1, (1, 0, 0): 3})],
}


def _gamma_gens(f, alpha):
    sig = S2
    bs = bs_polynomial(f)
    beta = beta_polynomial(bs, alpha)
    return [WeylElement.from_poly(sig, f), WeylElement.from_unipoly_s(sig, beta, -1, 0)] + ann_fs_order1(f, -1)


@pytest.mark.parametrize("name", sorted(FIXTURE_IDEALS))
def test_fixture_bases_are_reduced_groebner_bases(name):
    gens = FIXTURE_IDEALS[name]()
    for order in (grlex_order(), sharp_order_key(gens[0].sig)):
        assert_is_reduced_gb(gens, buchberger(gens, order))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), name=st.sampled_from(sorted(FIXTURE_IDEALS)))
def test_shuffled_generators_give_identical_bases(seed, name):
    rng = random.Random(seed)
    gens = FIXTURE_IDEALS[name]()
    order = sharp_order_key(gens[0].sig)
    ref = buchberger(gens, order).basis
    shuffled = list(gens)
    rng.shuffle(shuffled)
    # scalar rescaling and a redundant left combination keep the ideal
    shuffled = [g.scale(rng.choice([F(1), F(-2), F(3, 5)])) for g in shuffled]
    shuffled.append(rand_weyl(rng, gens[0].sig, max_exp=1, max_terms=2) * shuffled[0])
    assert buchberger(shuffled, order).basis == ref


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), name=st.sampled_from(sorted(FIXTURE_IDEALS)))
def test_certificates_reproduce_basis(seed, name):
    rng = random.Random(seed)
    gens = FIXTURE_IDEALS[name]()
    rng.shuffle(gens)
    order = rng.choice([grlex_order(), sharp_order_key(gens[0].sig)])
    gb = buchberger(gens, order, track=True)
    for g, cof in zip(gb.basis, gb.cofactors):
        total = WeylElement.zero(g.sig)
        for j, c in cof.items():
            total = total + c * gens[j]
        assert total == g


def _truncated_ideal(gens, deg):
    n = gens[0].n
    ech = Echelon()
    for g in gens:
        for a in monomials_up_to(n, max(deg - g.degree(), -1)) if g.degree() <= deg else []:
            ech.add(_key_row(g.mul_monomial(a)))
    return ech


def _key_row(p):
    return {(-sum(m),) + tuple(-v for v in m): c for m, c in p.terms.items()}


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_commutative_elimination_matches_linear_algebra(seed):
    rng = random.Random(seed)
    # ideal <x0 - p(x1, x2), q(x1, x2) * x0 + r(x1, x2)> in Q[x0, x1, x2]
    p = Poly(3, {(0,) + m[1:]: c for m, c in rand_poly(rng, 3, 2, 3).terms.items()})
    q = Poly(3, {(0,) + m[1:]: c for m, c in rand_poly(rng, 3, 2, 2).terms.items()})
    r = Poly(3, {(0,) + m[1:]: c for m, c in rand_poly(rng, 3, 2, 2).terms.items()})
    x0 = Poly.var(3, 0)
    polys = [x0 - p, q * x0 + r]
    gens = [WeylElement.from_poly(D3, g) for g in polys]
    gb, free = eliminate(gens, [0, 3, 4, 5])
    elim = [Poly(3, {m[:3]: c for m, c in gb.basis[i].terms.items()}) for i in free]
    assert all(e.terms and all(m[0] == 0 for m in e.terms) for e in elim)
    deg = 5
    span = _truncated_ideal(polys, deg + 2)
    for e in elim:
        if e.degree() <= deg:
            assert span.contains(_key_row(e))
    # the substituted polynomial q*p + r lies in the elimination ideal
    target = q * p + r
    if not target.is_zero():
        assert commutative_normal_form(target, commutative_gb(elim)).is_zero()


def test_filtration_intersect_matches_truncated_linear_algebra():
    gens = _gamma_gens(CUSP, F(0))
    gb = buchberger(gens, sharp_order_key(S2))
    k = 1
    elems = filtration_intersect(gb, k)
    for e in elems:
        assert sharp_order(e) <= k and normal_form(e, gb).is_zero()
    # random ideal elements of sharp order <= k lie in the O-span of the output
    rng = random.Random(3)
    span = Echelon()
    for e in elems:
        for a in monomials_up_to(2, 4):
            span.add(_wrow(WeylElement.monomial(S2, a + (0, 0, 0)) * e))
    for _ in range(30):
        P = WeylElement.zero(S2)
        for g in gb.basis:
            budget = k - sharp_order(g)
            if budget < 0:
                continue
            for _ in range(2):
                m = [rng.randint(0, 1) for _ in range(2)] + [0, 0, 0]
                P = P + WeylElement.monomial(S2, tuple(m), rng.randint(-3, 3)) * g
        if not P.is_zero() and max(sum(m[:2]) for m in P.terms) <= 5:
            assert span.contains(_wrow(P))


def _wrow(P):
    return {tuple(-v for v in m): c for m, c in P.terms.items()}
