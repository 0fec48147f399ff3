"""Shared fixtures and seeded generators for the test-suite."""
from __future__ import annotations

import random
from fractions import Fraction

from twisthodge.polynomial import Poly
from twisthodge.weyl import AlgebraSignature, WeylElement

X = Poly(1, {(1,): 1})
NODE = Poly(2, {(2, 0): 1, (0, 2): 1})
CUSP = Poly(2, {(2, 0): 1, (0, 3): 1})
QUADRIC = Poly(4, {(2, 0, 0, 0): 1, (0, 2, 0, 0): 1, (0, 0, 2, 0): 1, (0, 0, 0, 2): 1})

# fixtures of the cross-route and twisted-route criteria: (name, f, alphas)
HODGE_FIXTURES = [
    ("x", X, (Fraction(0), Fraction(1, 2))),
    ("node", NODE, (Fraction(0), Fraction(1, 2))),
    ("cusp", CUSP, (Fraction(0), Fraction(1, 6))),
]


def rand_rational(rng: random.Random, span: int = 5) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, 4))


def rand_nonzero_rational(rng: random.Random, span: int = 5) -> Fraction:
    while True:
        q = rand_rational(rng, span)
        if q:
            return q


def rand_weyl(rng: random.Random, sig: AlgebraSignature, max_exp: int = 3, max_terms: int = 3) -> WeylElement:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        m = tuple(rng.randint(0, max_exp) for _ in range(sig.size))
        terms[m] = rand_nonzero_rational(rng)
    return WeylElement(sig, terms)


def rand_nonzero_weyl(rng: random.Random, sig: AlgebraSignature, **kw) -> WeylElement:
    while True:
        P = rand_weyl(rng, sig, **kw)
        if not P.is_zero():
            return P


def rand_poly(rng: random.Random, n: int, max_deg: int = 4, max_terms: int = 5) -> Poly:
    terms = {}
    for _ in range(rng.randint(0, max_terms)):
        m = [0] * n
        for _ in range(rng.randint(0, max_deg)):
            m[rng.randrange(n)] += 1
        terms[tuple(m)] = rand_rational(rng)
    return Poly(n, terms)


def apply_to_poly(P: WeylElement, g: Poly) -> Poly:
    """Faithful action of a plain Weyl element on polynomials: x^a d^b g."""
    sig = P.sig
    n = sig.n
    out = Poly.zero(n)
    for m, c in P.terms.items():
        h = g
        for j in range(n):
            for _ in range(m[n + j]):
                h = h.diff(j)
        out = out + h.mul_monomial(m[:n], c)
    return out
