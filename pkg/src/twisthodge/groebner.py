"""Left Groebner bases in the Weyl algebra, plus commutative and module variants.

One Buchberger core drives all three settings; a small ring adaptor supplies
monomial multiplication, divisibility and lcm.  Only admissible orders whose
leading monomial of ``m * g`` is ``m + lm(g)`` are supported, which holds for
every order built here (each refines a grading that drops on commutator terms).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .polynomial import Poly, grlex_key
from .weyl import (
    AlgebraSignature,
    WeylElement,
    _mono_left_terms,
    sharp_weight,
)


class GBBudgetExceeded(RuntimeError):
    """Raised when Buchberger runs past its pair budget."""


# ---------------------------------------------------------------- orders

@dataclass(frozen=True)
class MonomialOrder:
    name: str
    key: Callable = field(compare=False)

    def __call__(self, m):
        return self.key(m)


def grlex_order() -> MonomialOrder:
    return MonomialOrder("grlex", grlex_key)


def sharp_order_key(sig: AlgebraSignature) -> MonomialOrder:
    """Refines total order (|d-degree| + s-degree) by total degree, then lex."""

    def key(m):
        return (sharp_weight(sig, m), sum(m), m)

    return MonomialOrder("sharp", key)


def f_order_key(sig: AlgebraSignature) -> MonomialOrder:
    """Order filtration on D_{X x C}: d's and dt weigh 1, the rest 0."""
    n = sig.n

    def key(m):
        w = sum(m[n:2 * n]) + (m[sig.dt_index] if sig.has_t else 0)
        return (w, sum(m), m)

    return MonomialOrder("F", key)


def elimination_order(block: Sequence[int]) -> MonomialOrder:
    """Block order: variables in ``block`` are eliminated first."""
    blk = tuple(sorted(block))

    def key(m):
        return (sum(m[i] for i in blk), sum(m), m)

    return MonomialOrder(f"elim{blk}", key)


# ---------------------------------------------------------------- ring adaptors

class _WeylRing:
    def __init__(self, sig: AlgebraSignature):
        self.sig = sig

    def mul(self, q, c, terms):
        return _mono_left_terms(self.sig, q, c, terms)

    @staticmethod
    def divides(a, b):
        return all(x <= y for x, y in zip(a, b))

    @staticmethod
    def quotient(L, a):
        return tuple(x - y for x, y in zip(L, a))

    @staticmethod
    def lcm(a, b):
        return tuple(max(x, y) for x, y in zip(a, b))

    @staticmethod
    def one(size):
        return (0,) * size


class _CommRing(_WeylRing):
    def __init__(self, n: int):
        self.n = n

    def mul(self, q, c, terms):
        return {tuple(a + b for a, b in zip(q, m)): c * v for m, v in terms.items()}


class _ModuleRing:
    """Free module over Q[x]; monomials are ``(component, exps)``."""

    def __init__(self, n: int):
        self.n = n

    def mul(self, q, c, terms):
        return {(i, tuple(a + b for a, b in zip(q, m))): c * v for (i, m), v in terms.items()}

    @staticmethod
    def divides(a, b):
        return a[0] == b[0] and all(x <= y for x, y in zip(a[1], b[1]))

    @staticmethod
    def quotient(L, a):
        return tuple(x - y for x, y in zip(L[1], a[1]))

    @staticmethod
    def lcm(a, b):
        if a[0] != b[0]:
            return None
        return (a[0], tuple(max(x, y) for x, y in zip(a[1], b[1])))


def _axpy(target: dict, c, src: dict) -> None:
    for m, v in src.items():
        nv = target.get(m, 0) + c * v
        if nv:
            target[m] = nv
        else:
            target.pop(m, None)


# ---------------------------------------------------------------- core

class _Elem:
    __slots__ = ("terms", "cof", "lm", "lc")

    def __init__(self, terms, cof, key):
        self.terms = terms
        self.cof = cof
        self.lm = max(terms, key=key)
        self.lc = terms[self.lm]


def _mul_cof(ring, q, c, cof):
    return {j: ring.mul(q, c, t) for j, t in cof.items()}


def _reduce(terms: dict, cof: dict | None, basis: list, ring, key, full: bool):
    """Left-reduce ``terms`` in place against ``basis``; returns (terms, cof)."""
    done: dict = {}
    while terms:
        m = max(terms, key=key)
        c = terms[m]
        g = None
        for b in basis:
            if ring.divides(b.lm, m):
                g = b
                break
        if g is None:
            if not full:
                break
            done[m] = c
            del terms[m]
            continue
        q = ring.quotient(m, g.lm)
        coef = -c / g.lc
        _axpy(terms, 1, ring.mul(q, coef, g.terms))
        terms.pop(m, None)  # guard against rounding-free but order-equal leftovers
        if cof is not None:
            for j, t in g.cof.items():
                _axpy(cof.setdefault(j, {}), 1, ring.mul(q, coef, t))
    if full:
        terms.update(done)
    return terms, cof


def _buchberger(gens: list[dict], ring, key, track: set | None, max_pairs: int | None):
    basis: list[_Elem] = []
    pairs: list[tuple] = []  # (lcm, i, j)

    def add(elem: _Elem):
        h = len(basis)
        basis.append(elem)
        # Gebauer-Moeller chain criterion on existing pairs
        keep = []
        for L, i, j in pairs:
            if ring.divides(elem.lm, L):
                Li = ring.lcm(basis[i].lm, elem.lm)
                Lj = ring.lcm(basis[j].lm, elem.lm)
                if Li != L and Lj != L:
                    continue
            keep.append((L, i, j))
        pairs[:] = keep
        new = []
        for i in range(h):
            L = ring.lcm(basis[i].lm, elem.lm)
            if L is not None:
                new.append((L, i, h))
        # drop new pairs whose lcm is a proper multiple of another new lcm
        lcms = [L for L, _, _ in new]
        for L, i, j in new:
            if any(M != L and ring.divides(M, L) for M in lcms):
                continue
            pairs.append((L, i, j))

    for idx, g in enumerate(gens):
        if not g:
            continue
        cof = None
        if track is not None:
            cof = {idx: {ring_one(ring, g): Fraction(1)}} if idx in track else {}
        terms, cof = _reduce(dict(g), cof, basis, ring, key, full=False)
        if terms:
            add(_Elem(terms, cof, key))

    seen_pairs = 0
    while pairs:
        pairs.sort(key=lambda p: key(p[0]))
        L, i, j = pairs.pop(0)
        seen_pairs += 1
        if max_pairs is not None and seen_pairs > max_pairs:
            raise GBBudgetExceeded(f"more than {max_pairs} S-pairs")
        gi, gj = basis[i], basis[j]
        qi = ring.quotient(L, gi.lm)
        qj = ring.quotient(L, gj.lm)
        terms = ring.mul(qi, 1 / gi.lc, gi.terms)
        _axpy(terms, 1, ring.mul(qj, -1 / gj.lc, gj.terms))
        cof = None
        if track is not None:
            cof = _mul_cof(ring, qi, 1 / gi.lc, gi.cof)
            for k, t in gj.cof.items():
                _axpy(cof.setdefault(k, {}), 1, ring.mul(qj, -1 / gj.lc, t))
        terms, cof = _reduce(terms, cof, basis, ring, key, full=False)
        if terms:
            add(_Elem(terms, cof, key))
    return basis


def ring_one(ring, g: dict):
    m = next(iter(g))
    if isinstance(ring, _ModuleRing):
        raise ValueError("cofactor tracking is not available for modules")
    return (0,) * len(m)


def _reduced(basis: list[_Elem], ring, key) -> list[_Elem]:
    # minimize
    basis = sorted(basis, key=lambda e: key(e.lm))
    minimal: list[_Elem] = []
    for e in basis:
        if not any(ring.divides(o.lm, e.lm) for o in minimal):
            minimal.append(e)
    # inter-reduce
    out = []
    for idx, e in enumerate(minimal):
        others = minimal[:idx] + minimal[idx + 1:]
        lead = {e.lm: e.lc}
        tail = {m: c for m, c in e.terms.items() if m != e.lm}
        cof = None if e.cof is None else {j: dict(t) for j, t in e.cof.items()}
        tail, cof = _reduce(tail, cof, others, ring, key, full=True)
        tail.update(lead)
        out.append((tail, cof))
    return [_Elem(t, c, key) for t, c in out]


def _normalize_scalar(terms: dict, lm) -> Fraction:
    """Scalar making coefficients coprime integers with positive leading coefficient."""
    from math import gcd, lcm

    den = lcm(*(c.denominator for c in terms.values()))
    num = 0
    for c in terms.values():
        num = gcd(num, int(c * den))
    s = Fraction(den, num)
    if terms[lm] < 0:
        s = -s
    return s


# ---------------------------------------------------------------- Weyl API

@dataclass
class GBResult:
    """Reduced, content-normalized left Groebner basis.

    ``cofactors[i][j]`` is the coefficient of generator ``j`` in ``basis[i]``
    (only for tracked generators).
    """

    basis: list[WeylElement]
    order: MonomialOrder
    cofactors: list[dict[int, WeylElement]] | None = None
    complete_cofactors: bool = False

    def leading_monomials(self) -> list[tuple]:
        return [max(g.terms, key=self.order.key) for g in self.basis]

    def normal_form(self, P: WeylElement) -> WeylElement:
        return normal_form(P, self)

    def contains(self, P: WeylElement) -> bool:
        return normal_form(P, self).is_zero()

    def is_unit(self) -> bool:
        return any(all(v == 0 for v in m) for m in self.leading_monomials())


def buchberger(
    gens: Iterable[WeylElement],
    order: MonomialOrder,
    track: Iterable[int] | bool = False,
    max_pairs: int | None = None,
) -> GBResult:
    """Reduced left Groebner basis of ``D * gens`` under ``order``."""
    gens = list(gens)
    if not gens:
        raise ValueError("no generators")
    sig = gens[0].sig
    if any(g.sig != sig for g in gens):
        raise ValueError("generators live in different algebras")
    ring = _WeylRing(sig)
    if track is True:
        tr = set(range(len(gens)))
    elif track is False:
        tr = None
    else:
        tr = set(track)
    basis = _buchberger([dict(g.terms) for g in gens], ring, order.key, tr, max_pairs)
    basis = _reduced(basis, ring, order.key)
    basis.sort(key=lambda e: order.key(e.lm))
    out, cofs = [], [] if tr is not None else None
    for e in basis:
        s = _normalize_scalar(e.terms, e.lm)
        out.append(WeylElement._raw(sig, {m: c * s for m, c in e.terms.items()}))
        if cofs is not None:
            cofs.append(
                {j: WeylElement._raw(sig, {m: c * s for m, c in t.items()}) for j, t in e.cof.items() if t}
            )
    return GBResult(out, order, cofs, tr is not None and len(tr) == len(gens))


def normal_form(P: WeylElement, gb: GBResult) -> WeylElement:
    """Fully reduced remainder of ``P`` modulo the left ideal of ``gb``."""
    ring = _WeylRing(P.sig)
    key = gb.order.key
    basis = [_Elem(dict(g.terms), None, key) for g in gb.basis]
    terms, _ = _reduce(dict(P.terms), None, basis, ring, key, full=True)
    return WeylElement._raw(P.sig, terms)


def left_division(P: WeylElement, gb: GBResult) -> tuple[list[WeylElement], WeylElement]:
    """Quotients ``Q`` and remainder ``r`` with ``P = sum Q_i * g_i + r``."""
    sig = P.sig
    ring = _WeylRing(sig)
    key = gb.order.key
    basis = []
    for i, g in enumerate(gb.basis):
        e = _Elem(dict(g.terms), {i: {(0,) * sig.size: Fraction(1)}}, key)
        basis.append(e)
    cof: dict = {}
    terms, cof = _reduce(dict(P.terms), cof, basis, ring, key, full=True)
    quots = [WeylElement._raw(sig, {m: -c for m, c in cof.get(i, {}).items()}) for i in range(len(basis))]
    return quots, WeylElement._raw(sig, terms)


def normal_form_with_certificate(P: WeylElement, gb: GBResult):
    """Remainder and certificate of the reduction of ``P``.

    The certificate is a dict ``j -> Q_j`` with ``P = sum Q_j * gens[j] + r``
    in terms of the original generators when ``gb`` tracked all of them,
    otherwise in terms of the basis elements themselves (keys ``("gb", i)``).
    """
    quots, r = left_division(P, gb)
    if not gb.complete_cofactors:
        return r, {("gb", i): q for i, q in enumerate(quots) if not q.is_zero()}
    cert: dict = {}
    for q, cof in zip(quots, gb.cofactors):
        if q.is_zero():
            continue
        for j, c in cof.items():
            cert[j] = cert[j] + q * c if j in cert else q * c
    return r, {j: c for j, c in cert.items() if not c.is_zero()}


def eliminate(gens: Iterable[WeylElement], block: Sequence[int], track=False,
              max_pairs: int | None = None,
              back_block: Sequence[int] | None = None) -> tuple[GBResult, list[int]]:
    """Groebner basis under a block order eliminating ``block`` (the front block).

    Returns the basis and the indices of basis elements free of the block;
    those generate the intersection with the subalgebra of the back block.
    When given, ``back_block`` must complete ``block`` to a partition.
    """
    gens = list(gens)
    if back_block is not None:
        size = gens[0].sig.size
        front, back = set(block), set(back_block)
        if front & back or front | back != set(range(size)):
            raise ValueError("blocks must partition the variables")
    gb = buchberger(gens, elimination_order(block), track=track, max_pairs=max_pairs)
    free = [i for i, g in enumerate(gb.basis) if all(m[j] == 0 for m in g.terms for j in block)]
    return gb, free


def filtration_intersect(gb: GBResult, k: int) -> list[WeylElement]:
    """Generators over Q[x] of ``I cap F#_k`` for a sharp-ordered Groebner basis.

    Elements ``d^b s^c * g`` with ``|b| + c + ord(g) <= k`` span the piece.
    """
    if not gb.order.name.startswith("sharp"):
        raise ValueError("filtration_intersect needs a sharp-ordered basis")
    out = []
    for g in gb.basis:
        sig = g.sig
        o = max(sharp_weight(sig, m) for m in g.terms)
        room = k - o
        if room < 0:
            continue
        for mult in _sharp_multipliers(sig, room):
            out.append(g.mono_left(mult, Fraction(1)))
    return out


def _sharp_multipliers(sig: AlgebraSignature, budget: int) -> list[tuple]:
    """Monomials ``d^b s^c`` with ``|b| + c <= budget``."""
    n = sig.n
    slots = list(range(n, 2 * n)) + ([sig.s_index] if sig.has_s else [])
    out = []

    def rec(pos, left, e):
        if pos == len(slots):
            out.append(tuple(e))
            return
        for v in range(left + 1):
            e[slots[pos]] = v
            rec(pos + 1, left - v, e)
        e[slots[pos]] = 0

    rec(0, budget, [0] * sig.size)
    return out


# ---------------------------------------------------------------- commutative

def commutative_gb(gens: Iterable[Poly], key=grlex_key) -> list[Poly]:
    """Reduced, content-normalized Groebner basis of a polynomial ideal."""
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        return []
    n = gens[0].n
    ring = _CommRing(n)
    basis = _buchberger([dict(g.terms) for g in gens], ring, key, None, None)
    basis = _reduced(basis, ring, key)
    basis.sort(key=lambda e: key(e.lm))
    return [Poly(n, e.terms).content_normalized() for e in basis]


def commutative_normal_form(p: Poly, gb: Sequence[Poly], key=grlex_key) -> Poly:
    ring = _CommRing(p.n)
    basis = [_Elem(dict(g.terms), None, key) for g in gb if not g.is_zero()]
    terms, _ = _reduce(dict(p.terms), None, basis, ring, key, full=True)
    return Poly._raw(p.n, terms)


def commutative_syzygies(polys: Sequence[Poly]) -> list[list[Poly]]:
    """Generators of ``{(a_i) : sum a_i p_i = 0}`` via the tagged-module trick."""
    r = len(polys)
    n = polys[0].n
    ring = _ModuleRing(n)

    # position over term; component 0 carries the value, 1..r the tags
    def key(mm):
        comp, m = mm
        return (-comp, sum(m), m)

    rows = []
    one = (0,) * n
    for i, p in enumerate(polys):
        terms = {(0, m): c for m, c in p.terms.items()}
        terms[(i + 1, one)] = Fraction(1)
        rows.append(terms)
    basis = _buchberger(rows, ring, key, None, None)
    basis = _reduced(basis, ring, key)
    out = []
    for e in basis:
        if any(comp == 0 for comp, _ in e.terms):
            continue
        vec = [dict() for _ in range(r)]
        for (comp, m), c in e.terms.items():
            vec[comp - 1][m] = c
        out.append([Poly(n, v) for v in vec])
    out.sort(key=_vec_key)
    return _minimize_module(out, n)


def _vec_key(v):
    return [grlex_key(max(p.terms, key=grlex_key)) if p.terms else (-1,) for p in v]


def _module_terms(v: Sequence[Poly]) -> dict:
    return {(i, m): c for i, p in enumerate(v) for m, c in p.terms.items()}


def _minimize_module(vecs: list[list[Poly]], n: int) -> list[list[Poly]]:
    """Drop generators lying in the submodule spanned by the others."""
    ring = _ModuleRing(n)

    def key(mm):
        comp, m = mm
        return (-comp, sum(m), m)

    keep = list(vecs)
    # try to remove the largest generators first
    for v in sorted(vecs, key=_vec_key, reverse=True):
        rest = [w for w in keep if w is not v]
        if not rest:
            continue
        basis = _buchberger([_module_terms(w) for w in rest], ring, key, None, None)
        terms, _ = _reduce(_module_terms(v), None, basis, ring, key, full=True)
        if not terms:
            keep = rest
    return keep
