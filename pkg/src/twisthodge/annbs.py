"""Annihilators of ``f^(s+c)``, Euler fields and Bernstein-Sato polynomials."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .arith import RootList, UniPoly, as_rational, poly_from_linear_factors, rational_roots
from .groebner import (
    GBResult,
    buchberger,
    commutative_syzygies,
    eliminate,
    sharp_order_key,
)
from .linalg import solve_linear
from .polynomial import Poly, monomials_up_to
from .weyl import AlgebraSignature, WeylElement, act_on_fs, sharp_weight, shift_s


class InvalidAnnihilator(ValueError):
    """A supplied operator does not annihilate ``f^s``."""


class RootSanityError(ArithmeticError):
    """The computed b-function has roots that a true b-function cannot have."""


class NoEulerField(ValueError):
    """No Euler vector field with coefficients of the requested degree."""


class CertificateError(ArithmeticError):
    """A functional-equation certificate failed symbolic verification."""


def s_signature(n: int) -> AlgebraSignature:
    return AlgebraSignature(n, has_s=True)


def _check_nonconstant(f: Poly) -> None:
    if f.is_constant():
        raise ValueError("f must be non-constant")


# ---------------------------------------------------------------- annihilators

def ann_fs_order1(f: Poly, shift=0) -> list[WeylElement]:
    """Order-one operators ``sum a_i d_i - a_0 (s + shift)`` killing ``f^(s+shift)``."""
    _check_nonconstant(f)
    shift = as_rational(shift)
    n = f.n
    sig = s_signature(n)
    syz = commutative_syzygies([f.diff(i) for i in range(n)] + [-f])
    s_plus = WeylElement.s(sig) + shift
    out = []
    for rel in syz:
        op = WeylElement.zero(sig)
        for i in range(n):
            op = op + WeylElement.from_poly(sig, rel[i]) * WeylElement.d(sig, i)
        op = op - WeylElement.from_poly(sig, rel[n]) * s_plus
        if not act_on_fs(op, f, shift).is_zero():
            raise ArithmeticError("syzygy operator failed to annihilate f^(s+c)")
        out.append(_normalized(op))
    return out


def _normalized(P: WeylElement) -> WeylElement:
    from .groebner import _normalize_scalar, grlex_order

    lm = max(P.terms, key=grlex_order().key)
    return P.scale(_normalize_scalar(P.terms, lm))


def check_annihilates(gens: Sequence[WeylElement], f: Poly, shift=0) -> None:
    for g in gens:
        if not act_on_fs(g, f, shift).is_zero():
            raise InvalidAnnihilator(f"{g.to_str()} does not annihilate f^(s+{shift})")


def shift_annihilator(gens: Sequence[WeylElement], c) -> list[WeylElement]:
    """From generators killing ``f^s`` to generators killing ``f^(s+c)`` (s -> s + c)."""
    return [shift_s(g, as_rational(c)) for g in gens]


def ann_D(f: Poly, ann_gens: Sequence[WeylElement]) -> list[WeylElement]:
    """Generators of ``ann_D f^s``: eliminate s from the D[s]-annihilator."""
    sig = ann_gens[0].sig
    gb, free = eliminate(ann_gens, [sig.s_index])
    out = []
    plain = AlgebraSignature(sig.n)
    for i in free:
        g = gb.basis[i]
        out.append(WeylElement._raw(plain, {m[:2 * sig.n]: c for m, c in g.terms.items()}))
    return out


def symbol_ideal(ann_gens: Sequence[WeylElement]) -> list[WeylElement]:
    """Leading F#-symbols of a sharp-ordered Groebner basis (primality diagnostic)."""
    sig = ann_gens[0].sig
    gb = buchberger(ann_gens, sharp_order_key(sig))
    out = []
    for g in gb.basis:
        top = max(sharp_weight(sig, m) for m in g.terms)
        out.append(WeylElement._raw(sig, {m: c for m, c in g.terms.items() if sharp_weight(sig, m) == top}))
    return out


# ---------------------------------------------------------------- Euler fields

@dataclass(frozen=True)
class EulerField:
    coefficients: tuple[Poly, ...]

    def operator(self, sig: AlgebraSignature) -> WeylElement:
        op = WeylElement.zero(sig)
        for i, a in enumerate(self.coefficients):
            op = op + WeylElement.from_poly(sig, a) * WeylElement.d(sig, i)
        return op

    def apply(self, g: Poly) -> Poly:
        out = Poly.zero(g.n)
        for i, a in enumerate(self.coefficients):
            out = out + a * g.diff(i)
        return out


def euler_field(f: Poly, degree_bound: int) -> EulerField:
    """Solve ``sum a_i f_i = f`` with ``deg a_i <= degree_bound``."""
    _check_nonconstant(f)
    n = f.n
    fi = [f.diff(i) for i in range(n)]
    for bound in range(degree_bound + 1):
        monos = monomials_up_to(n, bound)
        # unknowns: (i, mono); diagonal x_i * d_i terms get the lowest indices
        unknowns = []
        for i in range(n):
            e = [0] * n
            e[i] = 1
            diag = tuple(e)
            if diag in monos:
                unknowns.append((i, diag))
        for i in range(n):
            for m in monos:
                if (i, m) not in unknowns:
                    unknowns.append((i, m))
        index = {u: j for j, u in enumerate(unknowns)}
        eqs: dict = {}
        for (i, m), j in index.items():
            for mm, c in fi[i].mul_monomial(m).terms.items():
                eqs.setdefault(mm, {})[j] = c
        rows = sorted(set(eqs) | set(f.terms))
        sol = solve_linear([eqs.get(r, {}) for r in rows], [f.terms.get(r, 0) for r in rows])
        if sol is None:
            continue
        coeffs = [dict() for _ in range(n)]
        for j, v in sol.items():
            i, m = unknowns[j]
            coeffs[i][m] = v
        E = EulerField(tuple(Poly(n, c) for c in coeffs))
        if E.apply(f) != f:
            raise ArithmeticError("Euler field solution failed verification")
        return E
    raise NoEulerField(f"no Euler field with coefficients of degree <= {degree_bound}")


# ---------------------------------------------------------------- b-functions

@dataclass(frozen=True)
class BSPolyData:
    """Monic b-function, its roots, and ``P`` with ``P f^(s+1) = b(s) f^s``."""

    b: UniPoly
    roots: RootList
    certificate: WeylElement
    ann_complete: bool = False


def s_part(P: WeylElement) -> UniPoly:
    sig = P.sig
    si = sig.s_index
    coeffs: dict[int, Fraction] = {}
    for m, c in P.terms.items():
        if any(v for k, v in enumerate(m) if k != si):
            raise ValueError("element is not a polynomial in s alone")
        coeffs[m[si]] = c
    deg = max(coeffs, default=-1)
    return UniPoly(tuple(coeffs.get(k, 0) for k in range(deg + 1)))


def bs_polynomial(f: Poly, ann_gens: Sequence[WeylElement] | None = None,
                  ann_complete: bool = False) -> BSPolyData:
    """Bernstein-Sato polynomial of ``f`` by eliminating x and d from ``ann + D[s] f``."""
    _check_nonconstant(f)
    n = f.n
    sig = s_signature(n)
    if ann_gens is None:
        ann_gens = ann_fs_order1(f, 0)
    else:
        check_annihilates(ann_gens, f, 0)
    gens = list(ann_gens) + [WeylElement.from_poly(sig, f)]
    fidx = len(gens) - 1
    gb, free = eliminate(gens, list(range(2 * n)), track=[fidx])
    if len(free) != 1:
        raise RootSanityError("elimination ideal in Q[s] is zero; annihilator too small")
    i = free[0]
    b_raw = s_part(gb.basis[i])
    lc = b_raw.lc
    b = b_raw.monic()
    cof = gb.cofactors[i].get(fidx, WeylElement.zero(sig))
    # b_raw = sum(cof_j * gen_j); applied to f^s only the f-term survives
    P = cof.scale(1 / lc)
    verify_certificate(P, f, b)
    roots = rational_roots(b)
    _root_sanity(roots, n)
    return BSPolyData(b, roots, P, ann_complete)


def verify_certificate(P: WeylElement, f: Poly, b: UniPoly) -> None:
    lhs = act_on_fs(P, f, 1)
    n = f.n
    target = Poly(n + 1, {(0,) * n + (k,): c for k, c in enumerate(b.coeffs)})
    if not (lhs.pole == 1 and lhs.numerator == target) and not (b.is_zero() and lhs.is_zero()):
        raise CertificateError("functional equation certificate does not verify")


def _root_sanity(roots: RootList, n: int) -> None:
    if roots.cofactor.degree > 0:
        raise RootSanityError("b-function has irrational roots; annihilator likely incomplete")
    if roots.multiplicity(Fraction(-1)) == 0:
        raise RootSanityError("-1 is not a root of the computed b-function")
    for r in roots.roots():
        if not (-n <= r < 0):
            raise RootSanityError(f"root {r} outside [-{n}, 0)")


def beta_polynomial(bs: BSPolyData, alpha) -> UniPoly:
    """Product of ``(s + lam + 1)^l`` over roots ``lam`` in the open interval (-alpha-1, -alpha)."""
    alpha = as_rational(alpha)
    entries = [(r + 1, m) for r, m in bs.roots.entries if -alpha - 1 < r < -alpha]
    return poly_from_linear_factors(entries)


@dataclass(frozen=True)
class WindowVerdict:
    passed: bool
    offending: tuple[Fraction, ...] = ()


def root_window_check(bs: BSPolyData, alpha) -> WindowVerdict:
    """Pass iff every root lies in the open interval (-2-alpha, -alpha)."""
    alpha = as_rational(alpha)
    bad = tuple(r for r in bs.roots.roots() if not (-2 - alpha < r < -alpha))
    return WindowVerdict(not bad, bad)
