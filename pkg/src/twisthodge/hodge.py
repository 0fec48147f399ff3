"""The ideal Gamma and the Hodge filtration steps it produces.

Gamma lives in D[s] and is generated by ``f``, ``beta(-s)`` and the
annihilator of ``f^(s-1)``.  Intersecting with the total order filtration,
substituting ``s = -alpha`` and applying the result to ``f^(-1-alpha)`` gives
the filtration step as an O-module of twisted fractions.

O-modules are compared through :class:`CanonicalForm`: all generators are
put over a common pole, the numerator ideal gets a reduced Groebner basis, and
its part of degree <= D is written as an echelon basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .annbs import (
    BSPolyData,
    EulerField,
    ann_fs_order1,
    beta_polynomial,
    root_window_check,
    s_signature,
    shift_annihilator,
)
from .arith import as_rational
from .groebner import (
    GBResult,
    buchberger,
    _normalize_scalar,
    commutative_gb,
    commutative_normal_form,
    eliminate,
    filtration_intersect,
    grlex_order,
    sharp_order_key,
)
from .linalg import Echelon
from .polynomial import Poly, grlex_key, monomials_up_to
from .weyl import (
    AlgebraSignature,
    FractionElement,
    WeylElement,
    act_on_fraction,
    diff_order,
    specialize_s,
    x_part,
)


class WindowFailure(ValueError):
    """A b-function root lies outside (-2-alpha, -alpha)."""

    def __init__(self, offending):
        self.offending = tuple(offending)
        super().__init__("roots outside the window: " + ", ".join(str(r) for r in self.offending))


class MissingHypothesis(ValueError):
    """A filtration step k >= 1 was requested without the needed hypotheses."""


@dataclass(frozen=True)
class Hypotheses:
    window_passed: bool
    euler_field: EulerField | None = None
    parametrically_prime: bool = False
    ann_complete: bool = False


@dataclass
class GammaIdeal:
    f: Poly
    alpha: Fraction
    f_gen: WeylElement
    beta_gen: WeylElement
    ann_gens: list[WeylElement]
    basis: GBResult
    hypotheses: Hypotheses
    twisted: bool = False

    @property
    def components(self) -> list[WeylElement]:
        return [self.f_gen, self.beta_gen] + list(self.ann_gens)

    @property
    def s_value(self) -> Fraction:
        """The value substituted for s when passing to operators on f^(-1-alpha)."""
        return Fraction(0) if self.twisted else -self.alpha


def build_gamma(
    f: Poly,
    alpha,
    bs: BSPolyData,
    ann_gens: Sequence[WeylElement] | None = None,
    hypotheses: Hypotheses | None = None,
) -> GammaIdeal:
    """Gamma = D[s] f + D[s] beta(-s) + ann f^(s-1), with a sharp-ordered basis.

    ``ann_gens`` annihilate ``f^s``; they are shifted to ``f^(s-1)`` here.
    """
    alpha = as_rational(alpha)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    verdict = root_window_check(bs, alpha)
    if not verdict.passed:
        raise WindowFailure(verdict.offending)
    sig = s_signature(f.n)
    if ann_gens is None:
        ann_gens = ann_fs_order1(f, 0)
    shifted = shift_annihilator(ann_gens, -1)
    beta = beta_polynomial(bs, alpha)
    f_gen = WeylElement.from_poly(sig, f)
    beta_gen = WeylElement.from_unipoly_s(sig, beta, -1, 0)
    gens = [f_gen, beta_gen] + shifted
    gb = buchberger(gens, sharp_order_key(sig))
    hyp = hypotheses or Hypotheses(window_passed=True, ann_complete=bs.ann_complete)
    return GammaIdeal(f, alpha, f_gen, beta_gen, shifted, gb, hyp)


def build_gamma_twisted(
    f: Poly,
    alpha,
    bs: BSPolyData,
    ann_gens: Sequence[WeylElement] | None = None,
    hypotheses: Hypotheses | None = None,
) -> GammaIdeal:
    """The variant with ``beta(-s+alpha)`` and ``ann f^(s-1-alpha)``, read at s = 0."""
    alpha = as_rational(alpha)
    verdict = root_window_check(bs, alpha)
    if not verdict.passed:
        raise WindowFailure(verdict.offending)
    sig = s_signature(f.n)
    if ann_gens is None:
        shifted = ann_fs_order1(f, -1 - alpha)
    else:
        shifted = shift_annihilator(ann_gens, -1 - alpha)
    beta = beta_polynomial(bs, alpha)
    f_gen = WeylElement.from_poly(sig, f)
    beta_gen = WeylElement.from_unipoly_s(sig, beta, -1, alpha)
    gens = [f_gen, beta_gen] + shifted
    gb = buchberger(gens, sharp_order_key(sig))
    hyp = hypotheses or Hypotheses(window_passed=True, ann_complete=bs.ann_complete)
    return GammaIdeal(f, alpha, f_gen, beta_gen, shifted, gb, hyp, twisted=True)


def hodge_ideal_zero(gamma: GammaIdeal) -> list[Poly]:
    """Reduced Groebner basis of ``Gamma cap O`` (eliminating all d's and s)."""
    sig = gamma.basis.basis[0].sig
    block = list(range(sig.n, 2 * sig.n)) + [sig.s_index]
    gb, free = eliminate(gamma.components, block)
    return commutative_gb([x_part(_drop_s(gb.basis[i])) for i in free])


def _drop_s(P: WeylElement) -> WeylElement:
    return specialize_s(P, 0)


# ---------------------------------------------------------------- canonical forms

@dataclass(frozen=True)
class CanonicalForm:
    """O-module ``J * f^(-pole) * f^(-twist)`` truncated at numerator degree <= bound."""

    pole: int
    twist: Fraction
    ideal: tuple[Poly, ...]
    degree_bound: int
    rows: tuple[tuple[tuple[tuple, Fraction], ...], ...]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CanonicalForm):
            return NotImplemented
        return (self.pole, self.twist, self.degree_bound, self.rows) == (
            other.pole, other.twist, other.degree_bound, other.rows)

    def __hash__(self) -> int:
        return hash((self.pole, self.twist, self.degree_bound, self.rows))

    def dimension(self) -> int:
        return len(self.rows)

    def contains(self, other: "CanonicalForm") -> bool:
        """Span inclusion ``other <= self``; both must share pole and bound."""
        if (self.pole, self.twist, self.degree_bound) != (other.pole, other.twist, other.degree_bound):
            raise ValueError("canonical forms are not comparable")
        ech = Echelon()
        for r in self.rows:
            ech.add(_row_dict(r))
        return all(ech.contains(_row_dict(r)) for r in other.rows)


def _row_dict(r) -> dict:
    return {grlex_rank(m): c for m, c in r}


def grlex_rank(m: tuple) -> tuple:
    # pivot priority: higher grlex monomials first
    return (-sum(m),) + tuple(-v for v in m)


def echelon_rows(polys: Sequence[Poly]) -> tuple:
    """Reduced echelon rows of the linear span of ``polys``, highest grlex monomial as pivot."""
    ech = Echelon()
    for p in polys:
        ech.add({grlex_rank(m): c for m, c in p.terms.items()})
    rows = []
    for r in ech.rref():
        items = [(tuple(-v for v in key[1:]), c) for key, c in r.items()]
        items.sort(key=lambda mc: grlex_key(mc[0]), reverse=True)
        rows.append(tuple(items))
    return tuple(rows)


def truncated_echelon(ideal: Sequence[Poly], n: int, degree_bound: int) -> tuple:
    """Echelon basis of ``ideal cap {deg <= bound}`` from a grlex Groebner basis."""
    polys = []
    for g in ideal:
        dg = g.degree()
        if dg > degree_bound:
            continue
        for a in monomials_up_to(n, degree_bound - dg):
            polys.append(g.mul_monomial(a))
    return echelon_rows(polys)


def canonical_module_form(gens: Sequence[FractionElement], pole_level: int | None,
                          degree_bound: int, f: Poly | None = None, twist=None) -> CanonicalForm:
    """Canonical description of the O-module generated by ``gens``."""
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        if f is None:
            raise ValueError("need the context polynomial for an empty generator set")
        return CanonicalForm(pole_level or 0, as_rational(twist or 0), (), degree_bound, ())
    twists = {g.twist for g in gens}
    if len(twists) != 1:
        raise ValueError("generators have different twists")
    f = gens[0].f
    top = max(g.pole for g in gens)
    if pole_level is None:
        pole_level = top
    elif top > pole_level:
        raise ValueError(f"pole {top} exceeds level {pole_level}")
    nums = [g.lift_to(pole_level) for g in gens]
    ideal = tuple(commutative_gb(nums))
    rows = truncated_echelon(ideal, f.n, degree_bound)
    return CanonicalForm(pole_level, twists.pop(), ideal, degree_bound, rows)


def span_form(numerators: Sequence[Poly], pole: int, twist, degree_bound: int) -> CanonicalForm:
    """Vector-space echelon form of given numerators (no O-closure), degree > bound dropped."""
    rows = echelon_rows([p for p in numerators if p.degree() <= degree_bound])
    return CanonicalForm(pole, as_rational(twist), (), degree_bound, rows)


# ---------------------------------------------------------------- filtration steps

@dataclass
class HodgeStep:
    k: int
    operator_gens: list[WeylElement]
    fraction_gens: list[FractionElement]
    numerator_ideal: list[Poly]
    alpha: Fraction
    f: Poly
    hypotheses: Hypotheses
    meta: dict = field(default_factory=dict)

    def canonical(self, degree_bound: int) -> CanonicalForm:
        return canonical_module_form(self.fraction_gens, self.k + 1, degree_bound)


def hodge_step(gamma: GammaIdeal, k: int) -> HodgeStep:
    """Generators of the k-th Hodge filtration step as operators and fractions."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    hyp = gamma.hypotheses
    if k >= 1:
        if hyp.euler_field is None:
            raise MissingHypothesis("an Euler vector field is required for k >= 1")
        if not hyp.parametrically_prime:
            raise MissingHypothesis("parametric primality must be asserted for k >= 1")
    elems = filtration_intersect(gamma.basis, k)
    unit = FractionElement.unit(gamma.f, gamma.alpha)
    order = grlex_order().key
    candidates: dict[WeylElement, None] = {}
    for e in elems:
        op = specialize_s(e, gamma.s_value)
        if op.is_zero():
            continue
        if diff_order(op) > k:
            raise ArithmeticError("operator exceeds the requested order")
        op = op.scale(_normalize_scalar(op.terms, max(op.terms, key=order)))
        candidates.setdefault(op, None)
    # keep a minimal O-generating subset, smallest operators first
    ops: list[WeylElement] = []
    fracs: list[FractionElement] = []
    nums: list[Poly] = []
    gb: list[Poly] = []
    for op in sorted(candidates, key=lambda P: order(max(P.terms, key=order))):
        u = act_on_fraction(op, unit)
        if u.is_zero():
            continue
        num = u.lift_to(k + 1)
        if gb and commutative_normal_form(num, gb).is_zero():
            continue
        ops.append(op)
        fracs.append(u)
        nums.append(num)
        gb = commutative_gb(nums)
    return HodgeStep(k, ops, fracs, gb, gamma.alpha, gamma.f, hyp,
                     meta={"intersection_size": len(elems), "candidates": len(candidates)})
