"""Truncated linear-algebra model of the graph module, used to cross-check the main pipeline.

Elements of the graph module are finite sums ``sum_i u_i dt^i`` with ``u_i``
twisted fractions.  For a weighted-homogeneous ``f`` (weights ``w`` with
``w``-degree of ``f`` equal to 1) the module is graded:

    weight(g * f^-p * f^-alpha * dt^i) = w.deg(g) - p - alpha - i

and every operator used here is homogeneous, so spans are computed one weight
piece at a time.  Inside a piece, elements are written over the common pole
``budget.m`` and become finite coordinate vectors.

Every statement produced here is "at budget": spans are under-approximations,
so a pass is only reported when two consecutive budgets agree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .annbs import (
    BSPolyData,
    EulerField,
    ann_D,
    ann_fs_order1,
    beta_polynomial,
    bs_polynomial,
    euler_field,
    root_window_check,
)
from .arith import UniPoly, as_rational, fmt_rational
from .groebner import buchberger, grlex_order, normal_form
from .hodge import CanonicalForm, echelon_rows, grlex_rank
from .linalg import Echelon, kernel, solve_linear
from .polynomial import Poly, grlex_key, monomials_of_weight, monomials_up_to
from .weyl import AlgebraSignature, FractionElement, WeylElement, act_on_fraction


class OracleUnsupported(ValueError):
    """The oracle needs a quasi-homogeneous f with positive weights."""


# ---------------------------------------------------------------- budgets

@dataclass(frozen=True)
class TruncationBudget:
    """``e`` bounds |b| + c of multipliers, ``d`` the x-degree window, ``m`` the pole."""

    e: int
    d: int
    m: int

    def __post_init__(self):
        if min(self.e, self.d, self.m) < 0:
            raise ValueError("budget entries must be nonnegative")

    def bump(self) -> "TruncationBudget":
        return TruncationBudget(self.e + 1, self.d + 1, self.m + 1)

    def scaled(self, factor: int) -> "TruncationBudget":
        return TruncationBudget(self.e * factor, self.d * factor, self.m * factor)


DEFAULT_BUDGET = TruncationBudget(4, 8, 6)


# ---------------------------------------------------------------- weights

def find_weights(f: Poly) -> tuple[Fraction, ...]:
    """Positive weights making ``f`` homogeneous of degree 1."""
    n = f.n
    monos = sorted(f.terms)
    sol = solve_linear([{i: Fraction(m[i]) for i in range(n) if m[i]} for m in monos], [1] * len(monos))
    if sol is None:
        raise OracleUnsupported("f is not quasi-homogeneous")
    w = tuple(sol.get(i, Fraction(0)) for i in range(n))
    # free weights were set to zero; a variable absent from f gets weight 1/2 is not
    # allowed since f must involve every variable for the grading to be positive
    if any(v <= 0 for v in w) or any(sum(a * b for a, b in zip(w, m)) != 1 for m in monos):
        raise OracleUnsupported("f has no positive weight vector")
    return w


def wdeg(w: Sequence[Fraction], m: Sequence[int]) -> Fraction:
    return sum((a * b for a, b in zip(w, m)), Fraction(0))


# ---------------------------------------------------------------- fractions

def _frac_d(u: FractionElement, j: int, fj: Poly) -> FractionElement:
    g = u.numerator
    return FractionElement(g.diff(j) * u.f - g * fj * (u.pole + u.twist), u.pole + 1, u.twist, u.f)


def _frac_mul(u: FractionElement, g: Poly) -> FractionElement:
    return FractionElement(u.numerator * g, u.pole, u.twist, u.f)


def _frac_mul_f(u: FractionElement) -> FractionElement:
    if u.pole > 0:
        return FractionElement(u.numerator, u.pole - 1, u.twist, u.f)
    return FractionElement(u.numerator * u.f, 0, u.twist, u.f)


# ---------------------------------------------------------------- graph module

class GraphElement:
    """``sum_i parts[i] * dt^i`` with parts sharing the context ``(f, alpha)``."""

    __slots__ = ("f", "alpha", "parts")

    def __init__(self, f: Poly, alpha, parts: dict[int, FractionElement] | None = None):
        self.f = f
        self.alpha = as_rational(alpha)
        self.parts = {i: u for i, u in (parts or {}).items() if not u.is_zero()}

    @classmethod
    def unit(cls, f: Poly, alpha) -> "GraphElement":
        """The generator ``f^(-1-alpha)`` at index 0."""
        return cls(f, alpha, {0: FractionElement.unit(f, alpha)})

    @classmethod
    def from_fraction(cls, u: FractionElement, index: int = 0) -> "GraphElement":
        return cls(u.f, u.twist, {index: u})

    def is_zero(self) -> bool:
        return not self.parts

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphElement):
            return NotImplemented
        return self.alpha == other.alpha and self.parts == other.parts

    def __add__(self, other: "GraphElement") -> "GraphElement":
        parts = dict(self.parts)
        for i, u in other.parts.items():
            parts[i] = parts[i] + u if i in parts else u
        return GraphElement(self.f, self.alpha, parts)

    def __sub__(self, other: "GraphElement") -> "GraphElement":
        return self + other.scale(-1)

    def scale(self, c) -> "GraphElement":
        return GraphElement(self.f, self.alpha, {i: u.scale(c) for i, u in self.parts.items()})

    def max_index(self) -> int:
        return max(self.parts, default=-1)

    def max_pole(self) -> int:
        return max((u.pole for u in self.parts.values()), default=0)

    def to_str(self, names: Sequence[str]) -> str:
        if not self.parts:
            return "0"
        return " + ".join(f"[{self.parts[i].to_str(names)}]*dt^{i}" for i in sorted(self.parts))


class GraphModule:
    """The actions of x, d, t, dt and s on graph elements for a fixed ``f``."""

    def __init__(self, f: Poly, alpha):
        self.f = f
        self.alpha = as_rational(alpha)
        self.n = f.n
        self.fj = [f.diff(j) for j in range(f.n)]

    def unit(self) -> GraphElement:
        return GraphElement.unit(self.f, self.alpha)

    def _new(self, parts: dict) -> GraphElement:
        return GraphElement(self.f, self.alpha, parts)

    @staticmethod
    def _acc(parts: dict, i: int, u: FractionElement) -> None:
        if u.is_zero():
            return
        parts[i] = parts[i] + u if i in parts else u

    def x(self, j: int, u: GraphElement) -> GraphElement:
        xj = Poly.var(self.n, j)
        return self._new({i: _frac_mul(v, xj) for i, v in u.parts.items()})

    def mul_poly(self, g: Poly, u: GraphElement) -> GraphElement:
        return self._new({i: _frac_mul(v, g) for i, v in u.parts.items()})

    def d(self, j: int, u: GraphElement) -> GraphElement:
        parts: dict = {}
        for i, v in u.parts.items():
            self._acc(parts, i, _frac_d(v, j, self.fj[j]))
            self._acc(parts, i + 1, _frac_mul(v, self.fj[j]).scale(-1))
        return self._new(parts)

    def t(self, u: GraphElement) -> GraphElement:
        parts: dict = {}
        for i, v in u.parts.items():
            self._acc(parts, i, _frac_mul_f(v))
            if i:
                self._acc(parts, i - 1, v.scale(-i))
        return self._new(parts)

    def dt(self, u: GraphElement) -> GraphElement:
        return self._new({i + 1: v for i, v in u.parts.items()})

    def s(self, u: GraphElement) -> GraphElement:
        return self.dt(self.t(u)).scale(-1)

    def s_poly(self, p: UniPoly, u: GraphElement) -> GraphElement:
        """``p(s) * u`` by Horner's rule."""
        acc = self._new({})
        for c in reversed(p.coeffs):
            acc = self.s(acc) + u.scale(c)
        return acc

    def act(self, op: WeylElement, u: GraphElement) -> GraphElement:
        """Apply a normally ordered operator in x, d and optionally s, t, dt."""
        sig = op.sig
        if sig.n != self.n:
            raise ValueError("operator and module have different numbers of variables")
        n = self.n
        total = self._new({})
        for m, c in op.terms.items():
            v = u
            if sig.has_t:
                for _ in range(m[sig.dt_index]):
                    v = self.dt(v)
                for _ in range(m[sig.t_index]):
                    v = self.t(v)
            if sig.has_s:
                for _ in range(m[sig.s_index]):
                    v = self.s(v)
            for j in range(n):
                for _ in range(m[n + j]):
                    v = self.d(j, v)
            a = m[:n]
            if any(a):
                v = self.mul_poly(Poly.monomial(a), v)
            total = total + v.scale(c)
        return total


def graph_act(op: WeylElement, u: GraphElement) -> GraphElement:
    return GraphModule(u.f, u.alpha).act(op, u)


# ---------------------------------------------------------------- coordinates

def _col_key(i: int, m: tuple) -> tuple:
    # highest dt-index first, then highest grlex monomial
    return (-i, -sum(m)) + tuple(-v for v in m)


def _key_index(key: tuple) -> int:
    return -key[0]


def _key_mono(key: tuple) -> tuple:
    return tuple(-v for v in key[2:])


class _Lifter:
    def __init__(self, f: Poly, level: int):
        self.f = f
        self.level = level
        self._pow = {0: Poly.one(f.n)}
        self._raw: dict = {}

    def fpow(self, k: int) -> Poly:
        if k not in self._pow:
            self._pow[k] = self.fpow(k - 1) * self.f
        return self._pow[k]

    def triples(self, u: GraphElement) -> list | None:
        """Cached ``(index, monomial, coeff)`` coordinates of ``u`` at this level."""
        hit = self._raw.get(id(u))
        if hit is not None and hit[0] is u:
            return hit[1]
        out: list | None = []
        for i, v in u.parts.items():
            if v.pole > self.level:
                out = None
                break
            num = v.numerator * self.fpow(self.level - v.pole)
            out.extend((i, m, c) for m, c in num.terms.items())
        self._raw[id(u)] = (u, out)
        return out

    def shifted_row(self, u: GraphElement, a: tuple) -> dict | None:
        """Coordinates of ``x^a * u``."""
        tr = self.triples(u)
        if tr is None:
            return None
        if not any(a):
            return {_col_key(i, m): c for i, m, c in tr}
        return {_col_key(i, tuple(x + y for x, y in zip(m, a))): c for i, m, c in tr}

    def row(self, u: GraphElement) -> dict | None:
        """Coordinates over the common pole, or None when a pole exceeds the level."""
        out: dict = {}
        for i, v in u.parts.items():
            if v.pole > self.level:
                return None
            num = v.numerator * self.fpow(self.level - v.pole)
            for m, c in num.terms.items():
                out[_col_key(i, m)] = c
        return out


def _multipliers(n: int, e: int) -> list[tuple[tuple, int]]:
    """Pairs ``(b, c)`` with ``|b| + c <= e``, in increasing total size."""
    out = []
    for b in monomials_up_to(n, e):
        for c in range(e - sum(b) + 1):
            out.append((b, c))
    out.sort(key=lambda bc: (sum(bc[0]) + bc[1], bc))
    return out


@dataclass
class SpanBasis:
    """Echelon basis of one weight piece of a truncated span."""

    omega: Fraction
    echelon: Echelon
    dropped: int = 0

    def rows(self) -> list[dict]:
        return self.echelon.rref()

    def contains_row(self, row: dict) -> bool:
        return self.echelon.contains(row)


# ---------------------------------------------------------------- context

class OracleContext:
    """Everything the oracle needs about one ``(f, alpha)``."""

    def __init__(self, f: Poly, alpha, bs: BSPolyData | None = None,
                 ann_gens: Sequence[WeylElement] | None = None,
                 euler: EulerField | None = None):
        self.f = f
        self.n = f.n
        self.alpha = as_rational(alpha)
        self.weights = find_weights(f)
        self.ann_gens = list(ann_gens) if ann_gens is not None else ann_fs_order1(f, 0)
        self.bs = bs if bs is not None else bs_polynomial(f, self.ann_gens)
        self.euler = euler if euler is not None else euler_field(f, 1)
        self.beta = beta_polynomial(self.bs, self.alpha)
        self.module = GraphModule(f, self.alpha)
        self._bases: dict = {}
        self._lifters: dict = {}

    def lifter(self, level: int) -> _Lifter:
        if level not in self._lifters:
            self._lifters[level] = _Lifter(self.f, level)
        return self._lifters[level]

    # -- generators
    def start_vind(self, k: int) -> GraphElement:
        """``t^k * f^(-1-alpha)``, which equals ``f^k * f^(-1-alpha)``."""
        u = self.module.unit()
        for _ in range(k):
            u = self.module.t(u)
        return u

    def start_beta(self, k: int) -> GraphElement:
        """``beta(dt t - k + alpha) t^k f^(-1-alpha)``; with s = -dt t this is beta(-s - k + alpha)."""
        p = self.beta.compose_linear(-1, -k + self.alpha)
        return self.module.s_poly(p, self.start_vind(k))

    def bases(self, tag, start: GraphElement, e: int, module: GraphModule | None = None) -> dict:
        """``d^b s^c * start`` for all ``|b| + c <= e`` (cached per tag)."""
        mod = module or self.module
        key = (tag, e)
        if key in self._bases:
            return self._bases[key]
        out: dict = {}
        zero_b = (0,) * self.n
        for b, c in _multipliers(self.n, e):
            if (b, c) == (zero_b, 0):
                out[(b, c)] = start
            elif c > 0:
                out[(b, c)] = mod.s(out[(b, c - 1)])
            else:
                j = max(i for i in range(self.n) if b[i])
                prev = list(b)
                prev[j] -= 1
                out[(b, c)] = mod.d(j, out[(tuple(prev), 0)])
        self._bases[key] = out
        return out

    def base_weight(self, k: int) -> Fraction:
        return Fraction(k - 1) - self.alpha

    # -- pieces
    def piece_generators(self, bases: dict, start_weight: Fraction, omega: Fraction,
                         module: GraphModule | None = None) -> Iterable[GraphElement]:
        mod = module or self.module
        w = self.weights
        for (b, c), u in bases.items():
            if u.is_zero():
                continue
            target = omega - start_weight + wdeg(w, b)
            if target < 0:
                continue
            for a in monomials_of_weight(w, target):
                yield mod.mul_poly(Poly.monomial(a), u) if any(a) else u

    def weight_window(self, k: int, budget: TruncationBudget) -> list[Fraction]:
        """Piece weights probed by the identity checks."""
        w = self.weights
        base = self.base_weight(k)
        vals = {base + wdeg(w, a) for a in monomials_up_to(self.n, budget.d)}
        vals |= {base - wdeg(w, b) for b in monomials_up_to(self.n, budget.e)}
        return sorted(vals)


def _piece_rows(ctx: "OracleContext", bases: dict, start_weight: Fraction, omega: Fraction,
                lifter: _Lifter) -> Iterable[dict | None]:
    w = ctx.weights
    for (b, c), u in bases.items():
        if u.is_zero():
            continue
        target = omega - start_weight + wdeg(w, b)
        if target < 0:
            continue
        for a in monomials_of_weight(w, target):
            yield lifter.shifted_row(u, a)


def _span_rows(rows: Iterable[dict | None], omega) -> SpanBasis:
    ech = Echelon()
    dropped = 0
    for r in rows:
        if r is None:
            dropped += 1
        elif r:
            ech.add(r)
    return SpanBasis(Fraction(omega), ech, dropped)


def _span(gens: Iterable[GraphElement], lifter: _Lifter, omega) -> SpanBasis:
    ech = Echelon()
    dropped = 0
    for g in gens:
        r = lifter.row(g)
        if r is None:
            dropped += 1
            continue
        if r:
            ech.add(r)
    return SpanBasis(Fraction(omega), ech, dropped)


def v_ind_span(ctx: OracleContext, k: int, budget: TruncationBudget, omega) -> SpanBasis:
    """Weight-``omega`` piece of the truncated ``V^k D * f^(-1-alpha)``."""
    if k < 0:
        raise ValueError("induced spans are modelled for k >= 0")
    omega = as_rational(omega)
    bases = ctx.bases(("vind", k), ctx.start_vind(k), budget.e)
    lifter = ctx.lifter(budget.m)
    return _span_rows(_piece_rows(ctx, bases, ctx.base_weight(k), omega, lifter), omega)


def v_can_span(ctx: OracleContext, k: int, budget: TruncationBudget, omega) -> SpanBasis:
    """Weight-``omega`` piece of ``V_ind^(k+1) + beta(dt t - k + alpha) V_ind^k``."""
    if k < 0:
        raise ValueError("canonical spans are modelled for k >= 0")
    omega = as_rational(omega)
    b1 = ctx.bases(("vind", k + 1), ctx.start_vind(k + 1), budget.e)
    b2 = ctx.bases(("beta", k), ctx.start_beta(k), budget.e)
    lifter = ctx.lifter(budget.m)
    rows = list(_piece_rows(ctx, b1, ctx.base_weight(k + 1), omega, lifter))
    rows += list(_piece_rows(ctx, b2, ctx.base_weight(k), omega, lifter))
    return _span_rows(rows, omega)


def _window_or_raise(ctx: OracleContext) -> None:
    v = root_window_check(ctx.bs, ctx.alpha)
    if not v.passed:
        from .hodge import WindowFailure

        raise WindowFailure(v.offending)


# ---------------------------------------------------------------- Hodge route via V^0

@dataclass
class OracleHodge:
    form: CanonicalForm
    dropped: int
    pole_violations: int


def hodge_via_v0(ctx: OracleContext, k: int, budget: TruncationBudget, degree_bound: int) -> OracleHodge:
    """Index-0 projection of ``V^0 cap {dt-index <= k}``, over ``f^(k+1)``, truncated at degree."""
    _window_or_raise(ctx)
    f = ctx.f
    n = ctx.n
    w = ctx.weights
    pole = k + 1
    level = max(budget.m, pole)
    lifter = ctx.lifter(level)
    omegas = sorted({wdeg(w, m) - pole - ctx.alpha for m in monomials_up_to(n, degree_bound)})
    numerators: list[Poly] = []
    dropped = 0
    violations = 0
    for omega in omegas:
        span = v_can_span(ctx, 0, budget, omega)
        dropped += span.dropped
        for r in span.rows():
            if -min(r)[0] > k:
                continue  # pivot at an index above k: row leaves F_k^{t-ord}
            g = Poly(n, {_key_mono(key): c for key, c in r.items() if _key_index(key) == 0})
            q = g.divexact(lifter.fpow(level - pole)) if level > pole else g
            if q is None:
                violations += 1
                continue
            numerators.append(q)
    # restrict each piece's projection to numerator degree <= bound
    ech = Echelon()
    for q in numerators:
        ech.add({grlex_rank(m): c for m, c in q.terms.items()})
    kept = []
    for r in ech.rref():
        if -min(r)[0] <= degree_bound:
            kept.append(Poly(n, {tuple(-v for v in key[1:]): c for key, c in r.items()}))
    form = CanonicalForm(pole, ctx.alpha, (), degree_bound, echelon_rows(kept))
    return OracleHodge(form, dropped, violations)


# ---------------------------------------------------------------- Phi

@lru_cache(maxsize=None)
def _q_poly(i: int) -> UniPoly:
    """``Q_i(-s) = prod_{j<i} (-s + j)`` as a polynomial in s."""
    p = UniPoly.constant(1)
    for j in range(i):
        p = p * UniPoly((Fraction(j), Fraction(-1)))
    return p


@lru_cache(maxsize=None)
def _phi_matrix(i: int, alpha: Fraction) -> tuple[Fraction, ...]:
    """Coefficients ``c_j`` with ``Q_i(-s-alpha) = sum_j c_j Q_j(-s)``."""
    target = _q_poly(i).compose_linear(1, alpha)
    coeffs = [Fraction(0)] * (i + 1)
    rest = target
    for j in range(i, -1, -1):
        q = _q_poly(j)
        c = rest.coeffs[j] / q.lc if rest.degree >= j else Fraction(0)
        coeffs[j] = c
        rest = rest - q * UniPoly.constant(c)
    if not rest.is_zero():
        raise ArithmeticError("triangular expansion failed")
    return tuple(coeffs)


def phi(u: GraphElement) -> GraphElement:
    """The twist isomorphism onto the untwisted graph module."""
    f = u.f
    parts: dict[int, FractionElement] = {}
    for i, v in u.parts.items():
        cs = _phi_matrix(i, u.alpha)
        for j in range(i + 1):
            if not cs[j]:
                continue
            # h_i f^-i c_ij f^j, with h_i = numerator * f^-pole
            term = FractionElement(v.numerator.scale(cs[j]), v.pole + i - j, 0, f)
            parts[j] = parts[j] + term if j in parts else term
    return GraphElement(f, 0, parts)


# ---------------------------------------------------------------- identity checks

@dataclass
class IdentityReport:
    selector: str
    verdict: str  # pass | fail | inconclusive | inconsistent
    detail: str = ""
    witness: str = ""
    data: dict = field(default_factory=dict)


SELECTORS = ("ann-presentation", "generation", "vind-bfunction", "phi-twist", "fv-compat", "tord-vs-ord")


def _stable(check: Callable[[TruncationBudget], tuple[bool, str]], budget: TruncationBudget):
    ok1, w1 = check(budget)
    if not ok1:
        return False, w1, budget
    ok2, w2 = check(budget.bump())
    return ok2, w2, budget.bump()


def _names(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


def check_ann_presentation(ctx: OracleContext, budget: TruncationBudget) -> IdentityReport:
    """Operators of bounded size killing ``f^(-1-alpha)`` lie in ``D ann f^s + D(E+1+alpha)``."""
    n = ctx.n
    sig = AlgebraSignature(n)
    gens = ann_D(ctx.f, ctx.ann_gens)
    E = ctx.euler.operator(sig) + (1 + ctx.alpha)
    L = buchberger(gens + [E], grlex_order())
    unit = FractionElement.unit(ctx.f, ctx.alpha)
    for g in gens + [E]:
        if not act_on_fraction(g, unit).is_zero():
            return IdentityReport("ann-presentation", "inconsistent",
                                  "a presentation generator does not annihilate the generator",
                                  g.to_str(_names(n)))

    def check(bud: TruncationBudget):
        w = ctx.weights
        groups: dict[Fraction, list] = {}
        for a in monomials_up_to(n, bud.d):
            for b in monomials_up_to(n, bud.e):
                groups.setdefault(wdeg(w, a) - wdeg(w, b), []).append(a + b)
        cache: dict = {}

        def image(mono):
            if mono not in cache:
                op = WeylElement.monomial(sig, mono)
                cache[mono] = act_on_fraction(op, unit)
            return cache[mono]

        lifter = _Lifter(ctx.f, 1 + bud.e)
        found = 0
        for omega in sorted(groups):
            monos = groups[omega]
            cols = []
            for mono in monos:
                u = image(mono)
                r = lifter.row(GraphElement.from_fraction(u)) if not u.is_zero() else {}
                cols.append(r or {})
            keys = {key: j for j, key in enumerate(sorted({key for col in cols for key in col}))}
            cols = [{keys[key]: c for key, c in col.items()} for col in cols]
            for vec in kernel(cols):
                P = WeylElement(sig, {monos[j]: c for j, c in vec.items()})
                found += 1
                if not normal_form(P, L).is_zero():
                    return False, P.to_str(_names(n))
        return True, f"{found} kernel elements"

    ok, info, used = _stable(check, budget)
    if ok:
        return IdentityReport("ann-presentation", "pass", f"stable at {used}: {info}")
    return IdentityReport("ann-presentation", "fail", "annihilating operator outside the presentation", info)


def check_generation(ctx: OracleContext, budget: TruncationBudget, k: int = 1) -> IdentityReport:
    """Is the module generated by ``f^(-alpha-k)``?  Checked step by step up to ``l = n``."""
    n = ctx.n
    sig = AlgebraSignature(n)
    alpha = ctx.alpha
    bad_roots = [r for r in ctx.bs.roots.roots()
                 if (-r - alpha).denominator == 1 and -r - alpha > k]
    predicted = not bad_roots

    def step_member(l: int, bud: TruncationBudget) -> bool:
        src = FractionElement(Poly.one(n), l, alpha, ctx.f)
        tgt = FractionElement(Poly.one(n), l + 1, alpha, ctx.f)
        lifter = _Lifter(ctx.f, l + 1 + bud.e)
        w = ctx.weights
        ech = Echelon()
        cache: dict = {(0,) * n: src}
        fj = [ctx.f.diff(j) for j in range(n)]

        def dpow(b):
            if b not in cache:
                j = max(i for i in range(n) if b[i])
                prev = list(b)
                prev[j] -= 1
                cache[b] = _frac_d(dpow(tuple(prev)), j, fj[j])
            return cache[b]

        # x^a d^b has weight w.a - w.b = -1
        for b in monomials_up_to(n, bud.e):
            target = wdeg(w, b) - 1
            if target < 0:
                continue
            for a in monomials_of_weight(w, target):
                u = _frac_mul(dpow(b), Poly.monomial(a))
                r = lifter.row(GraphElement.from_fraction(u))
                if r:
                    ech.add(r)
        return ech.contains(lifter.row(GraphElement.from_fraction(tgt)))

    first_missing = None
    for l in range(k, max(n, k) + 1):
        if not step_member(l, budget) or not step_member(l, budget.bump()):
            first_missing = l
            break
    data = {"k": k, "predicted_generated": predicted}
    if first_missing is None:
        if predicted:
            return IdentityReport("generation", "pass", f"generated by f^(-alpha-{k}) at budget", data=data)
        return IdentityReport("generation", "inconsistent",
                              "membership found although a root forbids generation",
                              ", ".join(fmt_rational(r) for r in bad_roots), data)
    if predicted:
        return IdentityReport("generation", "inconclusive",
                              f"f^(-alpha-{first_missing + 1}) not reached at budget", data=data)
    root = max(bad_roots)
    data["missing_step"] = first_missing
    return IdentityReport("generation", "fail",
                          f"not generated by f^(-alpha-{k}): f^(-alpha-{first_missing + 1}) stays outside",
                          f"root {fmt_rational(root)}", data)


def check_vind_bfunction(ctx: OracleContext, budget: TruncationBudget, ks=(0, 1)) -> IdentityReport:
    """``b(s + k - 1 - alpha)`` maps ``V_ind^k`` into ``V_ind^(k+1)``, no proper divisor does."""
    b = ctx.bs.b
    mod = ctx.module

    def check(bud: TruncationBudget):
        lifter = ctx.lifter(bud.m)
        for k in ks:
            start = ctx.start_vind(k)
            omega = ctx.base_weight(k)
            span = v_ind_span(ctx, k + 1, bud, omega)
            shift = Fraction(k - 1) - ctx.alpha
            full = mod.s_poly(b.compose_linear(1, shift), start)
            r = lifter.row(full)
            if r is None or not span.contains_row(r):
                return None, f"b-function image not in V_ind^{k + 1} (k={k})"
            for root, _ in ctx.bs.roots.entries:
                q, rem = b.divmod(UniPoly((-root, Fraction(1))))
                part = mod.s_poly(q.compose_linear(1, shift), start)
                r = lifter.row(part)
                if r is not None and span.contains_row(r):
                    return False, f"proper divisor without root {fmt_rational(root)} suffices (k={k})"
        return True, ""

    res1, w1 = check(budget)
    if res1 is True:
        res2, w2 = check(budget.bump())
        if res2 is True:
            return IdentityReport("vind-bfunction", "pass", f"stable at {budget.bump()}")
        res1, w1 = res2, w2
    if res1 is False:
        return IdentityReport("vind-bfunction", "fail", "b-function is not minimal at budget", w1)
    return IdentityReport("vind-bfunction", "inconclusive", w1)


def check_phi_twist(ctx: OracleContext, budget: TruncationBudget, ks=(0,)) -> IdentityReport:
    """Phi is linear for x, d, t, shifts s by alpha, and matches V-steps with the shifted ones."""
    f = ctx.f
    n = ctx.n
    src = ctx.module
    dst = GraphModule(f, 0)
    samples = []
    bases = ctx.bases(("vind", 0), ctx.start_vind(0), min(budget.e, 2))
    for (b, c), u in bases.items():
        for a in monomials_up_to(n, 1):
            samples.append(src.mul_poly(Poly.monomial(a), u) if any(a) else u)
    for u in samples:
        pu = phi(u)
        checks = [(phi(src.t(u)), dst.t(pu), "t")]
        for j in range(n):
            checks.append((phi(src.x(j, u)), dst.x(j, pu), f"x{j + 1}"))
            checks.append((phi(src.d(j, u)), dst.d(j, pu), f"dx{j + 1}"))
        checks.append((phi(src.s(u)), dst.s(pu) + pu.scale(ctx.alpha), "s"))
        for lhs, rhs, name in checks:
            if lhs != rhs:
                return IdentityReport("phi-twist", "fail", f"Phi does not commute with {name}",
                                      u.to_str(_names(n)))

    def check(bud: TruncationBudget):
        lifter = ctx.lifter(bud.m + bud.e + 1)
        for k in ks:
            b1 = ctx.bases(("vind", k + 1), ctx.start_vind(k + 1), bud.e)
            b2 = ctx.bases(("beta", k), ctx.start_beta(k), bud.e)
            # Phi is O-linear, so it is applied once per base element
            p1 = {key: phi(u) for key, u in b1.items()}
            p2 = {key: phi(u) for key, u in b2.items()}
            start1 = dst.unit()
            for _ in range(k + 1):
                start1 = dst.t(start1)
            start0 = dst.unit()
            for _ in range(k):
                start0 = dst.t(start0)
            start2 = dst.s_poly(ctx.beta.compose_linear(-1, -k), start0)
            c1 = ctx.bases(("o-vind", k + 1), start1, bud.e, dst)
            c2 = ctx.bases(("o-beta", k), start2, bud.e, dst)
            for omega in ctx.weight_window(k, bud):
                w_o = omega + ctx.alpha
                lhs = list(_piece_rows(ctx, p1, ctx.base_weight(k + 1), omega, lifter))
                lhs += list(_piece_rows(ctx, p2, ctx.base_weight(k), omega, lifter))
                rhs = list(_piece_rows(ctx, c1, Fraction(k), w_o, lifter))
                rhs += list(_piece_rows(ctx, c2, Fraction(k - 1), w_o, lifter))
                if _span_rows(lhs, w_o).rows() != _span_rows(rhs, w_o).rows():
                    return False, f"spans differ at k={k}, weight {fmt_rational(omega)}"
        return True, ""

    ok, info, used = _stable(check, budget)
    if ok:
        return IdentityReport("phi-twist", "pass", f"stable at {used}")
    return IdentityReport("phi-twist", "fail", "image of V-step differs from shifted V-step", info)


def _f_monomial_gens(ctx: OracleContext, l: int, omega: Fraction, min_v: int | None):
    """``x^a d^b t^p dt^q f^(-1-alpha)`` of weight omega with |b|+q <= l (and p-q >= min_v)."""
    mod = ctx.module
    n = ctx.n
    w = ctx.weights
    unit = mod.unit()
    out = []
    for b in monomials_up_to(n, l):
        for q in range(l - sum(b) + 1):
            rhs = omega + 1 + ctx.alpha + wdeg(w, b) + q
            p = 0
            while p <= rhs:
                if min_v is None or p - q >= min_v:
                    for a in monomials_of_weight(w, rhs - p):
                        u = unit
                        for _ in range(q):
                            u = mod.dt(u)
                        for _ in range(p):
                            u = mod.t(u)
                        for j in range(n):
                            for _ in range(b[j]):
                                u = mod.d(j, u)
                        if any(a):
                            u = mod.mul_poly(Poly.monomial(a), u)
                        out.append(u)
                p += 1
    return out


def check_fv_compat(ctx: OracleContext, budget: TruncationBudget, l: int = 1, k: int = 1) -> IdentityReport:
    """``F_l^ord cap V_ind^k`` equals ``(F_l D cap V^k D) f^(-1-alpha)`` piecewise."""

    def check(bud: TruncationBudget):
        lifter = ctx.lifter(bud.m + l + k + 1)
        for omega in ctx.weight_window(k, bud):
            fl = _span(_f_monomial_gens(ctx, l, omega, None), lifter, omega)
            flv = _span(_f_monomial_gens(ctx, l, omega, k), lifter, omega)
            bases = ctx.bases(("vind", k), ctx.start_vind(k), bud.e)
            vk = _span_rows(_piece_rows(ctx, bases, ctx.base_weight(k), omega, lifter), omega)
            inter = _intersect(fl.rows(), vk.rows())
            for r in inter:
                if not flv.contains_row(r):
                    return False, f"weight {fmt_rational(omega)}"
            for r in flv.rows():
                if not vk.contains_row(r) or not fl.contains_row(r):
                    return False, f"weight {fmt_rational(omega)} (reverse inclusion)"
        return True, ""

    ok, info, used = _stable(check, budget)
    if ok:
        return IdentityReport("fv-compat", "pass", f"l={l}, k={k}, stable at {used}")
    return IdentityReport("fv-compat", "fail", f"l={l}, k={k}: intersection exceeds F cap V", info)


def check_tord_vs_ord(ctx: OracleContext, budget: TruncationBudget, k: int = 1) -> IdentityReport:
    """Elements of ``V^0`` with dt-index <= k lie in ``F_k D * f^(-1-alpha)``."""
    _window_or_raise(ctx)

    def check(bud: TruncationBudget):
        lifter = ctx.lifter(bud.m + k + 1)
        for omega in ctx.weight_window(0, bud):
            fk = _span(_f_monomial_gens(ctx, k, omega, None), lifter, omega)
            b1 = ctx.bases(("vind", 1), ctx.start_vind(1), bud.e)
            b2 = ctx.bases(("beta", 0), ctx.start_beta(0), bud.e)
            rows = list(_piece_rows(ctx, b1, ctx.base_weight(1), omega, lifter))
            rows += list(_piece_rows(ctx, b2, ctx.base_weight(0), omega, lifter))
            v0 = _span_rows(rows, omega)
            for r in v0.rows():
                if _key_index(min(r)) <= k and not fk.contains_row(r):
                    return False, f"weight {fmt_rational(omega)}"
        return True, ""

    ok, info, used = _stable(check, budget)
    if ok:
        return IdentityReport("tord-vs-ord", "pass", f"k={k}, stable at {used}")
    return IdentityReport("tord-vs-ord", "fail", f"k={k}: t-order piece exceeds order piece", info)


def _intersect(us: Sequence[dict], vs: Sequence[dict]) -> list[dict]:
    """Zassenhaus intersection for rows keyed by arbitrary comparable keys."""
    ech = Echelon()
    for u in us:
        row = {(0,) + k: v for k, v in u.items()}
        row.update({(1,) + k: v for k, v in u.items()})
        ech.add(row)
    for v in vs:
        ech.add({(0,) + k: c for k, c in v.items()})
    out = []
    for r in ech.rref():
        if min(r)[0] == 1:
            out.append({k[1:]: c for k, c in r.items()})
    return out


def verify_paper_identities(selector: str, ctx: OracleContext,
                            budget: TruncationBudget = DEFAULT_BUDGET, k: int | None = None) -> IdentityReport:
    """Run one named identity check at the given budget."""
    if selector == "ann-presentation":
        return check_ann_presentation(ctx, budget)
    if selector == "generation":
        return check_generation(ctx, budget, 1 if k is None else k)
    if selector == "vind-bfunction":
        return check_vind_bfunction(ctx, budget)
    if selector == "phi-twist":
        return check_phi_twist(ctx, budget)
    if selector == "fv-compat":
        kk = 1 if k is None else k
        return check_fv_compat(ctx, budget, l=kk, k=kk)
    if selector == "tord-vs-ord":
        return check_tord_vs_ord(ctx, budget, 1 if k is None else k)
    raise ValueError(f"unknown selector {selector!r}; choose from {', '.join(SELECTORS)}")


# ---------------------------------------------------------------- Newton multiplier ideals

@dataclass(frozen=True)
class NewtonPolyhedron:
    exponents: tuple[tuple[int, ...], ...]
    normals: tuple[tuple[Fraction, ...], ...]  # facets <u, v> >= 1 not through the origin

    @classmethod
    def of(cls, f: Poly) -> "NewtonPolyhedron":
        exps = tuple(sorted(f.terms))
        if any(not any(m) for m in exps):
            raise ValueError("f must vanish at the origin")
        n = f.n
        # vertices of {u >= 0, <u, a> >= 1} are the non-coordinate facet normals
        cons = [({i: Fraction(1)}, Fraction(0)) for i in range(n)]
        cons += [({i: Fraction(a[i]) for i in range(n) if a[i]}, Fraction(1)) for a in exps]
        found = set()
        for choice in combinations(range(len(cons)), n):
            sol = solve_linear([cons[j][0] for j in choice], [cons[j][1] for j in choice])
            if sol is None:
                continue
            u = tuple(sol.get(i, Fraction(0)) for i in range(n))
            # require a unique solution: the chosen rows must have full rank
            ech = Echelon()
            for j in choice:
                ech.add(cons[j][0])
            if len(ech) < n:
                continue
            if all(sum((c * u[i] for i, c in row.items()), Fraction(0)) >= rhs for row, rhs in cons):
                found.add(u)
        return cls(exps, tuple(sorted(found)))

    def inside(self, point: Sequence[int], c: Fraction, strict: bool) -> bool:
        """Is ``point`` in the interior (strict) or closure of ``c * polyhedron``?"""
        for u in self.normals:
            v = sum((a * b for a, b in zip(u, point)), Fraction(0))
            if (v <= c) if strict else (v < c):
                return False
        return True


def _minimal_monomials(points: Iterable[tuple]) -> list[tuple]:
    pts = sorted(set(points), key=grlex_key)
    out: list[tuple] = []
    for p in pts:
        if not any(all(a <= b for a, b in zip(q, p)) for q in out):
            out.append(p)
    return out


def newton_multiplier(f: Poly, c, minus_epsilon: bool = False) -> list[Poly]:
    """Multiplier ideal of ``f^c`` (or ``f^(c - eps)``) for Newton-nondegenerate ``f``."""
    c = as_rational(c)
    if c < 0:
        raise ValueError("c must be nonnegative")
    n = f.n
    if minus_epsilon:
        if c == 0:
            return [Poly.one(n)]
        if c > 1:
            return [f * g for g in newton_multiplier(f, c - 1, True)]
        strict = False
    else:
        if c >= 1:
            return [f * g for g in newton_multiplier(f, c - 1, False)]
        strict = True
    poly = NewtonPolyhedron.of(f)
    bounds = []
    for i in range(n):
        pos = [u[i] for u in poly.normals if u[i] > 0]
        bounds.append(int(max((c / p for p in pos), default=Fraction(0))) + 1)
    pts = []

    def rec(prefix):
        if len(prefix) == n:
            if poly.inside([a + 1 for a in prefix], c, strict):
                pts.append(tuple(prefix))
            return
        for v in range(bounds[len(prefix)] + 1):
            rec(prefix + [v])

    rec([])
    return [Poly.monomial(a) for a in _minimal_monomials(pts)]
