"""The rational Weyl algebra, optionally with a central ``s`` and a pair ``(t, dt)``.

Elements are stored in normal order ``x^a d^b s^c t^d dt^e`` as a dict from
flat exponent tuples to nonzero Fractions.  The flat layout is
``(a_1..a_n, b_1..b_n[, c][, d, e])``.

The module also carries the two twisted actions used throughout the package:
on ``g * f^(-p) * f^(s+gamma)`` (:func:`act_on_fs`) and on twisted fractions
``g * f^(-m) * f^(-alpha)`` (:func:`act_on_fraction`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb
from typing import Iterable, Mapping, Sequence

from .arith import UniPoly, as_rational, fmt_rational
from .polynomial import Poly, format_terms, grlex_key


class SignatureMismatch(ValueError):
    pass


@dataclass(frozen=True)
class AlgebraSignature:
    n: int
    has_s: bool = False
    has_t: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one x-variable")

    @property
    def size(self) -> int:
        return 2 * self.n + int(self.has_s) + 2 * int(self.has_t)

    @property
    def s_index(self) -> int:
        if not self.has_s:
            raise SignatureMismatch("signature has no s")
        return 2 * self.n

    @property
    def t_index(self) -> int:
        if not self.has_t:
            raise SignatureMismatch("signature has no t")
        return 2 * self.n + int(self.has_s)

    @property
    def dt_index(self) -> int:
        return self.t_index + 1

    def pairs(self) -> tuple[tuple[int, int], ...]:
        """(position variable, derivation) index pairs with [d, x] = 1."""
        ps = [(i, self.n + i) for i in range(self.n)]
        if self.has_t:
            ps.append((self.t_index, self.dt_index))
        return tuple(ps)

    def names(self, xnames: Sequence[str] | None = None) -> list[str]:
        xs = list(xnames) if xnames else [f"x{i + 1}" for i in range(self.n)]
        out = xs + [f"d{x}" for x in xs]
        if self.has_s:
            out.append("s")
        if self.has_t:
            out += ["t", "dt"]
        return out

    def x_block(self) -> list[int]:
        return list(range(self.n))

    def d_block(self) -> list[int]:
        return list(range(self.n, 2 * self.n))


@lru_cache(maxsize=None)
def _pair_expansion(b: int, a: int) -> tuple[tuple[int, int], ...]:
    # d^b x^a = sum_k C(b,k) a!/(a-k)! x^(a-k) d^(b-k)
    out = []
    ff = 1
    for k in range(min(a, b) + 1):
        out.append((k, comb(b, k) * ff))
        ff *= a - k
    return tuple(out)


@lru_cache(maxsize=1 << 18)
def _mono_mul(pairs: tuple, m1: tuple, m2: tuple) -> tuple:
    base = [u + v for u, v in zip(m1, m2)]
    factors = []
    for xi, di in pairs:
        b, a = m1[di], m2[xi]
        if a and b:
            factors.append((xi, di, _pair_expansion(b, a)))
    if not factors:
        return ((tuple(base), 1),)
    out = []
    for choice in product(*(f[2] for f in factors)):
        e = list(base)
        c = 1
        for (xi, di, _), (k, ck) in zip(factors, choice):
            e[xi] -= k
            e[di] -= k
            c *= ck
        out.append((tuple(e), c))
    return tuple(out)


class WeylElement:
    """Normally ordered element of Weyl algebra (with optional s, t, dt)."""

    __slots__ = ("sig", "terms", "_hash")

    def __init__(self, sig: AlgebraSignature, terms: Mapping[tuple, object] | None = None):
        self.sig = sig
        clean = {}
        if terms:
            for m, c in terms.items():
                if c:
                    if len(m) != sig.size:
                        raise SignatureMismatch(f"monomial {m} does not fit {sig}")
                    clean[tuple(m)] = c if isinstance(c, Fraction) else as_rational(c)
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, sig, terms) -> "WeylElement":
        w = cls.__new__(cls)
        w.sig = sig
        w.terms = terms
        w._hash = None
        return w

    # constructors
    @classmethod
    def zero(cls, sig) -> "WeylElement":
        return cls._raw(sig, {})

    @classmethod
    def const(cls, sig, c) -> "WeylElement":
        c = as_rational(c)
        return cls._raw(sig, {(0,) * sig.size: c} if c else {})

    @classmethod
    def gen(cls, sig, index: int) -> "WeylElement":
        e = [0] * sig.size
        e[index] = 1
        return cls._raw(sig, {tuple(e): Fraction(1)})

    @classmethod
    def x(cls, sig, i: int) -> "WeylElement":
        return cls.gen(sig, i)

    @classmethod
    def d(cls, sig, i: int) -> "WeylElement":
        return cls.gen(sig, sig.n + i)

    @classmethod
    def s(cls, sig) -> "WeylElement":
        return cls.gen(sig, sig.s_index)

    @classmethod
    def t(cls, sig) -> "WeylElement":
        return cls.gen(sig, sig.t_index)

    @classmethod
    def dt(cls, sig) -> "WeylElement":
        return cls.gen(sig, sig.dt_index)

    @classmethod
    def monomial(cls, sig, exps, c=1) -> "WeylElement":
        return cls(sig, {tuple(exps): c})

    @classmethod
    def from_poly(cls, sig, p: Poly) -> "WeylElement":
        """Embed a polynomial in the x-variables."""
        if p.n != sig.n:
            raise SignatureMismatch("polynomial arity differs from signature")
        pad = (0,) * (sig.size - sig.n)
        return cls._raw(sig, {m + pad: c for m, c in p.terms.items()})

    @classmethod
    def from_unipoly_s(cls, sig, p: UniPoly, a=1, b=0) -> "WeylElement":
        """The element ``p(a*s + b)``."""
        q = p.compose_linear(a, b)
        out = {}
        for k, c in enumerate(q.coeffs):
            if c:
                e = [0] * sig.size
                e[sig.s_index] = k
                out[tuple(e)] = c
        return cls._raw(sig, out)

    # predicates
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, WeylElement):
            return self.sig == other.sig and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == WeylElement.const(self.sig, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.sig, frozenset(self.terms.items())))
        return self._hash

    # arithmetic
    def _coerce(self, other) -> "WeylElement":
        if isinstance(other, WeylElement):
            if other.sig != self.sig:
                raise SignatureMismatch(f"{self.sig} vs {other.sig}")
            return other
        return WeylElement.const(self.sig, other)

    def __add__(self, other) -> "WeylElement":
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return WeylElement._raw(self.sig, out)

    __radd__ = __add__

    def __neg__(self) -> "WeylElement":
        return WeylElement._raw(self.sig, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "WeylElement":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "WeylElement":
        return self._coerce(other) - self

    def scale(self, c) -> "WeylElement":
        c = as_rational(c)
        if not c:
            return WeylElement.zero(self.sig)
        return WeylElement._raw(self.sig, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other) -> "WeylElement":
        if not isinstance(other, WeylElement):
            return self.scale(other)
        return mul(self, other)

    def __rmul__(self, other) -> "WeylElement":
        return self.scale(other)

    def __pow__(self, e: int) -> "WeylElement":
        out = WeylElement.const(self.sig, 1)
        for _ in range(e):
            out = out * self
        return out

    def mono_left(self, m: tuple, c: Fraction) -> "WeylElement":
        """``c * m * self`` for a monomial ``m``."""
        return WeylElement._raw(self.sig, _mono_left_terms(self.sig, m, c, self.terms))

    # structure
    def leading(self, key) -> tuple[tuple, Fraction]:
        m = max(self.terms, key=key)
        return m, self.terms[m]

    def to_str(self, xnames: Sequence[str] | None = None) -> str:
        return format_terms(self.terms, self.sig.names(xnames))

    def __repr__(self) -> str:
        return f"WeylElement({self.to_str()})"


def _mono_left_terms(sig, m, c, terms) -> dict:
    pairs = sig.pairs()
    out: dict = {}
    for m2, c2 in terms.items():
        for e, k in _mono_mul(pairs, m, m2):
            v = out.get(e, 0) + c * c2 * k
            if v:
                out[e] = v
            else:
                del out[e]
    return out


def mul(P: WeylElement, Q: WeylElement) -> WeylElement:
    """Normally ordered product ``P * Q``."""
    if P.sig != Q.sig:
        raise SignatureMismatch(f"{P.sig} vs {Q.sig}")
    pairs = P.sig.pairs()
    out: dict = {}
    for m1, c1 in P.terms.items():
        for m2, c2 in Q.terms.items():
            for e, k in _mono_mul(pairs, m1, m2):
                v = out.get(e, 0) + c1 * c2 * k
                if v:
                    out[e] = v
                else:
                    del out[e]
    return WeylElement._raw(P.sig, out)


# ---------------------------------------------------------------- gradings

def sharp_weight(sig: AlgebraSignature, m: tuple) -> int:
    n = sig.n
    w = sum(m[n:2 * n])
    if sig.has_s:
        w += m[sig.s_index]
    return w


def sharp_order(P: WeylElement) -> int:
    """Total order: differential order plus s-degree (max over terms)."""
    if P.sig.has_t:
        raise SignatureMismatch("sharp_order is defined on D[s] without t")
    if P.is_zero():
        raise ValueError("sharp_order of zero")
    return max(sharp_weight(P.sig, m) for m in P.terms)


def diff_order(P: WeylElement) -> int:
    """Order in the derivations, counting dt when present."""
    if P.is_zero():
        raise ValueError("order of zero")
    sig = P.sig
    n = sig.n

    def o(m):
        w = sum(m[n:2 * n])
        if sig.has_t:
            w += m[sig.dt_index]
        return w

    return max(o(m) for m in P.terms)


def v_weight(sig: AlgebraSignature, m: tuple) -> int:
    """Kashiwara-Malgrange weight along t = 0: t counts +1, dt counts -1."""
    return m[sig.t_index] - m[sig.dt_index]


def in_V(P: WeylElement, k: int) -> bool:
    return all(v_weight(P.sig, m) >= k for m in P.terms)


# ---------------------------------------------------------------- s-substitutions

def specialize_s(P: WeylElement, value) -> WeylElement:
    """Substitute ``s -> value`` and drop s from the signature."""
    value = as_rational(value)
    sig = P.sig
    si = sig.s_index
    new_sig = AlgebraSignature(sig.n, False, sig.has_t)
    out: dict = {}
    for m, c in P.terms.items():
        e = m[:si] + m[si + 1:]
        v = out.get(e, 0) + c * value ** m[si]
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return WeylElement._raw(new_sig, out)


def shift_s(P: WeylElement, c) -> WeylElement:
    """Substitute ``s -> s + c``."""
    c = as_rational(c)
    si = P.sig.s_index
    out: dict = {}
    for m, v in P.terms.items():
        k = m[si]
        for j in range(k + 1):
            e = list(m)
            e[si] = j
            e = tuple(e)
            nv = out.get(e, 0) + v * comb(k, j) * c ** (k - j)
            if nv:
                out[e] = nv
            else:
                out.pop(e, None)
    return WeylElement._raw(P.sig, out)


def extend_signature(P: WeylElement, sig: AlgebraSignature) -> WeylElement:
    """Embed ``P`` into a larger signature with the same n."""
    src = P.sig
    if src.n != sig.n or (src.has_s and not sig.has_s) or (src.has_t and not sig.has_t):
        raise SignatureMismatch(f"cannot embed {src} into {sig}")
    out = {}
    for m, c in P.terms.items():
        e = list(m[:2 * src.n])
        if sig.has_s:
            e.append(m[src.s_index] if src.has_s else 0)
        if sig.has_t:
            e += [m[src.t_index], m[src.dt_index]] if src.has_t else [0, 0]
        out[tuple(e)] = c
    return WeylElement._raw(sig, out)


def x_part(P: WeylElement) -> Poly:
    """The element as a polynomial in x; requires P to be free of d, s, t."""
    n = P.sig.n
    out = {}
    for m, c in P.terms.items():
        if any(m[n:]):
            raise ValueError("element involves non-x variables")
        out[m[:n]] = c
    return Poly(n, out)


# ---------------------------------------------------------------- twisted actions

def _lift_x(p: Poly, extra: int) -> Poly:
    pad = (0,) * extra
    return Poly._raw(p.n + extra, {m + pad: c for m, c in p.terms.items()})


def _cancel(num: Poly, pole: int, f: Poly) -> tuple[Poly, int]:
    if num.is_zero():
        return num, 0
    while pole > 0:
        q = num.divexact(f)
        if q is None:
            break
        num, pole = q, pole - 1
    return num, pole


@dataclass(frozen=True, eq=False)
class FractionElement:
    """``numerator * f^(-pole) * f^(-twist)`` for a context polynomial ``f``."""

    numerator: Poly
    pole: int
    twist: Fraction
    f: Poly = field(repr=False)

    def __post_init__(self):
        num, pole = _cancel(self.numerator, self.pole, self.f)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "pole", pole)
        object.__setattr__(self, "twist", as_rational(self.twist))

    @classmethod
    def unit(cls, f: Poly, twist) -> "FractionElement":
        """The generator ``f^(-1-twist)``."""
        return cls(Poly.one(f.n), 1, twist, f)

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FractionElement):
            return NotImplemented
        return (self.numerator, self.pole, self.twist) == (other.numerator, other.pole, other.twist)

    def __hash__(self) -> int:
        return hash((self.numerator, self.pole, self.twist))

    def lift_to(self, pole: int) -> Poly:
        """Numerator over ``f^pole`` (requires ``pole >= self.pole``)."""
        if pole < self.pole:
            raise ValueError(f"pole {self.pole} exceeds requested level {pole}")
        return self.numerator * self.f ** (pole - self.pole)

    def __add__(self, other: "FractionElement") -> "FractionElement":
        if self.twist != other.twist:
            raise ValueError("twists differ")
        p = max(self.pole, other.pole)
        return FractionElement(self.lift_to(p) + other.lift_to(p), p, self.twist, self.f)

    def scale(self, c) -> "FractionElement":
        return FractionElement(self.numerator.scale(c), self.pole, self.twist, self.f)

    def to_str(self, names: Sequence[str]) -> str:
        num = self.numerator.to_str(names)
        factors = [f"({num})"]
        if self.pole:
            factors.append(f"f^(-{self.pole})")
        if self.twist:
            factors.append(f"f^(-{fmt_rational(self.twist)})")
        return "*".join(factors)


@dataclass(frozen=True, eq=False)
class SPolyFrac:
    """``numerator(x, s) * f^(-pole) * f^(s + shift)``; numerator has n+1 variables, s last."""

    numerator: Poly
    pole: int
    shift: Fraction
    f: Poly = field(repr=False)

    def __post_init__(self):
        f_lift = _lift_x(self.f, 1)
        num, pole = _cancel(self.numerator, self.pole, f_lift)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "pole", pole)
        object.__setattr__(self, "shift", as_rational(self.shift))

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, SPolyFrac):
            return NotImplemented
        return (self.numerator, self.pole, self.shift) == (other.numerator, other.pole, other.shift)

    def __hash__(self) -> int:
        return hash((self.numerator, self.pole, self.shift))

    def specialize(self, s_value) -> FractionElement:
        """Evaluate at ``s = s_value``: a fraction with twist ``-(s_value + shift)``."""
        v = as_rational(s_value)
        n = self.f.n
        out: dict = {}
        for m, c in self.numerator.terms.items():
            e = m[:n]
            nv = out.get(e, 0) + c * v ** m[n]
            if nv:
                out[e] = nv
            else:
                out.pop(e, None)
        return FractionElement(Poly(n, out), self.pole, -(v + self.shift), self.f)


def _group_by_derivative(P: WeylElement) -> dict[tuple, dict]:
    """Split P = sum_b (coefficient in x, s) * d^b; coefficients keep x and s slots."""
    sig = P.sig
    n = sig.n
    groups: dict[tuple, dict] = {}
    for m, c in P.terms.items():
        b = m[n:2 * n]
        key = m[:n] + ((m[sig.s_index],) if sig.has_s else ())
        groups.setdefault(b, {})[key] = c
    return groups


def _apply_partials(groups, n, g0: Poly, p0: int, f: Poly, fi: list, expo):
    """sum_b coeff_b * d^b (g0 f^-p0 ...), returning (numerator, pole).

    ``expo(p)`` is the exponent factor produced when differentiating
    ``f^(-p) * (twist)``; everything is in the ambient ring of ``g0``.
    """
    cache: dict[tuple, tuple[Poly, int]] = {(0,) * n: (g0, p0)}

    def deriv(b):
        if b in cache:
            return cache[b]
        i = max(j for j in range(n) if b[j])
        prev = list(b)
        prev[i] -= 1
        g, p = deriv(tuple(prev))
        g2 = g.diff(i) * f + expo(p) * g * fi[i]
        cache[b] = (g2, p + 1)
        return cache[b]

    total = None
    pole = 0
    for b, coeff in groups.items():
        g, p = deriv(b)
        term = coeff * g
        if term.is_zero():
            continue
        if total is None:
            total, pole = term, p
        elif p > pole:
            total = total * f ** (p - pole) + term
            pole = p
        else:
            total = total + term * f ** (pole - p)
    if total is None:
        total = Poly.zero(g0.n)
    return total, pole


def act_on_fs(P: WeylElement, f: Poly, gamma) -> SPolyFrac:
    """Apply ``P`` in D[s] (or D) to ``f^(s + gamma)``."""
    sig = P.sig
    if sig.has_t:
        raise SignatureMismatch("act_on_fs takes operators without t")
    gamma = as_rational(gamma)
    n = sig.n
    N = n + 1
    F = _lift_x(f, 1)
    fi = [F.diff(i) for i in range(n)]
    s = Poly.var(N, n)

    def expo(p):
        return s + (gamma - p)

    groups = {}
    for b, coeffs in _group_by_derivative(P).items():
        terms = {}
        for key, c in coeffs.items():
            e = key if sig.has_s else key + (0,)
            terms[e] = c
        groups[b] = Poly(N, terms)
    num, pole = _apply_partials(groups, n, Poly.one(N), 0, F, fi, expo)
    return SPolyFrac(num, pole, gamma, f)


def act_on_fraction(P: WeylElement, u: FractionElement, f: Poly | None = None) -> FractionElement:
    """Apply a differential operator (no s, no t) to a twisted fraction."""
    sig = P.sig
    if sig.has_s or sig.has_t:
        raise SignatureMismatch("act_on_fraction takes plain differential operators")
    f = u.f if f is None else f
    n = sig.n
    fi = [f.diff(i) for i in range(n)]
    alpha = u.twist

    def expo(p):
        return Poly.const(n, -(p + alpha))

    groups = {b: Poly(n, coeffs) for b, coeffs in _group_by_derivative(P).items()}
    num, pole = _apply_partials(groups, n, u.numerator, u.pole, f, fi, expo)
    return FractionElement(num, pole, alpha, f)
