"""Commutative multivariate polynomials over QQ in a fixed number of variables."""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

from .arith import as_rational, fmt_rational

Exps = tuple


def grlex_key(m: Exps):
    return (sum(m), m)


class Poly:
    """Sparse polynomial: ``terms`` maps exponent tuples to nonzero Fractions."""

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Mapping[Exps, object] | None = None):
        self.n = n
        clean = {}
        if terms:
            for m, c in terms.items():
                if c:
                    if len(m) != n:
                        raise ValueError(f"exponent {m} does not have length {n}")
                    clean[tuple(m)] = c if isinstance(c, Fraction) else as_rational(c)
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, n: int, terms: dict) -> "Poly":
        p = cls.__new__(cls)
        p.n = n
        p.terms = terms
        p._hash = None
        return p

    # constructors
    @classmethod
    def zero(cls, n: int) -> "Poly":
        return cls._raw(n, {})

    @classmethod
    def const(cls, n: int, c) -> "Poly":
        c = as_rational(c)
        return cls._raw(n, {(0,) * n: c} if c else {})

    @classmethod
    def one(cls, n: int) -> "Poly":
        return cls.const(n, 1)

    @classmethod
    def var(cls, n: int, i: int) -> "Poly":
        e = [0] * n
        e[i] = 1
        return cls._raw(n, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, exps: Sequence[int], c=1) -> "Poly":
        return cls(len(exps), {tuple(exps): c})

    # basic predicates
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.n == other.n and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.const(self.n, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    # arithmetic
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.n != self.n:
                raise ValueError("polynomials live in different rings")
            return other
        return Poly.const(self.n, other)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Poly._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def scale(self, c) -> "Poly":
        c = as_rational(c)
        if not c:
            return Poly.zero(self.n)
        return Poly._raw(self.n, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(other)
        other = self._coerce(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                v = out.get(m, 0) + c1 * c2
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Poly._raw(self.n, out)

    __rmul__ = __mul__

    def mul_monomial(self, exps: Exps, c=1) -> "Poly":
        c = as_rational(c)
        return Poly._raw(
            self.n, {tuple(a + b for a, b in zip(m, exps)): v * c for m, v in self.terms.items()}
        )

    def __pow__(self, e: int) -> "Poly":
        out = Poly.one(self.n)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def diff(self, i: int) -> "Poly":
        out = {}
        for m, c in self.terms.items():
            if m[i]:
                mm = list(m)
                mm[i] -= 1
                out[tuple(mm)] = c * m[i]
        return Poly._raw(self.n, out)

    def leading(self, key=grlex_key) -> tuple[Exps, Fraction]:
        m = max(self.terms, key=key)
        return m, self.terms[m]

    def divexact(self, g: "Poly") -> "Poly | None":
        """Quotient ``self / g`` if ``g`` divides ``self``, else None."""
        if g.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        lm_g, lc_g = g.leading()
        rem = Poly._raw(self.n, dict(self.terms))
        quo: dict = {}
        while rem.terms:
            lm_r, lc_r = rem.leading()
            if any(a < b for a, b in zip(lm_r, lm_g)):
                return None
            e = tuple(a - b for a, b in zip(lm_r, lm_g))
            c = lc_r / lc_g
            quo[e] = quo.get(e, 0) + c
            rem = rem - g.mul_monomial(e, c)
        return Poly._raw(self.n, {m: c for m, c in quo.items() if c})

    def evaluate(self, point: Sequence) -> Fraction:
        acc = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for v, e in zip(point, m):
                if e:
                    t *= as_rational(v) ** e
            acc += t
        return acc

    def weighted_degrees(self, w: Sequence[Fraction]) -> set:
        return {sum(a * b for a, b in zip(w, m)) for m in self.terms}

    def content_normalized(self) -> "Poly":
        """Integer coefficients, content 1, positive grlex-leading coefficient."""
        if not self.terms:
            return self
        den = lcm(*(c.denominator for c in self.terms.values()))
        num = 0
        for c in self.terms.values():
            num = gcd(num, int(c * den))
        lm, lc = self.leading()
        f = Fraction(den, num)
        if lc < 0:
            f = -f
        return self.scale(f)

    def to_str(self, names: Sequence[str]) -> str:
        return format_terms(self.terms, names)

    def __repr__(self) -> str:
        names = [f"x{i + 1}" for i in range(self.n)]
        return f"Poly({self.to_str(names)})"


def mono_str(m: Exps, names: Sequence[str]) -> str:
    parts = []
    for e, name in zip(m, names):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_terms(terms: Mapping[Exps, Fraction], names: Sequence[str], key=grlex_key) -> str:
    """Canonical text: terms in descending order of ``key``, ``p/q`` coefficients."""
    if not terms:
        return "0"
    out = []
    for i, m in enumerate(sorted(terms, key=key, reverse=True)):
        c = terms[m]
        mono = mono_str(m, names)
        mag = abs(c)
        if not mono:
            body = fmt_rational(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{fmt_rational(mag)}*{mono}"
        if i == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append(("- " if c < 0 else "+ ") + body)
    return " ".join(out)


def monomials_up_to(n: int, deg: int) -> list[Exps]:
    """All exponent tuples of total degree <= deg, grlex ascending."""
    out: list[Exps] = []

    def rec(prefix: list[int], left: int, k: int):
        if k == n:
            out.append(tuple(prefix))
            return
        for e in range(left + 1):
            rec(prefix + [e], left - e, k + 1)

    rec([], deg, 0)
    return sorted(out, key=grlex_key)


def monomials_of_weight(w: Sequence[Fraction], target: Fraction) -> list[Exps]:
    """Exponent tuples with ``sum w_i a_i == target`` (all weights positive)."""
    n = len(w)
    out: list[Exps] = []
    if target < 0:
        return out

    def rec(prefix: list[int], left: Fraction, k: int):
        if k == n - 1:
            e = left / w[k]
            if e.denominator == 1 and e >= 0:
                out.append(tuple(prefix + [int(e)]))
            return
        e = 0
        while e * w[k] <= left:
            rec(prefix + [e], left - e * w[k], k + 1)
            e += 1

    rec([], Fraction(target), 0)
    return sorted(out, key=grlex_key)
