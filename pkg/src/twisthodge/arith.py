"""Exact rational scalars and dense univariate polynomials over QQ.

Rationals are :class:`fractions.Fraction`; everything here is exact, there is
no floating point anywhere in the package.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence, Union

Rational = Fraction
Scalar = Union[int, Fraction]

ZERO = Fraction(0)
ONE = Fraction(1)


class InvalidInput(ValueError):
    """Raised when an operation receives input outside its domain."""


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise InvalidInput(f"not a rational literal: {value!r}") from exc
    raise InvalidInput(f"cannot interpret {value!r} as a rational")


def fmt_rational(q: Fraction) -> str:
    """Canonical text form: ``p`` for integers, ``p/q`` otherwise."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _divisors(m: int) -> list[int]:
    m = abs(m)
    small, large = [], []
    d = 1
    while d * d <= m:
        if m % d == 0:
            small.append(d)
            if d * d != m:
                large.append(m // d)
        d += 1
    return small + large[::-1]


@dataclass(frozen=True)
class UniPoly:
    """Dense polynomial in one variable, coefficients lowest degree first."""

    coeffs: tuple[Fraction, ...] = ()

    def __post_init__(self):
        cs = [as_rational(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def constant(cls, c: Scalar) -> "UniPoly":
        return cls((as_rational(c),))

    @classmethod
    def x(cls) -> "UniPoly":
        return cls((ZERO, ONE))

    @classmethod
    def from_roots(cls, roots: Iterable[Fraction]) -> "UniPoly":
        p = cls.constant(1)
        for r in roots:
            p = p * cls((-as_rational(r), ONE))
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else ZERO

    def __add__(self, other: "UniPoly") -> "UniPoly":
        other = _lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (ZERO,) * (n - len(self.coeffs))
        b = other.coeffs + (ZERO,) * (n - len(other.coeffs))
        return UniPoly(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self) -> "UniPoly":
        return UniPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        return self + (-_lift(other))

    def __rsub__(self, other) -> "UniPoly":
        return _lift(other) - self

    def __mul__(self, other) -> "UniPoly":
        other = _lift(other)
        if self.is_zero() or other.is_zero():
            return UniPoly()
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UniPoly(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "UniPoly":
        out = UniPoly.constant(1)
        for _ in range(e):
            out = out * self
        return out

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coeffs)
        q = [ZERO] * max(len(rem) - len(other.coeffs) + 1, 0)
        lc = other.lc
        for k in range(len(q) - 1, -1, -1):
            c = rem[k + other.degree] / lc
            q[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= c * b
        return UniPoly(tuple(q)), UniPoly(tuple(rem))

    def __call__(self, x: Scalar) -> Fraction:
        acc = ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose_linear(self, a: Scalar, b: Scalar) -> "UniPoly":
        """Return ``p(a*x + b)``."""
        lin = UniPoly((as_rational(b), as_rational(a)))
        acc = UniPoly()
        for c in reversed(self.coeffs):
            acc = acc * lin + UniPoly.constant(c)
        return acc

    def monic(self) -> "UniPoly":
        if self.is_zero():
            raise InvalidInput("the zero polynomial has no monic form")
        return UniPoly(tuple(c / self.lc for c in self.coeffs))

    def primitive_integer(self) -> tuple[int, ...]:
        """Integer coefficients with content 1 and positive leading term."""
        den = lcm(*(c.denominator for c in self.coeffs)) if self.coeffs else 1
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = gcd(g, v)
        g = g or 1
        if ints and ints[-1] < 0:
            g = -g
        return tuple(v // g for v in ints)

    def to_str(self, var: str = "s") -> str:
        if self.is_zero():
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            if k == 0:
                mono = ""
            elif k == 1:
                mono = var
            else:
                mono = f"{var}^{k}"
            if not mono:
                body = fmt_rational(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{fmt_rational(abs(c))}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        head_sign, head = parts[0]
        out = ("-" if head_sign == "-" else "") + head
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self) -> str:
        return self.to_str()


def _lift(p) -> UniPoly:
    if isinstance(p, UniPoly):
        return p
    return UniPoly.constant(p)


@dataclass(frozen=True)
class RootList:
    """Rational roots with multiplicities plus the root-free cofactor.

    ``lead * prod (x - r)^m * cofactor`` reproduces the input, where the
    cofactor is monic.
    """

    entries: tuple[tuple[Fraction, int], ...]
    cofactor: UniPoly
    lead: Fraction

    def roots(self) -> list[Fraction]:
        return [r for r, _ in self.entries]

    def multiplicity(self, r: Fraction) -> int:
        for root, m in self.entries:
            if root == r:
                return m
        return 0

    def reconstruct(self) -> UniPoly:
        p = UniPoly.constant(self.lead) * self.cofactor
        for r, m in self.entries:
            p = p * UniPoly((-r, ONE)) ** m
        return p


def rational_roots(p: UniPoly) -> RootList:
    """All rational roots of ``p`` with multiplicities (rational root theorem)."""
    if p.is_zero():
        raise InvalidInput("rational_roots of the zero polynomial")
    lead = p.lc
    work = p.monic()
    found: dict[Fraction, int] = {}
    # zero roots first, then candidates p/q from the primitive integer form
    while work.degree > 0 and work.coeffs[0] == 0:
        work = UniPoly(work.coeffs[1:])
        found[ZERO] = found.get(ZERO, 0) + 1
    while work.degree > 0:
        ints = work.primitive_integer()
        hit = None
        for q in _divisors(ints[-1]):
            for num in _divisors(ints[0]):
                for cand in (Fraction(num, q), Fraction(-num, q)):
                    if work(cand) == 0:
                        hit = cand
                        break
                if hit is not None:
                    break
            if hit is not None:
                break
        if hit is None:
            break
        quo, rem = work.divmod(UniPoly((-hit, ONE)))
        assert rem.is_zero()
        work = quo
        found[hit] = found.get(hit, 0) + 1
    entries = tuple(sorted(found.items()))
    out = RootList(entries=entries, cofactor=work.monic() if work.degree >= 0 else work, lead=lead)
    if out.reconstruct() != p:
        raise ArithmeticError("root extraction failed to reproduce the input")
    return out


def poly_from_linear_factors(entries: Sequence[tuple[Scalar, int]]) -> UniPoly:
    """``prod (x + shift)^mult``; the empty product is 1."""
    p = UniPoly.constant(1)
    for shift, mult in entries:
        p = p * UniPoly((as_rational(shift), ONE)) ** mult
    return p
