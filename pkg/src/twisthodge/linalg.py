"""Sparse exact row reduction over QQ.

Rows are ``dict[int, Fraction]`` keyed by column index; smaller column
indices take pivot priority, so callers encode "which coordinates to
eliminate first" in the column numbering.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

try:  # GMP rationals are several times faster than Fraction for elimination
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _Q = Fraction

Row = dict


def _to_q(v):
    return _Q(v.numerator, v.denominator) if isinstance(v, Fraction) else _Q(v)


def _to_fraction(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(int(v.numerator), int(v.denominator))


def _export(row: dict) -> dict:
    return {k: _to_fraction(v) for k, v in row.items()}


def _axpy(row: dict, c: Fraction, other: dict) -> None:
    # row -= c * other, in place
    for k, v in other.items():
        nv = row.get(k, 0) - c * v
        if nv:
            row[k] = nv
        else:
            row.pop(k, None)


class Echelon:
    """Incrementally maintained echelon basis of a row space."""

    def __init__(self):
        self._rows: dict = {}

    @property
    def pivots(self) -> dict:
        """Pivot column -> reduced row, with Fraction entries."""
        return {c: _export(r) for c, r in self._rows.items()}

    def __len__(self) -> int:
        return len(self._rows)

    def reduce(self, row: dict) -> dict:
        """Residual of ``row`` modulo the current span (a new dict)."""
        return _export(self._reduce(row))

    def _reduce(self, row: dict) -> dict:
        row = {k: _to_q(v) for k, v in row.items() if v}
        # pivot rows are kept fully reduced, so one pass suffices
        for c in [c for c in row if c in self._rows]:
            v = row.get(c)
            if v:
                _axpy(row, v, self._rows[c])
        return row

    def add(self, row: dict) -> bool:
        """Insert ``row``; return True when it enlarged the span."""
        res = self._reduce(row)
        if not res:
            return False
        c = min(res)
        inv = 1 / res[c]
        new = {k: v * inv for k, v in res.items()}
        for other in self._rows.values():
            v = other.get(c)
            if v:
                _axpy(other, v, new)
        self._rows[c] = new
        return True

    def contains(self, row: dict) -> bool:
        return not self._reduce(row)

    def extend(self, rows: Iterable[dict]) -> None:
        for r in rows:
            self.add(r)

    def rref(self) -> list[dict]:
        """Reduced rows sorted by pivot column."""
        return [_export(self._rows[c]) for c in sorted(self._rows)]

    def rows_with_pivot_at_least(self, col: int) -> list[dict]:
        """Rows of the RREF whose pivot column is >= ``col``.

        With high-priority coordinates numbered first, these rows span the
        intersection of the row space with the subspace where all columns
        ``< col`` vanish.
        """
        return [r for r in self.rref() if min(r) >= col]


def span_contains(basis: Sequence[dict], row: dict) -> bool:
    ech = Echelon()
    ech.extend(basis)
    return ech.contains(row)


def intersect(us: Sequence[dict], vs: Sequence[dict], width: int) -> list[dict]:
    """Zassenhaus intersection of two row spans; columns must be < ``width``."""
    ech = Echelon()
    for u in us:
        row = dict(u)
        row.update({k + width: v for k, v in u.items()})
        ech.add(row)
    for v in vs:
        ech.add(dict(v))
    out = []
    for r in ech.rref():
        if min(r) >= width:
            out.append({k - width: v for k, v in r.items()})
    return out


def kernel(columns: Sequence[dict]) -> list[dict]:
    """Basis of ``{lam : sum lam_j * columns[j] = 0}`` as sparse dicts over j."""
    width = 1 + max((max(c) for c in columns if c), default=-1)
    ech = Echelon()
    for j, col in enumerate(columns):
        row = dict(col)
        row[width + j] = Fraction(1)
        ech.add(row)
    out = []
    for r in ech.rref():
        if min(r) >= width:
            out.append({k - width: v for k, v in r.items()})
    return out


def solve_in_span(rows: Sequence[dict], target: dict):
    """Coefficients ``lam`` with ``sum lam_i rows[i] = target`` or None."""
    width = 1 + max([max(r) for r in rows if r] + [max(target) if target else -1])
    ech = Echelon()
    for i, r in enumerate(rows):
        row = dict(r)
        row[width + i] = Fraction(1)
        ech.add(row)
    res = ech.reduce(target)
    if any(k < width for k in res):
        return None
    # res = target - sum(lam_i rows[i]) in the tag coordinates negated
    return {k - width: -v for k, v in res.items()}


def solve_linear(equations: Sequence[dict], rhs: Sequence) -> dict | None:
    """One solution of ``sum_j eq[j] * lam_j = rhs`` per equation, or None.

    Unknowns with smaller index are preferred as pivots; free unknowns are 0.
    """
    width = 1 + max((max(e) for e in equations if e), default=-1)
    ech = Echelon()
    for eq, r in zip(equations, rhs):
        row = dict(eq)
        if r:
            row[width] = Fraction(r)
        ech.add(row)
    if width in ech.pivots:
        return None
    return {p: r.get(width, Fraction(0)) for p, r in ech.pivots.items() if r.get(width)}
