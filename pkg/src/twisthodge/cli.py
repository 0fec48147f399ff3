"""Command-line driver: job files, polynomial parsing and canonical reports.

A job file holds ``key: value`` lines::

    vars: x, y
    f: x^2 + y^3
    alpha: 1/6
    k_max: 1
    assert_parametrically_prime: true

Exit codes: 0 success, 2 hypothesis violation, 3 oracle inconclusive,
4 parse or configuration error, 5 internal inconsistency.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .annbs import (
    BSPolyData,
    CertificateError,
    NoEulerField,
    RootSanityError,
    ann_D,
    ann_fs_order1,
    beta_polynomial,
    bs_polynomial,
    euler_field,
    root_window_check,
    symbol_ideal,
)
from .arith import UniPoly, as_rational, fmt_rational
from .hodge import (
    Hypotheses,
    WindowFailure,
    build_gamma,
    build_gamma_twisted,
    hodge_ideal_zero,
    hodge_step,
)
from .oracle import (
    SELECTORS,
    OracleContext,
    OracleUnsupported,
    TruncationBudget,
    find_weights,
    hodge_via_v0,
    newton_multiplier,
    verify_paper_identities,
)
from .polynomial import Poly, grlex_key

EXIT_OK = 0
EXIT_HYPOTHESIS = 2
EXIT_INCONCLUSIVE = 3
EXIT_PARSE = 4
EXIT_INCONSISTENT = 5


class ParseError(ValueError):
    """Malformed polynomial text or job file; ``position`` is a 0-based offset when known."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(message + where)


class JobFailure(Exception):
    def __init__(self, code: int, message: str, report: "Report | None" = None):
        self.code = code
        self.report = report
        super().__init__(message)


# ---------------------------------------------------------------- polynomial parsing

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\^)|(.))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1):
            lit = m.group(1)
            if "/" in lit and int(lit.split("/")[1]) == 0:
                raise ParseError("zero denominator", m.start(1))
            out.append(("num", lit, m.start(1)))
        elif m.group(2):
            out.append(("id", m.group(2), m.start(2)))
        elif m.group(3):
            out.append(("op", "^", m.start(3)))
        elif m.group(4):
            ch = m.group(4)
            if ch not in "+-*()":
                raise ParseError(f"unexpected character {ch!r}", m.start(4))
            out.append(("op", ch, m.start(4)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.toks = _tokenize(text)
        self.i = 0
        self.vars = {v: j for j, v in enumerate(variables)}
        self.n = len(variables)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_op(self, ch: str):
        kind, val, pos = self.take()
        if (kind, val) != ("op", ch):
            raise ParseError(f"expected {ch!r}", pos)

    def parse(self) -> Poly:
        p = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos)
        return p

    def expr(self) -> Poly:
        p = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            _, op, _ = self.take()
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Poly:
        p = self.unary()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            p = p * self.unary()
        return p

    def unary(self) -> Poly:
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            q = self.unary()
            return -q if val == "-" else q
        return self.power()

    def power(self) -> Poly:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            _, _, pos = self.take()
            kind, val, epos = self.take()
            if kind != "num" or "/" in val:
                raise ParseError("exponent must be a nonnegative integer", pos)
            return base ** int(val)
        return base

    def atom(self) -> Poly:
        kind, val, pos = self.take()
        if kind == "num":
            return Poly.const(self.n, Fraction(val))
        if kind == "id":
            if val not in self.vars:
                raise ParseError(f"unknown variable {val!r}", pos)
            return Poly.var(self.n, self.vars[val])
        if (kind, val) == ("op", "("):
            p = self.expr()
            self.expect_op(")")
            return p
        raise ParseError("expected a number, variable or '('" if kind != "end" else "unexpected end of input", pos)


def parse_polynomial(text: str, variables: Sequence[str]) -> Poly:
    """Parse ``text`` over the ordered ``variables``; no implicit multiplication."""
    if len(set(variables)) != len(variables):
        raise ParseError("variable names must be distinct")
    return _Parser(text, variables).parse()


def serialize_polynomial(p: Poly, variables: Sequence[str]) -> str:
    return p.to_str(variables)


# ---------------------------------------------------------------- job files

_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*\Z")
_RESERVED = {"s", "t", "dt", "f"}


@dataclass
class JobConfig:
    variables: tuple[str, ...]
    f_text: str
    alpha: Fraction = Fraction(0)
    k_max: int = 0
    degree_bound: int = 8
    budget: TruncationBudget = field(default_factory=lambda: TruncationBudget(4, 8, 6))
    assert_parametrically_prime: bool = False
    assert_ann_complete: bool = False

    def __post_init__(self):
        if not self.variables:
            raise ParseError("no variables declared")
        for v in self.variables:
            if not _IDENT.match(v) or v in _RESERVED:
                raise ParseError(f"invalid variable name {v!r}")
            if v.startswith("d") and v[1:] in self.variables:
                raise ParseError(f"variable {v!r} clashes with the derivative of {v[1:]!r}")
        if len(set(self.variables)) != len(self.variables):
            raise ParseError("variable names must be distinct")
        if self.alpha < 0:
            raise ParseError("alpha must be nonnegative")
        if self.k_max < 0 or self.degree_bound < 0:
            raise ParseError("k_max and degree_bound must be nonnegative")

    def polynomial(self) -> Poly:
        return parse_polynomial(self.f_text, self.variables)


_KEYS = {"vars", "f", "alpha", "k_max", "degree_bound", "budget_e", "budget_d", "budget_m",
         "assert_parametrically_prime", "assert_ann_complete"}


def _parse_bool(key: str, value: str) -> bool:
    v = value.strip().lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise ParseError(f"{key}: expected true or false")


def _parse_int(key: str, value: str) -> int:
    try:
        v = int(value.strip())
    except ValueError:
        raise ParseError(f"{key}: expected an integer") from None
    if v < 0:
        raise ParseError(f"{key}: must be nonnegative")
    return v


def parse_config(text: str) -> JobConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if ":" not in stripped:
            raise ParseError(f"line {lineno}: expected 'key: value'")
        key, value = (part.strip() for part in stripped.split(":", 1))
        if key not in _KEYS:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    for key in ("vars", "f"):
        if key not in raw:
            raise ParseError(f"missing required key {key!r}")
    variables = tuple(v for v in re.split(r"[,\s]+", raw["vars"]) if v)
    try:
        alpha = as_rational(raw.get("alpha", "0"))
    except ValueError:
        raise ParseError("alpha: expected a rational p/q") from None
    budget = TruncationBudget(
        _parse_int("budget_e", raw.get("budget_e", "4")),
        _parse_int("budget_d", raw.get("budget_d", "8")),
        _parse_int("budget_m", raw.get("budget_m", "6")),
    )
    cfg = JobConfig(
        variables=variables,
        f_text=raw["f"],
        alpha=alpha,
        k_max=_parse_int("k_max", raw.get("k_max", "0")),
        degree_bound=_parse_int("degree_bound", raw.get("degree_bound", "8")),
        budget=budget,
        assert_parametrically_prime=_parse_bool("assert_parametrically_prime",
                                                raw.get("assert_parametrically_prime", "false")),
        assert_ann_complete=_parse_bool("assert_ann_complete", raw.get("assert_ann_complete", "false")),
    )
    cfg.polynomial()  # surface syntax errors while loading
    return cfg


def load_config(path: str | Path) -> JobConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


# ---------------------------------------------------------------- reports

class Report:
    """Ordered ``key -> str | list[str]`` document with canonical leaf strings."""

    def __init__(self):
        self.items: dict[str, object] = {}

    def put(self, key: str, value) -> None:
        if isinstance(value, (list, tuple)):
            self.items[key] = [str(v) for v in value]
        else:
            self.items[key] = str(value)

    def get(self, key: str):
        return self.items[key]

    def to_text(self) -> str:
        lines = []
        for key, value in self.items.items():
            if isinstance(value, list):
                lines.append(f"{key}:")
                lines.extend(f"  {v}" for v in value)
                if not value:
                    lines[-1] = f"{key}: (none)"
            else:
                lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.items, sort_keys=True, indent=2) + "\n"


def _ideal_str(gens: Sequence[Poly], names: Sequence[str]) -> str:
    ordered = sorted(gens, key=lambda g: grlex_key(g.leading()[0]), reverse=True)
    return "(" + ", ".join(g.to_str(names) for g in ordered) + ")"


def _factored(bs: BSPolyData) -> str:
    parts = []
    for r, m in sorted(bs.roots.entries, key=lambda e: -e[0]):
        lin = UniPoly((-r, Fraction(1))).to_str("s")
        parts.append(f"({lin})" + (f"^{m}" if m > 1 else ""))
    if bs.roots.cofactor.degree > 0:
        parts.append(f"({bs.roots.cofactor.to_str('s')})")
    return "".join(parts) or "1"


def _roots_str(bs: BSPolyData) -> list[str]:
    return [f"{fmt_rational(r)} (multiplicity {m})" for r, m in bs.roots.entries]


# ---------------------------------------------------------------- jobs

@dataclass
class _Prepared:
    cfg: JobConfig
    f: Poly
    bs: BSPolyData
    ann: list


def _prepare(cfg: JobConfig, report: Report) -> _Prepared:
    f = cfg.polynomial()
    if f.is_constant():
        raise ParseError("f must be non-constant")
    names = cfg.variables
    report.put("vars", ", ".join(names))
    report.put("f", f.to_str(names))
    report.put("alpha", fmt_rational(cfg.alpha))
    ann = ann_fs_order1(f, 0)
    try:
        bs = bs_polynomial(f, ann, cfg.assert_ann_complete)
    except (CertificateError, RootSanityError) as exc:
        raise JobFailure(EXIT_INCONSISTENT, str(exc), report) from None
    report.put("b", bs.b.to_str("s"))
    report.put("b_factored", _factored(bs))
    report.put("roots", _roots_str(bs))
    report.put("locality", _locality(f))
    return _Prepared(cfg, f, bs, ann)


def _locality(f: Poly) -> str:
    try:
        find_weights(f)
    except OracleUnsupported:
        return "caveat: global b-function; the local one at the origin may be a proper divisor"
    return "global b-function equals the local one at the origin (f is quasi-homogeneous)"


def _hypothesis_block(cfg: JobConfig, prep: _Prepared, report: Report):
    verdict = root_window_check(prep.bs, cfg.alpha)
    report.put("beta", beta_polynomial(prep.bs, cfg.alpha).to_str("s"))
    report.put("window", "pass" if verdict.passed
               else "fail (roots " + ", ".join(fmt_rational(r) for r in verdict.offending) + ")")
    try:
        E = euler_field(prep.f, 1)
        report.put("euler_field", " + ".join(
            f"({a.to_str(cfg.variables)})*d{v}" for a, v in zip(E.coefficients, cfg.variables) if not a.is_zero()))
    except NoEulerField:
        E = None
        report.put("euler_field", "none found (coefficients of degree <= 1)")
    report.put("assert_parametrically_prime", str(cfg.assert_parametrically_prime).lower())
    report.put("assert_ann_complete", str(cfg.assert_ann_complete).lower())
    return verdict, E


def cmd_bs(cfg: JobConfig, opts) -> tuple[int, Report]:
    report = Report()
    prep = _prepare(cfg, report)
    report.put("certificate", prep.bs.certificate.to_str(cfg.variables))
    report.put("certificate_verified", "true")
    return EXIT_OK, report


def cmd_ann(cfg: JobConfig, opts) -> tuple[int, Report]:
    report = Report()
    f = cfg.polynomial()
    names = cfg.variables
    report.put("vars", ", ".join(names))
    report.put("f", f.to_str(names))
    ann = ann_fs_order1(f, 0)
    report.put("ann_fs", [g.to_str(names) for g in ann])
    report.put("ann_D", [g.to_str(names) for g in ann_D(f, ann)])
    report.put("symbol_ideal", [g.to_str(names) for g in symbol_ideal(ann)])
    report.put("assert_ann_complete", str(cfg.assert_ann_complete).lower())
    return EXIT_OK, report


def _newton_probe(f: Poly, alpha: Fraction, names, report: Report) -> None:
    try:
        lo = newton_multiplier(f, alpha, minus_epsilon=True)
        hi = newton_multiplier(f, 1 + alpha, minus_epsilon=True)
    except ValueError as exc:
        report.put("newton_probe", f"unavailable ({exc})")
        return
    report.put("newton_J(f^(alpha-eps))", _ideal_str(lo, names))
    report.put("newton_J(f^(1+alpha-eps))", _ideal_str(hi, names))


def cmd_hodge0(cfg: JobConfig, opts) -> tuple[int, Report]:
    report = Report()
    prep = _prepare(cfg, report)
    verdict, _ = _hypothesis_block(cfg, prep, report)
    if not verdict.passed:
        raise JobFailure(EXIT_HYPOTHESIS, "root window check failed", report)
    gamma = build_gamma(prep.f, cfg.alpha, prep.bs, prep.ann)
    ideal = hodge_ideal_zero(gamma)
    report.put("gamma_generators", [g.to_str(cfg.variables) for g in gamma.components])
    report.put("gamma_cap_O", _ideal_str(ideal, cfg.variables))
    _newton_probe(prep.f, cfg.alpha, cfg.variables, report)
    return EXIT_OK, report


def _cross_route(ctx: OracleContext, k: int, main, budget: TruncationBudget, bound: int) -> tuple[str, int]:
    """Compare the V^0 route with the main route at ``budget`` and ``budget + 1``."""
    results = []
    for bud in (budget, budget.bump()):
        oracle = hodge_via_v0(ctx, k, bud, bound).form
        if not main.contains(oracle):
            return "inconsistent (oracle span not inside main route)", EXIT_INCONSISTENT
        results.append(oracle == main)
    if all(results):
        return f"pass (budget {_budget_str(budget)} and {_budget_str(budget.bump())})", EXIT_OK
    return "inconclusive (oracle span smaller at budget)", EXIT_INCONCLUSIVE


def _budget_str(b: TruncationBudget) -> str:
    return f"({b.e},{b.d},{b.m})"


def cmd_hodge(cfg: JobConfig, opts) -> tuple[int, Report]:
    report = Report()
    prep = _prepare(cfg, report)
    verdict, E = _hypothesis_block(cfg, prep, report)
    k_max = cfg.k_max if opts.k is None else opts.k
    report.put("k_max", k_max)
    if not verdict.passed:
        raise JobFailure(EXIT_HYPOTHESIS, "root window check failed", report)
    if k_max >= 1 and E is None:
        raise JobFailure(EXIT_HYPOTHESIS, "no Euler vector field; needed for k >= 1", report)
    if k_max >= 1 and not cfg.assert_parametrically_prime:
        raise JobFailure(EXIT_HYPOTHESIS, "k >= 1 needs assert_parametrically_prime: true", report)
    hyp = Hypotheses(True, E, cfg.assert_parametrically_prime, cfg.assert_ann_complete)
    names = cfg.variables
    gamma = build_gamma(prep.f, cfg.alpha, prep.bs, prep.ann, hyp)
    gamma_t = build_gamma_twisted(prep.f, cfg.alpha, prep.bs, prep.ann, hyp)
    report.put("gamma_generators", [g.to_str(names) for g in gamma.components])
    report.put("gamma_cap_O", _ideal_str(hodge_ideal_zero(gamma), names))
    budget = cfg.budget.scaled(opts.budget_scale)
    try:
        ctx = OracleContext(prep.f, cfg.alpha, bs=prep.bs, ann_gens=prep.ann, euler=E)
    except OracleUnsupported as exc:
        ctx = None
        report.put("cross_route", f"skipped ({exc})")
    code = EXIT_OK
    for k in range(k_max + 1):
        step = hodge_step(gamma, k)
        form = step.canonical(cfg.degree_bound)
        twin = hodge_step(gamma_t, k).canonical(cfg.degree_bound)
        report.put(f"k{k}.operators", [op.to_str(names) for op in step.operator_gens])
        report.put(f"k{k}.fractions", [u.to_str(names) for u in step.fraction_gens])
        report.put(f"k{k}.numerator_ideal", _ideal_str(step.numerator_ideal, names) + f" * f^(-{k + 1})")
        report.put(f"k{k}.dimension_at_bound", form.dimension())
        if form != twin:
            report.put(f"k{k}.twisted_route", "mismatch")
            raise JobFailure(EXIT_INCONSISTENT, f"twisted route disagrees at k={k}", report)
        report.put(f"k{k}.twisted_route", "agrees")
        if ctx is not None:
            text, rc = _cross_route(ctx, k, form, budget, cfg.degree_bound)
            report.put(f"k{k}.cross_route", text)
            if rc == EXIT_INCONSISTENT:
                raise JobFailure(rc, f"cross-route mismatch at k={k}", report)
            code = max(code, rc)
    return code, report


def cmd_check(cfg: JobConfig, opts) -> tuple[int, Report]:
    report = Report()
    prep = _prepare(cfg, report)
    verdict, E = _hypothesis_block(cfg, prep, report)
    k_max = cfg.k_max if opts.k is None else opts.k
    report.put("k_max", k_max)
    report.put("symbol_ideal", [g.to_str(cfg.variables) for g in symbol_ideal(prep.ann)])
    problems = []
    if not verdict.passed:
        problems.append("window")
    if k_max >= 1 and E is None:
        problems.append("euler_field")
    if k_max >= 1 and not cfg.assert_parametrically_prime:
        problems.append("parametrically_prime assertion")
    report.put("hypotheses", "satisfied" if not problems else "violated: " + ", ".join(problems))
    return (EXIT_HYPOTHESIS if problems else EXIT_OK), report


def cmd_verify(cfg: JobConfig, opts) -> tuple[int, Report]:
    report = Report()
    prep = _prepare(cfg, report)
    verdict, E = _hypothesis_block(cfg, prep, report)
    selectors = [opts.selector] if opts.selector else list(SELECTORS)
    try:
        ctx = OracleContext(prep.f, cfg.alpha, bs=prep.bs, ann_gens=prep.ann, euler=E)
    except (OracleUnsupported, NoEulerField) as exc:
        raise JobFailure(EXIT_HYPOTHESIS, f"oracle unavailable: {exc}", report) from None
    if E is None:
        raise JobFailure(EXIT_HYPOTHESIS, "oracle needs an Euler vector field", report)
    budget = cfg.budget.scaled(opts.budget_scale)
    k = 1 if opts.k is None else opts.k
    code = EXIT_OK
    for sel in selectors:
        if sel != "generation" and not verdict.passed:
            report.put(sel, "skipped (root window check failed)")
            if opts.selector:
                raise JobFailure(EXIT_HYPOTHESIS, "root window check failed", report)
            continue
        res = verify_paper_identities(sel, ctx, budget, k)
        expected = "pass"
        if sel == "generation" and not res.data.get("predicted_generated", True):
            expected = "fail"
        line = res.verdict + (f": {res.detail}" if res.detail else "")
        if res.witness:
            line += f" [witness: {res.witness}]"
        line += " (as predicted)" if res.verdict == expected else ""
        report.put(sel, line)
        if res.verdict == expected:
            continue
        if res.verdict == "inconclusive":
            code = max(code, EXIT_INCONCLUSIVE)
        else:
            code = EXIT_INCONSISTENT
    return code, report


def cmd_multiplier(cfg: JobConfig, opts) -> tuple[int, Report]:
    report = Report()
    f = cfg.polynomial()
    names = cfg.variables
    if opts.c is None:
        raise ParseError("multiplier needs --c")
    try:
        c = as_rational(opts.c)
    except ValueError:
        raise ParseError("--c: expected a rational p/q") from None
    report.put("f", f.to_str(names))
    report.put("c", fmt_rational(c) + ("-eps" if opts.minus_epsilon else ""))
    try:
        gens = newton_multiplier(f, c, minus_epsilon=opts.minus_epsilon)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    report.put("multiplier_ideal", _ideal_str(gens, names))
    return EXIT_OK, report


COMMANDS = {
    "bs": cmd_bs,
    "ann": cmd_ann,
    "hodge0": cmd_hodge0,
    "hodge": cmd_hodge,
    "check": cmd_check,
    "verify": cmd_verify,
    "multiplier": cmd_multiplier,
}


def run_job(command: str, cfg: JobConfig, opts=None) -> tuple[int, Report]:
    """Run one command; returns ``(exit_code, report)``."""
    opts = opts or argparse.Namespace(k=None, budget_scale=1, selector=None, c=None, minus_epsilon=False)
    try:
        return COMMANDS[command](cfg, opts)
    except JobFailure as exc:
        report = exc.report or Report()
        report.put("error", str(exc))
        return exc.code, report
    except WindowFailure as exc:
        report = Report()
        report.put("error", str(exc))
        return EXIT_HYPOTHESIS, report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twisthodge", description="Twisted Hodge filtration steps of f^(-alpha).")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("job", help="job file of 'key: value' lines")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--k", type=int, default=None, help="filtration level (overrides k_max)")
    p.add_argument("--budget-scale", type=int, default=1, help="multiply the oracle budget")
    p.add_argument("--selector", choices=SELECTORS, default=None, help="single identity check for verify")
    p.add_argument("--c", default=None, help="exponent for multiplier, as p/q")
    p.add_argument("--minus-epsilon", action="store_true", help="multiplier of f^(c-eps)")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    if args.k is not None and args.k < 0 or args.budget_scale < 1:
        print("error: --k must be >= 0 and --budget-scale >= 1", file=sys.stderr)
        return EXIT_PARSE
    try:
        cfg = load_config(args.job)
        code, report = run_job(args.command, cfg, args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    sys.stdout.write(report.to_json() if args.format == "json" else report.to_text())
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
