from __future__ import annotations

import json
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import CUSP, rand_poly
from twisthodge.cli import (
    EXIT_HYPOTHESIS,
    EXIT_OK,
    EXIT_PARSE,
    JobConfig,
    ParseError,
    main,
    parse_config,
    parse_polynomial,
    run_job,
    serialize_polynomial,
)
from twisthodge.polynomial import Poly

JOBS = Path(__file__).resolve().parent.parent / "jobs"
XY = ("x", "y")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------- parser

def test_parse_cusp():
    assert parse_polynomial("x^2 + y^3", XY) == CUSP


def test_exact_cancellation():
    assert parse_polynomial("1/2*x - 1/2*x", XY).is_zero()


def test_negative_exponent_position():
    with pytest.raises(ParseError) as err:
        parse_polynomial("x^-1", XY)
    assert err.value.position == 1


@pytest.mark.parametrize("text", ["2x", "x y", "(x)(y)", "x^", "x +", "x^1/2", "x $ y", "1/0", ")"])
def test_syntax_errors(text):
    with pytest.raises(ParseError):
        parse_polynomial(text, XY)


def test_unknown_variable():
    with pytest.raises(ParseError) as err:
        parse_polynomial("x + z", XY)
    assert err.value.position == 4


def test_parser_precedence():
    x, y = Poly.var(2, 0), Poly.var(2, 1)
    assert parse_polynomial("-x^2", XY) == -(x * x)
    assert parse_polynomial("(x + y)^2 - 2*x*y", XY) == x * x + y * y
    assert parse_polynomial("3/4 * (x - -y)", XY) == (x + y).scale(Fraction(3, 4))
    assert parse_polynomial("x^0", XY) == Poly.one(2)


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3))
def test_parser_round_trip(seed, n):
    names = ("x", "y", "z")[:n]
    p = rand_poly(random.Random(seed), n, max_deg=6, max_terms=6)
    text = serialize_polynomial(p, names)
    assert parse_polynomial(text, names) == p


# ---------------------------------------------------------------- configs

def test_config_defaults():
    cfg = parse_config("vars: x, y\nf: x^2 + y^3  # cusp\n")
    assert cfg.variables == XY and cfg.alpha == 0 and cfg.k_max == 0
    assert cfg.budget.e == 4 and cfg.budget.d == 8 and cfg.budget.m == 6
    assert not cfg.assert_parametrically_prime


@pytest.mark.parametrize("text", [
    "f: x",
    "vars: x\n",
    "vars: x\nf: x\nalpha: -1/2",
    "vars: x\nf: x\nalpha: half",
    "vars: x\nf: x\nk_max: -1",
    "vars: x\nf: x\ncolour: red",
    "vars: x\nf: x\nf: x",
    "vars: x, x\nf: x",
    "vars: s\nf: s",
    "vars: x, dx\nf: x",
    "vars: x\nf: 2x",
    "vars: x\nf: x\nassert_ann_complete: maybe",
    "vars: x\njust words",
])
def test_config_errors(text):
    with pytest.raises(ParseError):
        parse_config(text)


def test_config_error_exit_code(tmp_path, capsys):
    job = tmp_path / "bad.txt"
    job.write_text("vars: x\nf: x^-1\n")
    code, out, err = run(capsys, "bs", job)
    assert code == EXIT_PARSE and out == "" and "position" in err
    code, _, _ = run(capsys, "bs", tmp_path / "missing.txt")
    assert code == EXIT_PARSE
    code, _, _ = run(capsys, "frobnicate", job)
    assert code == EXIT_PARSE


def test_job_config_validation():
    with pytest.raises(ParseError):
        JobConfig(variables=(), f_text="1")


# ---------------------------------------------------------------- jobs

def _lines(text):
    return dict(line.split(": ", 1) for line in text.splitlines() if ": " in line and not line.startswith(" "))


def test_bs_command(capsys):
    code, out, _ = run(capsys, "bs", JOBS / "cusp.txt")
    assert code == EXIT_OK
    rep = _lines(out)
    assert rep["b_factored"] == "(s + 5/6)(s + 1)(s + 7/6)"
    assert rep["certificate_verified"] == "true"


@pytest.fixture(scope="module")
def cusp_hodge():
    return run_job("hodge", parse_config((JOBS / "cusp.txt").read_text()))


def test_cusp_hodge_job(cusp_hodge):
    code, report = cusp_hodge
    assert code == EXIT_OK
    assert report.get("b_factored") == "(s + 5/6)(s + 1)(s + 7/6)"
    assert report.get("beta") == "s + 1/6"
    assert report.get("window") == "pass"
    assert report.get("gamma_cap_O") == "(x, y)"
    for k in (0, 1):
        assert report.get(f"k{k}.twisted_route") == "agrees"
        assert report.get(f"k{k}.cross_route").startswith("pass")
    assert report.get("assert_parametrically_prime") == "true"


def test_quadric_hodge_job(capsys):
    code, out, _ = run(capsys, "hodge", JOBS / "quadric.txt")
    assert code == EXIT_HYPOTHESIS
    assert "window: fail (roots -2)" in out


def test_smooth_half_probe(capsys):
    code, out, _ = run(capsys, "hodge0", JOBS / "smooth_half.txt")
    assert code == EXIT_OK
    rep = _lines(out)
    assert rep["gamma_cap_O"] == "(x)"
    assert rep["newton_J(f^(alpha-eps))"] == "(1)"
    assert rep["newton_J(f^(1+alpha-eps))"] == "(x)"


def test_missing_assertion_is_hypothesis_violation(tmp_path, capsys):
    job = tmp_path / "cusp.txt"
    job.write_text("vars: x, y\nf: x^2 + y^3\nk_max: 1\n")
    code, out, _ = run(capsys, "hodge", job)
    assert code == EXIT_HYPOTHESIS and "assert_parametrically_prime" in out
    code, out, _ = run(capsys, "check", job)
    assert code == EXIT_HYPOTHESIS and "violated: parametrically_prime assertion" in out
    code, _, _ = run(capsys, "hodge", job, "--k", 0)
    assert code == EXIT_OK


def test_check_and_ann(capsys):
    code, out, _ = run(capsys, "check", JOBS / "cusp.txt")
    assert code == EXIT_OK and "hypotheses: satisfied" in out
    code, out, _ = run(capsys, "ann", JOBS / "cusp.txt")
    assert code == EXIT_OK and "ann_fs:" in out and "symbol_ideal:" in out


def test_verify_quadric_generation(capsys):
    code, out, _ = run(capsys, "verify", JOBS / "quadric.txt")
    assert code == EXIT_OK
    assert "generation: fail" in out and "root -2" in out and "(as predicted)" in out
    assert "phi-twist: skipped" in out
    code, _, _ = run(capsys, "verify", JOBS / "quadric.txt", "--selector", "phi-twist")
    assert code == EXIT_HYPOTHESIS


def test_verify_single_selector(capsys):
    code, out, _ = run(capsys, "verify", JOBS / "smooth_half.txt", "--selector", "vind-bfunction")
    assert code == EXIT_OK and "vind-bfunction: pass" in out


def test_multiplier_command(capsys):
    code, out, _ = run(capsys, "multiplier", JOBS / "cusp.txt", "--c", "1", "--minus-epsilon")
    assert code == EXIT_OK and "multiplier_ideal: (x, y)" in out
    code, out, _ = run(capsys, "multiplier", JOBS / "cusp.txt", "--c", "5/6", "--minus-epsilon")
    assert "multiplier_ideal: (1)" in out
    code, _, _ = run(capsys, "multiplier", JOBS / "cusp.txt")
    assert code == EXIT_PARSE


def test_json_format(capsys):
    code, out, _ = run(capsys, "hodge", JOBS / "smooth_half.txt", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["gamma_cap_O"] == "(x)"
    assert isinstance(doc["k2.fractions"], list)
    assert list(doc) == sorted(doc)


@pytest.mark.parametrize("cmd,job,extra", [("hodge", "smooth_half.txt", ()), ("hodge0", "node.txt", ()),
                                           ("bs", "cusp_twisted.txt", ()), ("hodge0", "cusp.txt", ())])
def test_byte_identical_reruns(capsys, cmd, job, extra):
    first = run(capsys, cmd, JOBS / job, *extra)
    second = run(capsys, cmd, JOBS / job, *extra)
    assert first == second and first[0] == EXIT_OK
