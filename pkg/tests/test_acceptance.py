"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` (the lines are printed
even without ``-s``).
"""
from __future__ import annotations

import random
import time
from fractions import Fraction

import pytest

from helpers import CUSP, HODGE_FIXTURES, NODE, QUADRIC, X, rand_nonzero_weyl, rand_poly, rand_weyl
from twisthodge.annbs import (
    ann_fs_order1,
    bs_polynomial,
    euler_field,
    root_window_check,
    verify_certificate,
)
from twisthodge.arith import UniPoly
from twisthodge.cli import parse_polynomial, serialize_polynomial
from twisthodge.groebner import buchberger, grlex_order, sharp_order_key
from twisthodge.hodge import Hypotheses, build_gamma, build_gamma_twisted, hodge_ideal_zero, hodge_step
from twisthodge.oracle import (
    SELECTORS,
    OracleContext,
    TruncationBudget,
    hodge_via_v0,
    newton_multiplier,
    verify_paper_identities,
)
from twisthodge.weyl import AlgebraSignature, WeylElement, act_on_fs, sharp_order

F = Fraction
D = 8
BUDGET = TruncationBudget(4, 8, 6)


@pytest.fixture
def emit(capsys):
    def _emit(name: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
    return _emit


def _lin(*roots):
    p = UniPoly.constant(1)
    for r in roots:
        p = p * UniPoly((F(r), F(1)))
    return p


def _hyp(f):
    return Hypotheses(True, euler_field(f, 1), parametrically_prime=True)


def test_bernstein_sato_fixtures(emit):
    cases = [("x", X, _lin(1)), ("x^2+y^2", NODE, _lin(1, 1)),
             ("x^2+y^3", CUSP, _lin(1, F(5, 6), F(7, 6))), ("x^2+y^2+z^2+w^2", QUADRIC, _lin(1, 2))]
    failures = []
    times = []
    for name, f, expected in cases:
        t0 = time.perf_counter()
        bs = bs_polynomial(f)
        ok = bs.b == expected
        lhs = act_on_fs(bs.certificate, f, 1)
        verify_certificate(bs.certificate, f, bs.b)
        ok = ok and lhs.pole == 1
        dt = time.perf_counter() - t0
        times.append(dt)
        if not ok or dt >= 10:
            failures.append(f"{name} ({bs.b.to_str('s')}, {dt:.2f}s)")
    detail = "; ".join(failures) or "max time %.2fs" % max(times)
    emit("Bernstein-Sato fixtures with certificates", not failures, detail)
    assert not failures


def _ideal_names(polys, names):
    return sorted(p.to_str(names) for p in polys)


def test_order_zero_fixtures(emit):
    failures = []
    cases = [(CUSP, F(0), ["x", "y"], ["x", "y"]), (X, F(0), ["x"], ["1"]), (X, F(1, 2), ["x"], ["x"])]
    for f, alpha, names, expected in cases:
        t0 = time.perf_counter()
        gamma = build_gamma(f, alpha, bs_polynomial(f))
        got = _ideal_names(hodge_ideal_zero(gamma), names)
        dt = time.perf_counter() - t0
        if got != expected or dt >= 10:
            failures.append(f"{f.to_str(names)} alpha={alpha}: {got} ({dt:.2f}s)")
    newton = _ideal_names(newton_multiplier(CUSP, 1, minus_epsilon=True), ["x", "y"])
    if newton != ["x", "y"]:
        failures.append(f"Newton candidate {newton}")
    emit("order-zero fixtures and Newton agreement", not failures, "; ".join(failures))
    assert not failures


def test_cross_route_equality(emit):
    t0 = time.perf_counter()
    failures = []
    checked = 0
    for name, f, alphas in HODGE_FIXTURES:
        bs = bs_polynomial(f)
        for alpha in alphas:
            if not root_window_check(bs, alpha).passed:
                continue
            gamma = build_gamma(f, alpha, bs, hypotheses=_hyp(f))
            ctx = OracleContext(f, alpha, bs=bs)
            for k in range(3):
                main = hodge_step(gamma, k).canonical(D)
                for bud in (BUDGET, BUDGET.bump()):
                    oracle = hodge_via_v0(ctx, k, bud, D).form
                    checked += 1
                    if oracle != main:
                        failures.append(f"{name} alpha={alpha} k={k} budget={bud}")
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 300
    emit("cross-route equality", ok, "; ".join(failures) or f"{checked} comparisons in {elapsed:.1f}s")
    assert ok


def test_identity_suite(emit):
    failures = []
    for alpha in (F(0), F(1, 6)):
        ctx = OracleContext(CUSP, alpha)
        for sel in SELECTORS:
            rep = verify_paper_identities(sel, ctx, BUDGET)
            if rep.verdict != "pass":
                failures.append(f"{sel} alpha={alpha}: {rep.verdict} {rep.detail} {rep.witness}")
    rep = verify_paper_identities("generation", OracleContext(QUADRIC, 0), BUDGET, k=1)
    if rep.verdict != "fail" or rep.witness != "root -2":
        failures.append(f"quadric generation: {rep.verdict} {rep.witness}")
    emit("identity suite", not failures, "; ".join(failures))
    assert not failures


_ENGINE_IDEALS = {
    "cusp-ann+f": lambda: ann_fs_order1(CUSP) + [WeylElement.from_poly(ann_fs_order1(CUSP)[0].sig, CUSP)],
    "node-gamma": lambda: build_gamma(NODE, F(1, 2), bs_polynomial(NODE)).components,
    "cusp-gamma": lambda: build_gamma(CUSP, F(1, 6), bs_polynomial(CUSP)).components,
}


def test_engine_property_suites(emit):
    rng = random.Random(20240601)
    failures = []
    triples = 0
    for _ in range(1000):
        sig = AlgebraSignature(rng.choice([1, 2]), has_s=rng.random() < 0.3)
        P, Q, R = (rand_weyl(rng, sig) for _ in range(3))
        triples += 1
        if (P * Q) * R != P * (Q * R):
            failures.append("associativity")
            break
    for name, make in _ENGINE_IDEALS.items():
        gens = list(make())
        order = sharp_order_key(gens[0].sig)
        ref = buchberger(gens, order).basis
        for _ in range(10):
            shuffled = list(gens)
            rng.shuffle(shuffled)
            if buchberger(shuffled, order).basis != ref:
                failures.append(f"shuffle {name}")
                break
        for order in (grlex_order(), sharp_order_key(gens[0].sig)):
            gb = buchberger(gens, order, track=True)
            for g, cof in zip(gb.basis, gb.cofactors):
                total = WeylElement.zero(g.sig)
                for j, c in cof.items():
                    total = total + c * gens[j]
                if total != g:
                    failures.append(f"certificate {name}")
    sig = AlgebraSignature(2, has_s=True)
    for _ in range(300):
        P, Q = rand_nonzero_weyl(rng, sig), rand_nonzero_weyl(rng, sig)
        if sharp_order(P * Q) != sharp_order(P) + sharp_order(Q):
            failures.append("sharp additivity")
            break
    for _ in range(300):
        n = rng.randint(1, 3)
        names = ("x", "y", "z")[:n]
        p = rand_poly(rng, n, max_deg=6, max_terms=6)
        if parse_polynomial(serialize_polynomial(p, names), names) != p:
            failures.append("parser round-trip")
            break
    emit("engine property suites", not failures, "; ".join(failures) or f"{triples} associativity triples")
    assert not failures


def test_twisted_route_equivalence(emit):
    failures = []
    for name, f, alphas in HODGE_FIXTURES:
        bs = bs_polynomial(f)
        for alpha in alphas:
            g = build_gamma(f, alpha, bs, hypotheses=_hyp(f))
            gt = build_gamma_twisted(f, alpha, bs, hypotheses=_hyp(f))
            for k in range(3):
                if hodge_step(g, k).canonical(D) != hodge_step(gt, k).canonical(D):
                    failures.append(f"{name} alpha={alpha} k={k}")
    emit("twisted-route equivalence", not failures, "; ".join(failures))
    assert not failures
