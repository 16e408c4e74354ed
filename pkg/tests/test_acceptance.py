"""Numbered acceptance criteria, one test each, printing a PASS/FAIL line."""

import itertools
import math
import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

import oracles
from twistlab import arith, cli, conditions, curves, density, qexp
from twistlab.conditions import ProductCharacter

pytestmark = pytest.mark.acceptance

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="module")
def e11():
    return cli.load_curve("11a1")


def test_criterion_01_symbols(criterion):
    t0 = time.perf_counter()
    mismatches = 0
    for q in arith.sieve_primes(1000):
        if q == 2:
            continue
        for a in range(q):
            mismatches += arith.jacobi(a, q) != oracles.euler_legendre(a, q)
    rng = random.Random(1)
    pairs = 0
    recip_bad = 0
    while pairs < 10**4:
        m = rng.randrange(1, 10**9, 2)
        n = rng.randrange(1, 10**9, 2)
        if math.gcd(m, n) != 1:
            continue
        pairs += 1
        sign = -1 if ((m - 1) // 2) * ((n - 1) // 2) % 2 else 1
        recip_bad += arith.jacobi(m, n) * arith.jacobi(n, m) != sign
    dt = time.perf_counter() - t0
    criterion(1, mismatches == 0 and recip_bad == 0 and dt < 5,
              f"euler mismatches={mismatches} reciprocity failures={recip_bad}/{pairs} time={dt:.2f}s")


def test_criterion_02_extended_symbol(criterion):
    grid = [(c, d) for c in range(-200, 201) for d in range(-199, 200, 2)]
    t0 = time.perf_counter()
    got = [arith.paper_qrs(c, d) for c, d in grid]
    dt = time.perf_counter() - t0
    bad = sum(g != oracles.qrs_case_table(c, d) for g, (c, d) in zip(got, grid))
    criterion(2, bad == 0 and dt < 1, f"grid={len(grid)} mismatches={bad} time={dt:.2f}s")


def test_criterion_03_point_counting(criterion, e11):
    t0 = time.perf_counter()
    A, B = e11.short_model()
    bad, n = [], 0
    for ell in arith.sieve_primes(2000):
        if e11.is_bad(ell):
            continue
        ex = curves.trace_of_frobenius(e11, ell, "exhaustive").a_ell
        if ell > 3:
            n += 1
            if curves.trace_bsgs(A, B, ell) != ex:
                bad.append(ell)
    fq2_bad = []
    for ell in arith.sieve_primes(51):
        if e11.is_bad(ell):
            continue
        a = curves.trace_of_frobenius(e11, ell).a_ell
        if oracles.count_points_fq2(e11.a_invariants, ell) != ell * ell + 1 - (a * a - 2 * ell):
            fq2_bad.append(ell)
    dt = time.perf_counter() - t0
    criterion(3, not bad and not fq2_bad and dt < 30,
              f"bsgs primes={n} mismatches={bad} F_l^2 mismatches={fq2_bad} time={dt:.2f}s")


def test_criterion_04_hecke_algebra(criterion):
    t0 = time.perf_counter()
    B = 10**5
    ok = True
    windows = []
    for F in (qexp.shimura_theta(3, 1, B), qexp.twist_qexp(qexp.theta_series(B), -4)):
        ab = qexp.hecke_Tp2(qexp.hecke_Tp2(F, 5).series, 7).series
        ba = qexp.hecke_Tp2(qexp.hecke_Tp2(F, 7).series, 5).series
        n = min(ab.precision, ba.precision)
        windows.append(n)
        ok &= n > 0 and ab.coeffs[:n] == ba.coeffs[:n]
    theta = qexp.theta_series(B)
    twisted = qexp.twist_qexp(theta, -4)
    eig = {}
    for p in (5, 7):
        lam = qexp.eigen_check(theta, p, B // (p * p))
        mu = qexp.eigen_check(twisted, p, B // (p * p))
        eig[p] = (lam, mu)
        ok &= lam is not None and mu == lam * arith.kronecker_chi(-4, p * p)
    dt = time.perf_counter() - t0
    detail = ", ".join(f"p={p} lambda={lam} twisted={mu}" for p, (lam, mu) in eig.items())
    criterion(4, ok and dt < 10, f"commute windows={windows} {detail} time={dt:.2f}s")


def test_criterion_05_twist_compatibility(criterion, e11):
    t0 = time.perf_counter()
    bad = []
    counts = {}
    for d in (-3, -7, 5):
        D = arith.fundamental_discriminant(d)
        T = curves.quadratic_twist(e11, d, conductor=11 * D * D)
        n = 0
        for ell in arith.sieve_primes(10**4):
            if T.is_bad(ell) or e11.is_bad(ell):
                continue
            lhs = curves.trace_of_frobenius(T, ell).a_ell
            rhs = arith.kronecker_chi(D, ell) * curves.trace_of_frobenius(e11, ell).a_ell
            if lhs != rhs:
                bad.append((d, ell))
            n += 1
            if n == 50:
                break
        counts[d] = n
    dt = time.perf_counter() - t0
    ok = not bad and all(n == 50 for n in counts.values()) and dt < 5
    criterion(5, ok, f"primes per d={counts} mismatches={bad} time={dt:.2f}s")


def test_criterion_06_discriminant_density(criterion, e11):
    t0 = time.perf_counter()
    total = density.empirical_discriminant_density(e11, 10**6)
    fams = density.empirical_discriminant_density(e11, 10**6, p=7)
    dt = time.perf_counter() - t0
    target = Fraction(1, 4) * Fraction(5, 11)
    err = abs(total.empirical - target)
    rates = [b.empirical for b in fams.breakdown]
    spread = max(abs(a - b) for a, b in itertools.combinations(rates, 2))
    ok = err < Fraction(5, 1000) and len(rates) == 4 and spread < Fraction(5, 1000) and dt < 30
    criterion(
        6, ok,
        f"total={float(total.empirical):.6f} target (1/4)(5/11)={float(target):.6f} err={float(err):.6f} "
        f"idealized={total.predicted_paper} exact union={total.predicted_exact} "
        f"families={[round(float(r), 6) for r in rates]} spread={float(spread):.2e} time={dt:.2f}s",
    )


@pytest.fixture(scope="module")
def million_run(e11):
    curves._TRACE_CACHE.clear()
    t0 = time.perf_counter()
    report = density.empirical_prime_twist_density(e11, 7, 10**6, "both")
    dt = time.perf_counter() - t0
    bundle = density.empirical_subdensities(e11, 7, 10**6)
    return report, bundle, dt


def test_criterion_07_prime_twist_density(criterion, million_run):
    report, _, dt = million_run
    target = Fraction(161, 384)
    err = abs(report.empirical - target)
    criterion(
        7, err < Fraction(1, 100) and report.predicted_paper == target and dt < 300,
        f"empirical={float(report.empirical):.5f} target=161/384={float(target):.5f} err={float(err):.5f} "
        f"exact={report.predicted_exact} time={dt:.1f}s",
    )


def test_criterion_08_subdensities(criterion, million_run):
    _, b, _ = million_run
    targets = {"frac_a_eq": Fraction(47, 288), "frac_even_order": Fraction(1, 2), "frac_joint": Fraction(1, 12)}
    errs = {k: abs(getattr(b, k) - v) for k, v in targets.items()}
    ok = all(e < Fraction(1, 100) for e in errs.values())
    criterion(8, ok, " ".join(f"{k}={float(getattr(b, k)):.5f} (target {v})" for k, v in targets.items()))


def test_criterion_09_example(criterion):
    t0 = time.perf_counter()
    r = density.example_4_14_density(7, 10**6)
    dt = time.perf_counter() - t0
    target = Fraction(15, 308)
    err = abs(r.empirical - target)
    ok = err < Fraction(5, 1000) and r.predicted_exact == target and r.predicted_paper == Fraction(1, 16)
    criterion(
        9, ok and dt < 10,
        f"empirical={float(r.empirical):.6f} exact=15/308={float(target):.6f} "
        f"stated={r.predicted_paper}={float(r.predicted_paper):.6f} err={float(err):.2e} time={dt:.2f}s",
    )


def test_criterion_10_admissibility(criterion, e11):
    t0 = time.perf_counter()
    trivial = ProductCharacter(())
    chi11 = ProductCharacter((11,))
    a3 = conditions.kartik_admissible(3, e11, trivial).admissible
    a7 = conditions.kartik_admissible(7, e11, trivial).admissible
    # Legendre-table oracle: s=3 has (-3/11) = -1 = w_11, s=7 has (-7/11) = +1
    oracle3 = oracles.euler_legendre(-3, 11) == e11.atkin_lehner[11]
    oracle7 = oracles.euler_legendre(-7, 11) == e11.atkin_lehner[11]
    v = conditions.combination_check(e11, 7, 3, -131)
    table = dict(v.character_table)
    dt = time.perf_counter() - t0
    ok = (a3 is True and a7 is False and oracle3 and not oracle7
          and v.character == chi11 and table[trivial] is False and table[chi11] is True and dt < 1)
    criterion(10, ok, f"s=3 -> {a3}, s=7 -> {a7}, selected chi={v.character.name} "
                      f"trivial accepted={table[trivial]} time={dt:.2f}s")


def test_criterion_11_property_suites(criterion):
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-m", "property", "-q", "-p", "no:cacheprovider", "tests"],
        cwd=ROOT, capture_output=True, text=True, timeout=600,
    )
    dt = time.perf_counter() - t0
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    criterion(11, proc.returncode == 0 and dt < 120, f"{summary} time={dt:.1f}s")


def test_criterion_12_iwasawa(criterion):
    rng = random.Random(12)
    polys = []
    for i in range(200):
        p = (3, 5, 7)[i % 3]
        deg = rng.randrange(0, 9)
        c = [rng.randrange(-p**4, p**4) * p ** rng.choice([0, 0, 1, 2, 3]) for _ in range(deg + 1)]
        if not any(c):
            c[-1] = 1
        polys.append((p, c))
    t0 = time.perf_counter()
    got = [arith.iwasawa_mu_lambda(c, p) for p, c in polys]
    dt = time.perf_counter() - t0
    bad = [(p, c) for (p, c), inv in zip(polys, got) if (inv.mu, inv.lam) != oracles.weierstrass_invariants(c, p)]
    mus = sum(inv.mu > 0 for inv in got)
    criterion(12, not bad and dt < 5, f"polys=200 with mu>0: {mus} mismatches={len(bad)} time={dt:.3f}s")
