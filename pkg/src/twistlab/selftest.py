"""Quick oracle checks run by ``twistlab selftest``.

Each check compares a library routine against a slow, independently coded
computation on a small range.
"""

from __future__ import annotations

import time
from fractions import Fraction
from importlib import resources
import json

from . import arith, conditions, curves, density, qexp


def _fixture() -> curves.CurveSpec:
    rec = json.loads((resources.files("twistlab") / "data" / "11a1.json").read_text())
    return curves.CurveSpec(
        tuple(rec["a_invariants"]),
        rec["conductor"],
        rec["label"],
        rec["atkin_lehner"],
        rec["tamagawa"],
        rec["rank"],
    )


def check_jacobi() -> bool:
    for q in arith.sieve_primes(200)[1:]:
        for a in range(q):
            e = pow(a, (q - 1) // 2, q)
            if arith.jacobi(a, q) != (e - q if e > 1 else e):
                return False
    return True


def check_point_counts() -> bool:
    E = _fixture()
    a1, a2, a3, a4, a6 = E.a_invariants
    for ell in arith.sieve_primes(200):
        if ell == 11:
            continue
        n = 1 + sum(
            1
            for x in range(ell)
            for y in range(ell)
            if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % ell == 0
        )
        if curves.trace_of_frobenius(E, ell).a_ell != ell + 1 - n:
            return False
    return True


def check_hecke_theta() -> bool:
    T = qexp.theta_series(25 * 40)
    return qexp.eigen_check(T, 5, 40) == Fraction(6, 5)


def check_admissibility() -> bool:
    E = _fixture()
    triv = conditions.ProductCharacter(())
    return (
        conditions.kartik_admissible(3, E, triv).admissible
        and not conditions.kartik_admissible(7, E, triv).admissible
    )


def check_densities() -> bool:
    return density.predicted_split_density("thm54", 7, 1, 0) == Fraction(161, 384) and (
        density.chebotarev_subdensities(7)["frac_a_eq"] == Fraction(47, 288)
    )


def check_iwasawa() -> bool:
    inv = arith.iwasawa_mu_lambda([9, 6, 3, 1], 3)
    return (inv.mu, inv.lam) == (0, 3)


def check_local_squares() -> bool:
    for q in (2, 3, 5, 7):
        mod = q**6 if q > 2 else 2**7
        squares = {x * x % mod for x in range(mod)}
        for n in range(1, 200):
            if n % q == 0:
                continue
            if arith.local_square_class(n, q).is_trivial != (n % mod in squares):
                return False
    return True


CHECKS = {
    "jacobi-euler": check_jacobi,
    "point-count-exhaustive": check_point_counts,
    "theta-hecke-eigenvalue": check_hecke_theta,
    "admissibility-fixture": check_admissibility,
    "density-closed-forms": check_densities,
    "iwasawa-example": check_iwasawa,
    "local-squares-hensel": check_local_squares,
}


def run_all() -> list[dict]:
    out = []
    for name, fn in CHECKS.items():
        t = time.perf_counter()
        try:
            ok = bool(fn())
            err = None
        except Exception as exc:  # a crash is a failed check, not a crash of the runner
            ok, err = False, f"{type(exc).__name__}: {exc}"
        rec = {"name": name, "ok": ok, "seconds": round(time.perf_counter() - t, 3)}
        if err:
            rec["error"] = err
        out.append(rec)
    return out
