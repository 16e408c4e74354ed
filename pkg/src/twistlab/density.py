"""Empirical densities of admissible discriminants and of good twisting primes.

Each report carries the closed-form value from the literature
(``predicted_paper``) and, where one is available, an exact refinement
(``predicted_exact``): an Euler-product residue count for densities over
integers, a GL_2(F_p) Chebotarev count for densities over primes.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from . import arith
from .conditions import characters_for, check_odd_squarefree_level, required_signs
from .curves import CurveSpec, is_anomalous, is_good_ordinary, traces_below
from .errors import DomainError

VARIANTS = ("prop52", "prop53", "thm54")


def default_workers() -> int:
    env = os.environ.get("TWISTLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class DensityReport:
    description: str
    bound: int
    hits: int
    total: int
    predicted_paper: Fraction
    predicted_exact: Optional[Fraction] = None
    breakdown: tuple = ()
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0 <= self.hits <= self.total:
            raise ValueError("need 0 <= hits <= total")

    @property
    def empirical(self) -> Fraction:
        return Fraction(self.hits, self.total) if self.total else Fraction(0)

    @property
    def abs_error(self) -> Fraction:
        return abs(self.empirical - self.predicted_paper)

    @property
    def exact_error(self) -> Optional[Fraction]:
        if self.predicted_exact is None:
            return None
        return abs(self.empirical - self.predicted_exact)

    def standard_error(self) -> float:
        """Binomial standard error around the exact (else stated) prediction."""
        p = float(self.predicted_exact if self.predicted_exact is not None else self.predicted_paper)
        return math.sqrt(p * (1 - p) / self.total) if self.total else math.inf

    def to_record(self) -> dict:
        rec = {
            "description": self.description,
            "bound": self.bound,
            "hits": self.hits,
            "total": self.total,
            "empirical": rational_record(self.empirical),
            "predicted_paper": rational_record(self.predicted_paper),
            "predicted_exact": rational_record(self.predicted_exact),
            "abs_error": rational_record(self.abs_error),
        }
        if self.breakdown:
            rec["breakdown"] = [b.to_record() for b in self.breakdown]
        if self.notes:
            rec["notes"] = list(self.notes)
        return rec

    def csv_row(self) -> list[str]:
        return [
            self.description,
            str(self.bound),
            str(self.hits),
            str(self.total),
            decimal(self.empirical),
            exact_str(self.predicted_paper),
            exact_str(self.predicted_exact),
            exact_str(self.abs_error),
        ]


CSV_HEADER = [
    "description", "bound", "hits", "total",
    "empirical", "predicted_paper", "predicted_exact", "abs_error",
]


def decimal(x: Optional[Fraction], places: int = 10) -> str:
    if x is None:
        return ""
    q = x.numerator * 10**places
    sign = "-" if q < 0 else ""
    n = abs(q)
    d = x.denominator
    # round half up on the absolute value
    v = (2 * n + d) // (2 * d)
    whole, frac = divmod(v, 10**places)
    return f"{sign}{whole}.{frac:0{places}d}"


def exact_str(x: Optional[Fraction]) -> str:
    if x is None:
        return ""
    return str(x)


def rational_record(x: Optional[Fraction]):
    if x is None:
        return None
    return {"exact": exact_str(x), "decimal": decimal(x)}


@dataclass(frozen=True)
class SubdensityBundle:
    bound: int
    total: int
    frac_a_eq: Fraction
    frac_even_order: Fraction
    frac_joint: Fraction
    predicted_paper: dict = field(default_factory=dict)
    predicted_exact: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        out = {"bound": self.bound, "total": self.total}
        for name in ("frac_a_eq", "frac_even_order", "frac_joint"):
            out[name] = {
                "empirical": rational_record(getattr(self, name)),
                "predicted_paper": rational_record(self.predicted_paper.get(name)),
                "predicted_exact": rational_record(self.predicted_exact.get(name)),
            }
        return out

    def reports(self) -> list[DensityReport]:
        return [
            DensityReport(
                name,
                self.bound,
                round(getattr(self, name) * self.total),
                self.total,
                self.predicted_paper[name],
                self.predicted_exact.get(name),
            )
            for name in ("frac_a_eq", "frac_even_order", "frac_joint")
        ]


# ---------------------------------------------------------------------------
# closed forms


def predicted_split_density(variant: str, p: int, s_factors: int, e: int) -> Fraction:
    """Closed-form density of primes l with Q(sqrt(±l)) satisfying (i)-(iii).

    prop52: 1 - (p^2-2)/((p-1)^2(p+1)); prop53: 1 - (p^2-3)/(...);
    thm54: 2 - (2p^2-5)/(...); each scaled by 1/2^(s+1+e).
    """
    if variant not in VARIANTS:
        raise DomainError(f"variant must be one of {VARIANTS}")
    if p < 5:
        raise DomainError("p must be at least 5")
    if e not in (0, 1):
        raise DomainError("e must be 0 or 1")
    den = (p - 1) ** 2 * (p + 1)
    core = {
        "prop52": 1 - Fraction(p * p - 2, den),
        "prop53": 1 - Fraction(p * p - 3, den),
        "thm54": 2 - Fraction(2 * p * p - 5, den),
    }[variant]
    return core / 2 ** (s_factors + 1 + e)


@lru_cache(maxsize=None)
def gl2_trace_det_counts(p: int) -> np.ndarray:
    """``n[t, d]`` = number of g in GL_2(F_p) with trace t and determinant d."""
    # #{(b, c): bc = v} is 2p-1 for v = 0 and p-1 otherwise
    a = np.arange(p)
    ad = np.outer(a, a) % p
    tr = (a[:, None] + a[None, :]) % p
    counts = np.zeros((p, p), dtype=np.int64)
    for d in range(1, p):
        v = (ad - d) % p
        w = np.where(v == 0, 2 * p - 1, p - 1)
        np.add.at(counts[:, d], tr.ravel(), w.ravel())
    return counts


def _even_order_residues(p: int) -> np.ndarray:
    m = p - 1
    while m % 2 == 0:
        m //= 2
    u = np.arange(p)
    # u has odd order iff u^m = 1
    odd = np.array([pow(int(x), m, p) == 1 for x in u])
    even = ~odd
    even[0] = False
    return even


def chebotarev_subdensities(p: int) -> dict[str, Fraction]:
    """Exact densities for a surjective mod-p representation."""
    n = gl2_trace_det_counts(p)
    total = int(n.sum())
    t = np.arange(p)[:, None]
    d = np.arange(p)[None, :]
    fixed = (d - t + 1) % p == 0
    even = _even_order_residues(p)[None, :]
    return {
        "frac_a_eq": Fraction(int(n[fixed].sum()), total),
        "frac_even_order": Fraction(int(n[np.broadcast_to(even, n.shape)].sum()), total),
        "frac_joint": Fraction(int(n[fixed & even].sum()), total),
    }


def chebotarev_twist_density(p: int, N: int, sign: int) -> Fraction:
    """Exact density of primes l with E(Q_l)[p] = 0 and every q | N p split in Q(sqrt(sign*l)).

    Assumes the mod-p representation is surjective, so the only quadratic
    subfield of Q(E[p]) is Q(sqrt(p*)).
    """
    n = gl2_trace_det_counts(p)
    total = int(n.sum())
    t = np.arange(p)[:, None]
    d = np.arange(p)[None, :]
    no_fixed = (d - t + 1) % p != 0
    leg = arith.legendre_table(p).astype(np.int64)
    p_splits = (leg[(sign * np.arange(p)) % p] == 1)[None, :]
    frac = Fraction(int(n[no_fixed & p_splits].sum()), total)
    for q in arith.prime_divisors(N) if N > 1 else []:
        frac *= Fraction(1, 4) if q == 2 else Fraction(1, 2)
    return frac


def _closed_form_variant(p: int, N: int, sign: int) -> str:
    """prop53 when Q(sqrt(p*)) lies in the compositum of F_q^sign, else prop52.

    F_q^- is Q(sqrt(-q)) for q = 3 mod 4 and Q(sqrt(q)) for q = 1 mod 4;
    F_q^+ swaps the two.
    """
    gens = []
    for q in arith.prime_divisors(N * p):
        if q == 2:
            continue
        minus = -q if q % 4 == 3 else q
        gens.append(minus if sign < 0 else -minus)
    p_star = p if p % 4 == 1 else -p
    # square classes form an F_2-vector space; test p* against every product
    for mask in range(1, 1 << len(gens)):
        prod = 1
        for i, g in enumerate(gens):
            if mask >> i & 1:
                prod *= g
        if arith.squarefree_kernel(prod) == p_star:
            return "prop53"
    return "prop52"


# ---------------------------------------------------------------------------
# prime-indexed harness


def _prime_setup(curve: CurveSpec, p: int, bound: int, workers: Optional[int]):
    if curve.conductor is None:
        raise DomainError("density harness needs the curve conductor")
    if p < 5 or not arith.is_prime(p):
        raise DomainError(f"p must be a prime >= 5, got {p}")
    if not is_good_ordinary(curve, p):
        raise DomainError(f"E is not good ordinary at p = {p}")
    if is_anomalous(curve, p):
        raise DomainError(f"p = {p} is anomalous for E")
    if bound < 3:
        raise DomainError("bound must be at least 3")
    primes, a = traces_below(curve, bound, workers or default_workers())
    return primes, a


def _split_mask(primes: np.ndarray, sign: int, split_primes: list[int]) -> np.ndarray:
    """Whether every q in ``split_primes`` splits in Q(sqrt(sign * l))."""
    v = sign * primes
    ok = np.ones(len(primes), dtype=bool)
    for q in split_primes:
        if q == 2:
            ok &= v % 8 == 1
        else:
            ok &= arith.legendre_table(q)[v % q] == 1
    return ok


def prime_twist_hits(curve: CurveSpec, p: int, bound: int, sign: int, workers=None) -> np.ndarray:
    """The primes l < bound counted for the given sign (l not dividing N_E p)."""
    primes, a = _prime_setup(curve, p, bound, workers)
    Np = curve.conductor * p
    eligible = Np % primes != 0
    torsion_ok = (primes + 1 - a) % p != 0
    split = _split_mask(primes, sign, arith.prime_divisors(Np))
    return primes[eligible & torsion_ok & split]


def empirical_prime_twist_density(
    curve: CurveSpec,
    p: int,
    bound: int,
    sign_mode: str = "both",
    workers: Optional[int] = None,
    assume_surjective: bool = True,
) -> DensityReport:
    """Fraction of primes l < bound for which Q(sqrt(±l)) satisfies (i)-(iii).

    Counts l not dividing N_E p with p not dividing #E(F_l) and every
    q | N_E p split in Q(sqrt(eps*l)). Mode "both" counts pairs (l, eps)
    against pi(bound). The exact Chebotarev prediction is attached only when
    the caller asserts the mod-p representation is surjective.
    """
    if sign_mode not in ("plus", "minus", "both"):
        raise DomainError("sign_mode must be plus, minus or both")
    primes, _ = _prime_setup(curve, p, bound, workers)
    N = curve.conductor
    s = len(arith.prime_divisors(N)) if N > 1 else 0
    e = 0 if N % 2 else 1
    signs = {"plus": (1,), "minus": (-1,), "both": (1, -1)}[sign_mode]
    hits = sum(len(prime_twist_hits(curve, p, bound, eps, workers)) for eps in signs)
    exact = None
    if assume_surjective:
        exact = sum((chebotarev_twist_density(p, N, eps) for eps in signs), Fraction(0))
    if sign_mode == "both":
        stated = predicted_split_density("thm54", p, s, e)
    else:
        stated = predicted_split_density(_closed_form_variant(p, N, signs[0]), p, s, e)
    return DensityReport(
        f"prime twists {curve.label or list(curve.a_invariants)} p={p} sign={sign_mode}",
        bound,
        hits,
        len(primes),
        stated,
        exact,
    )


def empirical_subdensities(
    curve: CurveSpec, p: int, bound: int, workers: Optional[int] = None
) -> SubdensityBundle:
    primes, a = _prime_setup(curve, p, bound, workers)
    keep = (curve.conductor * p) % primes != 0
    primes, a = primes[keep], a[keep]
    a_eq = (primes + 1 - a) % p == 0
    even = _even_order_residues(p)[primes % p]
    n = len(primes)
    den = (p - 1) ** 2 * (p + 1)
    stated = {
        "frac_a_eq": Fraction(p * p - 2, den),
        "frac_even_order": Fraction(1, 2),
        "frac_joint": Fraction(1, 2 * (p - 1)),
    }
    return SubdensityBundle(
        bound,
        n,
        Fraction(int(a_eq.sum()), n),
        Fraction(int(even.sum()), n),
        Fraction(int((a_eq & even).sum()), n),
        stated,
        chebotarev_subdensities(p),
    )


# ---------------------------------------------------------------------------
# discriminant-indexed harness


def _squarefree_mask(bound: int) -> np.ndarray:
    mask = np.ones(bound, dtype=bool)
    for q in arith.sieve_primes(math.isqrt(bound) + 2):
        mask[:: q * q] = False
    return mask


def empirical_discriminant_density(
    curve: CurveSpec,
    bound: int,
    p: Optional[int] = None,
    squarefree: bool = False,
) -> DensityReport:
    """Density of 0 < s < bound with -s = 1 mod 4 and (a), (b) for some character.

    The breakdown lists one report per character; with ``p`` given, one per
    (character, s square / non-square mod p), multiples of p left out.
    """
    N = check_odd_squarefree_level(curve)
    if bound < 2:
        raise DomainError("bound must be at least 2")
    if p is not None and (not arith.is_prime(p) or p == 2 or N % p == 0):
        raise DomainError(f"p must be an odd prime not dividing N_E, got {p}")
    qs = arith.prime_divisors(N) if N > 1 else []
    r = len(qs)
    s = np.arange(bound, dtype=np.int64)
    base = s % 4 == 3
    base[0] = False
    if squarefree:
        base &= _squarefree_mask(bound)
    legs = {q: arith.legendre_table(q)[(-s) % q] for q in qs}
    total = bound - 1
    local = Fraction(1)
    for q in qs:
        local *= Fraction(q - 1, 2 * q)
    per_chi_exact = None if squarefree else Fraction(1, 4) * local
    breakdown = []
    union = np.zeros(bound, dtype=bool)
    hits_sum = 0
    if p is not None:
        sq_p = arith.legendre_table(p)[s % p]
    for chi in characters_for(curve):
        z = required_signs(curve, chi)
        cond = base.copy()
        for q in qs:
            cond &= legs[q] == z[q]
        union |= cond
        count = int(cond.sum())
        hits_sum += count
        if p is None:
            breakdown.append(
                DensityReport(f"chi={chi.name}", bound, count, total, Fraction(1, 2 ** (r + 2)), per_chi_exact)
            )
            continue
        fam_exact = None if per_chi_exact is None else per_chi_exact * Fraction(p - 1, 2 * p)
        for label, val in (("square", 1), ("nonsquare", -1)):
            fam = int((cond & (sq_p == val)).sum())
            breakdown.append(
                DensityReport(
                    f"chi={chi.name} s {label} mod {p}",
                    bound,
                    fam,
                    total,
                    Fraction(1, 2 ** (r + 3)),
                    fam_exact,
                )
            )
    hits = int(union.sum())
    if hits != hits_sum:
        raise AssertionError("character conditions overlap")
    exact = None
    if not squarefree:
        exact = Fraction(1, 4)
        for q in qs:
            exact *= Fraction(q - 1, q)
    return DensityReport(
        f"admissible discriminants {curve.label or list(curve.a_invariants)}",
        bound,
        hits,
        total,
        Fraction(1, 4),
        exact,
        tuple(breakdown),
        ("predicted_exact counts s prime to N_E for which some character works; "
         "each character alone contributes (1/4) prod (q-1)/(2q)",),
    )


def example_4_14_density(p: int, bound: int) -> DensityReport:
    """Density of s prime to 44p with -s = 1 mod 4 and -s a square mod 11 and mod p."""
    if not arith.is_prime(p) or 44 % p == 0:
        raise DomainError(f"p must be a prime not dividing 44, got {p}")
    if bound < 2:
        raise DomainError("bound must be at least 2")
    s = np.arange(bound, dtype=np.int64)
    cond = (s % 4 == 3) & (np.gcd(s, 44 * p) == 1)
    cond &= arith.legendre_table(11)[(-s) % 11] == 1
    cond &= arith.legendre_table(p)[(-s) % p] == 1
    cond[0] = False
    exact = Fraction(1, 4) * Fraction(5, 11) * Fraction(p - 1, 2 * p)
    return DensityReport(
        f"example 11a1 p={p}", bound, int(cond.sum()), bound - 1, Fraction(1, 16), exact
    )
