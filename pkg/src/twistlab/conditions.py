"""Decision procedures: twist families, admissible discriminants, splitting assumptions."""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterator, Optional

from . import arith
from .arith import LocalSquareClass
from .curves import CurveSpec, TorsionStatus, is_good_ordinary, local_torsion_trivial
from .errors import ConfigurationError, DomainError

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# characters


@dataclass(frozen=True, order=True)
class ProductCharacter:
    """chi = prod_{q in support} (./q) for a set of odd primes q."""

    support: tuple[int, ...] = ()

    def __post_init__(self):
        sup = tuple(sorted(set(int(q) for q in self.support)))
        for q in sup:
            if q == 2 or not arith.is_prime(q):
                raise DomainError(f"character support must be odd primes, got {q}")
        object.__setattr__(self, "support", sup)

    @property
    def conductor(self) -> int:
        n = 1
        for q in self.support:
            n *= q
        return n

    @property
    def is_trivial(self) -> bool:
        return not self.support

    def __call__(self, n: int) -> int:
        v = 1
        for q in self.support:
            v *= arith.jacobi(n, q)
        return v

    def local_sign(self, q: int) -> int:
        """chi_q(-1) = (-1)^((q-1)/2) for q in the support."""
        if q not in self.support:
            raise DomainError(f"{q} is not in the character support")
        return 1 if q % 4 == 1 else -1

    @property
    def name(self) -> str:
        return "trivial" if self.is_trivial else "*".join(str(q) for q in self.support)

    @classmethod
    def parse(cls, text: str) -> "ProductCharacter":
        """'trivial', '1', '11' or '3*11' (also '3,11')."""
        text = text.strip().lower()
        if text in ("trivial", "1", ""):
            return cls(())
        parts = text.replace(",", "*").split("*")
        try:
            return cls(tuple(int(x) for x in parts))
        except ValueError:
            raise DomainError(f"cannot parse character {text!r}") from None


def check_odd_squarefree_level(curve: CurveSpec) -> int:
    N = curve.conductor
    if N is None or N % 2 == 0 or not arith.is_squarefree(N):
        raise DomainError(f"conductor must be odd and square-free, got {N}")
    return N


def characters_for(curve: CurveSpec) -> list[ProductCharacter]:
    """All 2^r quadratic characters of conductor dividing N_E (N_E odd square-free)."""
    N = check_odd_squarefree_level(curve)
    primes = arith.prime_divisors(N) if N > 1 else []
    return [
        ProductCharacter(sub)
        for k in range(len(primes) + 1)
        for sub in itertools.combinations(primes, k)
    ]


def _validate_character(curve: CurveSpec, chi: ProductCharacter) -> None:
    for q in chi.support:
        if curve.conductor % q:
            raise DomainError(f"character prime {q} does not divide N_E = {curve.conductor}")


def required_signs(curve: CurveSpec, chi: ProductCharacter) -> dict[int, int]:
    """The sign z_q that (-s/q) must take at each q | N_E for this character."""
    N = check_odd_squarefree_level(curve)
    if curve.atkin_lehner is None:
        raise ConfigurationError("Atkin-Lehner signs are required")
    _validate_character(curve, chi)
    z = {}
    for q in arith.prime_divisors(N) if N > 1 else []:
        w = curve.atkin_lehner.get(q)
        if w is None:
            raise ConfigurationError(f"missing Atkin-Lehner sign at {q}")
        z[q] = chi.local_sign(q) * w if q in chi.support else w
    return z


# ---------------------------------------------------------------------------
# twist families


@dataclass(frozen=True, order=True)
class TwistFamilyKey:
    entries: tuple[tuple[int, LocalSquareClass], ...]

    def restricted(self, primes) -> "TwistFamilyKey":
        keep = set(primes)
        return TwistFamilyKey(tuple(e for e in self.entries if e[0] in keep))

    def to_record(self) -> list:
        return [
            {"q": q, "val_parity": c.val_parity, "unit_class": c.unit_class}
            for q, c in self.entries
        ]


def family_primes(curve: CurveSpec, p: int) -> list[int]:
    if curve.conductor is None:
        raise DomainError("family keys need the curve conductor")
    return arith.prime_divisors(4 * curve.conductor * p)


def family_key(n: int, curve: CurveSpec, p: int) -> TwistFamilyKey:
    if n == 0:
        raise DomainError("0 has no twist family")
    if n % p == 0:
        log.warning("family key of %d, which is divisible by p = %d", n, p)
    return TwistFamilyKey(
        tuple((q, arith.local_square_class(n, q)) for q in family_primes(curve, p))
    )


def same_family(n1: int, n2: int, curve: CurveSpec, p: int) -> bool:
    return family_key(n1, curve, p) == family_key(n2, curve, p)


# ---------------------------------------------------------------------------
# admissibility of discriminants


class ConditionCMode(enum.Enum):
    STRICT = "strict"
    LENIENT = "lenient"


@dataclass(frozen=True)
class AdmissibilityVerdict:
    s: int
    admissible: bool
    failed_conditions: tuple[str, ...]
    character_used: ProductCharacter

    def to_record(self) -> dict:
        return {
            "s": self.s,
            "admissible": self.admissible,
            "failed_conditions": list(self.failed_conditions),
            "character": self.character_used.name,
        }


def condition_c(s: int, mode: ConditionCMode = ConditionCMode.STRICT) -> bool:
    """Whether -s is a fundamental discriminant of the allowed shape."""
    if s <= 0:
        return False
    if s % 4 == 3:
        return arith.is_squarefree(s)
    if mode is ConditionCMode.LENIENT and s % 4 == 0:
        return arith.is_fundamental_discriminant(-s)
    return False


def kartik_admissible(
    s: int,
    curve: CurveSpec,
    chi: ProductCharacter,
    mode: ConditionCMode = ConditionCMode.STRICT,
) -> AdmissibilityVerdict:
    """Check conditions (a), (b), (c) on s for the twist F_E (x) chi.

    (a): (-s/q) = w_q for q | N_E/N'; (b): (-s/q) = chi_q(-1) w_q for q | N';
    (c): -s a fundamental discriminant (strict: -s = 1 mod 4).
    """
    if s <= 0:
        raise DomainError("s must be positive")
    z = required_signs(curve, chi)
    failed = []
    a_ok = all(arith.jacobi(-s, q) == z[q] for q in z if q not in chi.support)
    b_ok = all(arith.jacobi(-s, q) == z[q] for q in chi.support)
    if not a_ok:
        failed.append("a")
    if not b_ok:
        failed.append("b")
    if not condition_c(s, mode):
        failed.append("c")
    return AdmissibilityVerdict(s, not failed, tuple(failed), chi)


def enumerate_admissible(
    curve: CurveSpec,
    bound: int,
    chi: Optional[ProductCharacter] = None,
    p: Optional[int] = None,
    mode: ConditionCMode = ConditionCMode.STRICT,
) -> Iterator[AdmissibilityVerdict]:
    """Yield the admissible verdicts for 0 < s < bound, in increasing s.

    With ``chi`` None every character of conductor dividing N_E is tried and
    the (unique) one that works is reported. Multiples of ``p`` are skipped.
    """
    chars = [chi] if chi is not None else characters_for(curve)
    signs = [(c, required_signs(curve, c)) for c in chars]
    for s in range(1, bound):
        if p is not None and s % p == 0:
            continue
        if not condition_c(s, mode):
            continue
        for c, z in signs:
            if all(arith.jacobi(-s, q) == zq for q, zq in z.items()):
                yield AdmissibilityVerdict(s, True, (), c)
                break


# ---------------------------------------------------------------------------
# Assumption checks for quadratic fields


class Status(enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"
    NOT_CHECKED = "NotChecked"


@dataclass(frozen=True)
class ConditionVerdict:
    status: Status
    witnesses: tuple[int, ...] = ()
    note: str = ""

    def to_record(self) -> dict:
        return {"status": self.status.value, "witnesses": list(self.witnesses), "note": self.note}


@dataclass(frozen=True)
class AssumptionReport:
    p: int
    d: int
    discriminant: int
    conditions: dict = field(default_factory=dict)

    def __getitem__(self, label: str) -> ConditionVerdict:
        return self.conditions[label]

    def holds(self, *labels: str) -> bool:
        return all(self.conditions[l].status is Status.HOLDS for l in labels)

    def to_record(self) -> dict:
        return {
            "p": self.p,
            "d": self.d,
            "discriminant": self.discriminant,
            "conditions": {k: v.to_record() for k, v in self.conditions.items()},
        }


def _split_in(D: int, q: int) -> int:
    return arith.kronecker_chi(D, q)


def assumption_check(
    curve: CurveSpec, p: int, d: int, reduce_squares: bool = False
) -> AssumptionReport:
    """Check conditions (i)-(iii) for K = Q(sqrt d), plus the sufficient criteria.

    Labels: "i", "ii", "iii", "iv" and "split_bad_and_p" (every l | N_E p
    splits), "torsion_bad_and_p" (E(Q_l)[p] = 0 for l | N_E p),
    "torsion_disc" (E(Q_w)[p] = 0 for w | disc K). Condition (iv) is never
    checked.

    With ``reduce_squares`` a non-square-free d is replaced by its
    square-free kernel (same field K); otherwise it is a domain error.
    """
    if p < 5 or not arith.is_prime(p):
        raise DomainError(f"p must be a prime >= 5, got {p}")
    if curve.conductor is None:
        raise DomainError("assumption checks need the curve conductor")
    if reduce_squares and d:
        d = arith.squarefree_kernel(d)
    D = arith.fundamental_discriminant(d)
    c: dict[str, ConditionVerdict] = {}

    ordinary = is_good_ordinary(curve, p)
    c["ii"] = ConditionVerdict(Status.HOLDS if ordinary else Status.FAILS, (p,))

    kp = _split_in(D, p)
    note = {1: "split", -1: "inert", 0: "ramified"}[kp]
    c["iii"] = ConditionVerdict(Status.HOLDS if kp == 1 else Status.FAILS, (p,), note)

    sigma = sorted(set(arith.prime_divisors(curve.conductor * p)))
    not_split = [l for l in sigma if _split_in(D, l) != 1]
    c["split_bad_and_p"] = ConditionVerdict(
        Status.FAILS if not_split else Status.HOLDS, tuple(not_split or sigma)
    )

    verdicts = {l: local_torsion_trivial(curve, l, p) for l in sigma}
    c["torsion_bad_and_p"] = _torsion_summary(verdicts)

    disc_primes = arith.prime_divisors(D)
    disc_verdicts = {w: local_torsion_trivial(curve, w, p) for w in disc_primes}
    c["torsion_disc"] = _torsion_summary(disc_verdicts)

    sufficient = ("ii", "split_bad_and_p", "torsion_bad_and_p", "torsion_disc")
    # Q_l sits inside K_v for v | l, so p-torsion over Q_l persists over K_v
    nontrivial = sorted(
        l for l, v in {**verdicts, **disc_verdicts}.items() if v.status is TorsionStatus.NONTRIVIAL
    )
    if all(c[k].status is Status.HOLDS for k in sufficient):
        c["i"] = ConditionVerdict(Status.HOLDS, tuple(sigma + disc_primes), "sufficient criteria hold")
    elif nontrivial:
        c["i"] = ConditionVerdict(Status.FAILS, tuple(nontrivial), "p-torsion over Q_l at a prime of Sigma(K)")
    else:
        c["i"] = ConditionVerdict(Status.INCONCLUSIVE, (), "sufficient criteria do not all hold")
    c["iv"] = ConditionVerdict(Status.NOT_CHECKED, (), "fine Selmer triviality is not decidable here")
    order = ("i", "ii", "iii", "iv", "split_bad_and_p", "torsion_bad_and_p", "torsion_disc")
    return AssumptionReport(p, d, D, {k: c[k] for k in order})


def _torsion_summary(verdicts: dict) -> ConditionVerdict:
    bad = [l for l, v in verdicts.items() if v.status is TorsionStatus.NONTRIVIAL]
    unsure = [l for l, v in verdicts.items() if v.status is TorsionStatus.INCONCLUSIVE]
    if bad:
        return ConditionVerdict(Status.FAILS, tuple(bad), "; ".join(verdicts[l].reason for l in bad))
    if unsure:
        return ConditionVerdict(
            Status.INCONCLUSIVE, tuple(unsure), "; ".join(verdicts[l].reason for l in unsure)
        )
    return ConditionVerdict(Status.HOLDS, tuple(verdicts))


# ---------------------------------------------------------------------------
# combined check


@dataclass(frozen=True)
class CombinationVerdict:
    ok: bool
    character: Optional[ProductCharacter]
    reasons: tuple[str, ...]
    character_table: tuple[tuple[ProductCharacter, bool], ...]
    assumptions: Optional[AssumptionReport]
    s_same_family_as_K: Optional[bool] = None

    def to_record(self) -> dict:
        return {
            "ok": self.ok,
            "character": self.character.name if self.character else None,
            "reasons": list(self.reasons),
            "characters": [{"character": c.name, "accepted": ok} for c, ok in self.character_table],
            "assumptions": self.assumptions.to_record() if self.assumptions else None,
            "s_same_family_as_K": self.s_same_family_as_K,
        }


def linked_characters(curve: CurveSpec) -> list[tuple[ProductCharacter, bool]]:
    """Each character with whether w_q = 1 off its support and chi_q(-1) w_q = 1 on it."""
    return [
        (chi, all(z == 1 for z in required_signs(curve, chi).values()))
        for chi in characters_for(curve)
    ]


def combination_check(curve: CurveSpec, p: int, s: int, d: int) -> CombinationVerdict:
    """Check the hypothesis bundle linking the twist family of s to E itself.

    K = Q(sqrt d) must be imaginary, unramified at 2 and satisfy (i)-(iii);
    the character must have all required signs +1; s must satisfy (a), (b)
    for it with -s = 1 mod 4.
    """
    check_odd_squarefree_level(curve)
    reasons = []
    if d >= 0:
        reasons.append("K must be imaginary (d < 0)")
    if not arith.is_squarefree(d):
        raise DomainError(f"d = {d} must be square-free")
    if d % 4 != 1:
        reasons.append("K is ramified at 2 (d not 1 mod 4)")
    if curve.rank is None:
        log.warning("no rank data for %s; rank <= 1 not verified", curve.label)
    elif curve.rank > 1:
        reasons.append(f"rank {curve.rank} > 1")

    report = assumption_check(curve, p, d)
    for label in ("i", "ii", "iii"):
        if report[label].status is not Status.HOLDS:
            reasons.append(f"assumption ({label}) {report[label].status.value}")

    table = tuple(linked_characters(curve))
    chosen = None
    for chi, ok in table:
        if ok:
            chosen = chi
            break
    if chosen is None:
        reasons.append("no character has all required signs equal to +1")
    else:
        v = kartik_admissible(s, curve, chosen, ConditionCMode.STRICT)
        # strict (c) demands square-free s; the bundle only asks -s = 1 mod 4
        failed = [f for f in v.failed_conditions if f != "c"]
        if s % 4 != 3:
            failed.append("c")
        for f in failed:
            reasons.append(f"s fails condition ({f}) for chi = {chosen.name}")
    same = None
    if s % p and d % p:
        same = same_family(s, -d, curve, p)
    return CombinationVerdict(not reasons, chosen, tuple(reasons), table, report, same)
