"""Elliptic curves over Q: reduction data, Frobenius traces, twists, unit roots."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np

from . import arith
from .errors import DomainError, ValidationError

log = logging.getLogger(__name__)

#: Primes below this are counted exhaustively; BSGS above.
EXHAUSTIVE_LIMIT = 2**14

_BSGS_MAX_POINTS = 24


class ReductionType(enum.Enum):
    GOOD = "Good"
    SPLIT = "MultiplicativeSplit"
    NONSPLIT = "MultiplicativeNonsplit"
    ADDITIVE = "Additive"

    @property
    def is_multiplicative(self) -> bool:
        return self in (ReductionType.SPLIT, ReductionType.NONSPLIT)


class TorsionStatus(enum.Enum):
    TRIVIAL = "Trivial"
    NONTRIVIAL = "NonTrivial"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class TorsionVerdict:
    status: TorsionStatus
    reason: str

    @property
    def trivial(self) -> bool:
        return self.status is TorsionStatus.TRIVIAL


@dataclass(frozen=True)
class FrobeniusTrace:
    prime: int
    a_ell: int
    reduction: ReductionType
    method: str

    @property
    def bad(self) -> bool:
        return self.reduction is not ReductionType.GOOD


@dataclass(frozen=True, eq=False)
class CurveSpec:
    """Integral Weierstrass model y^2 + a1xy + a3y = x^3 + a2x^2 + a4x + a6.

    ``conductor`` may be None only for derived curves (e.g. twists) whose
    conductor the caller has not supplied; reduction data then comes from
    the model's discriminant alone.
    """

    a_invariants: tuple[int, int, int, int, int]
    conductor: Optional[int] = None
    label: Optional[str] = None
    atkin_lehner: Optional[Mapping[int, int]] = None
    tamagawa: Optional[Mapping[int, int]] = None
    rank: Optional[int] = None
    _bad: tuple[int, ...] = field(default=(), init=False, repr=False)

    def __post_init__(self):
        ainvs = tuple(int(a) for a in self.a_invariants)
        if len(ainvs) != 5:
            raise ValidationError("a_invariants must have exactly 5 entries")
        object.__setattr__(self, "a_invariants", ainvs)
        if self.conductor is not None and self.conductor < 1:
            raise ValidationError("conductor must be a positive integer")
        if self.rank is not None and self.rank < 0:
            raise ValidationError("rank must be non-negative")
        _, bad = discriminant_and_bad_primes(self)
        object.__setattr__(self, "_bad", tuple(bad))
        if self.atkin_lehner is not None:
            al = {int(q): int(w) for q, w in self.atkin_lehner.items()}
            if self.conductor is None:
                raise ValidationError("atkin_lehner signs need a conductor")
            if set(al) != set(arith.prime_divisors(self.conductor)):
                raise ValidationError(
                    "atkin_lehner keys must be exactly the primes dividing the conductor"
                )
            if any(w not in (1, -1) for w in al.values()):
                raise ValidationError("atkin_lehner signs must be +1 or -1")
            object.__setattr__(self, "atkin_lehner", al)
        if self.tamagawa is not None:
            tam = {int(q): int(c) for q, c in self.tamagawa.items()}
            if any(c < 1 for c in tam.values()):
                raise ValidationError("Tamagawa numbers must be positive")
            if self.conductor is not None and any(self.conductor % q for q in tam):
                raise ValidationError("Tamagawa data given at a prime not dividing N")
            object.__setattr__(self, "tamagawa", tam)

    def __eq__(self, other):
        if not isinstance(other, CurveSpec):
            return NotImplemented
        return (self.a_invariants, self.conductor) == (other.a_invariants, other.conductor)

    def __hash__(self):
        return hash((self.a_invariants, self.conductor))

    # Weierstrass quantities --------------------------------------------

    @property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.a_invariants
        b2 = a1 * a1 + 4 * a2
        b4 = a1 * a3 + 2 * a4
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c4(self) -> int:
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    @property
    def c6(self) -> int:
        b2, b4, b6, _ = self.b_invariants
        return -(b2**3) + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j_invariant(self) -> Fraction:
        return Fraction(self.c4**3, self.discriminant)

    @property
    def bad_primes(self) -> tuple[int, ...]:
        return self._bad

    def is_bad(self, ell: int) -> bool:
        if self.conductor is not None:
            return self.conductor % ell == 0
        return self.discriminant % ell == 0

    def short_model(self) -> tuple[int, int]:
        """(A, B) with y^2 = x^3 + A x + B isomorphic to E away from 2 and 3."""
        return -27 * self.c4, -54 * self.c6

    def to_record(self) -> dict:
        rec = {
            "label": self.label,
            "a_invariants": list(self.a_invariants),
            "conductor": self.conductor,
        }
        if self.atkin_lehner is not None:
            rec["atkin_lehner"] = {str(q): w for q, w in sorted(self.atkin_lehner.items())}
        if self.tamagawa is not None:
            rec["tamagawa"] = {str(q): c for q, c in sorted(self.tamagawa.items())}
        if self.rank is not None:
            rec["rank"] = self.rank
        return rec


def discriminant_and_bad_primes(curve: CurveSpec) -> tuple[int, list[int]]:
    """Discriminant of the model and its bad primes, checked against N_E."""
    delta = curve.discriminant
    if delta == 0:
        raise ValidationError(f"singular curve {list(curve.a_invariants)}: discriminant 0")
    bad = arith.prime_divisors(delta)
    if curve.conductor is not None:
        cond_primes = arith.prime_divisors(curve.conductor) if curve.conductor > 1 else []
        extra = [q for q in bad if curve.conductor % q]
        if extra:
            raise ValidationError(
                f"discriminant primes {extra} do not divide conductor {curve.conductor} "
                "(model not minimal, or wrong conductor)"
            )
        missing = [q for q in cond_primes if delta % q]
        if missing:
            raise ValidationError(
                f"conductor primes {missing} do not divide the discriminant {delta}"
            )
    return delta, bad


def _verified_minimal_at(curve: CurveSpec, q: int) -> bool:
    # v(Delta) < 12 or v(c4) < 4 is sufficient for minimality at every q
    if curve.discriminant % q**12:
        return True
    return curve.c4 != 0 and curve.c4 % q**4 != 0


def reduction_type(curve: CurveSpec, q: int) -> ReductionType:
    if not curve.is_bad(q):
        return ReductionType.GOOD
    if curve.discriminant % q:
        # conductor says bad but model is smooth at q: data inconsistency
        raise ValidationError(f"q={q} divides the conductor but not the discriminant")
    if not _verified_minimal_at(curve, q):
        raise DomainError(f"cannot verify the model is minimal at {q}")
    if curve.c4 % q == 0:
        return ReductionType.ADDITIVE
    a = -_legendre_sum(curve, q)
    return ReductionType.SPLIT if a == 1 else ReductionType.NONSPLIT


# ---------------------------------------------------------------------------
# point counting


def _count_affine_mod2(curve: CurveSpec) -> int:
    a1, a2, a3, a4, a6 = curve.a_invariants
    n = 0
    for x in (0, 1):
        for y in (0, 1):
            if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                n += 1
    return n


def _legendre_sum(curve: CurveSpec, ell: int) -> int:
    """sum over x in F_ell of chi(4x^3 + b2 x^2 + 2 b4 x + b6); equals -a_ell.

    For ell = 2 the sum is replaced by (#affine points - ell).
    """
    if ell == 2:
        return _count_affine_mod2(curve) - 2
    b2, b4, b6, _ = curve.b_invariants
    x = np.arange(ell, dtype=np.int64)
    g = (4 * x) % ell
    g = (g + b2 % ell) * x % ell
    g = (g + (2 * b4) % ell) * x % ell
    g = (g + b6 % ell) % ell
    return int(arith.legendre_table(ell)[g].sum(dtype=np.int64))


def count_points_exhaustive(curve: CurveSpec, ell: int) -> int:
    """#E(F_ell) for the reduction of the model (singular points included)."""
    return ell + 1 + _legendre_sum(curve, ell)


def _ec_add(P, Q, a, m):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % m == 0:
            return None
        lam = (3 * x1 * x1 + a) * pow(2 * y1, -1, m) % m
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, m) % m
    x3 = (lam * lam - x1 - x2) % m
    return x3, (lam * (x1 - x3) - y1) % m


def _ec_mul(k, P, a, m):
    R = None
    while k:
        if k & 1:
            R = _ec_add(R, P, a, m)
        P = _ec_add(P, P, a, m)
        k >>= 1
    return R


def _point_order(P, a, ell, lo, hi) -> int:
    """Order of P on a curve whose group order lies in [lo, hi]."""
    half = math.isqrt((hi - lo) // 2) + 1
    baby: dict[int, tuple[int, int]] = {}
    R = None
    for j in range(1, half + 1):
        R = _ec_add(R, P, a, ell)
        if R is None:
            return j
        if R[0] in baby:
            # jP = ±j'P: order is at most 2*half, walk it out
            Q, k = P, 1
            while Q is not None:
                Q = _ec_add(Q, P, a, ell)
                k += 1
            return k
        baby[R[0]] = (j, R[1])
    step = 2 * half + 1
    c = lo + half
    C = _ec_mul(c, P, a, ell)
    S = _ec_mul(step, P, a, ell)
    n0 = None
    while c - half <= hi:
        if C is None:
            n0 = c
            break
        hit = baby.get(C[0])
        if hit is not None:
            j, y = hit
            n0 = c - j if y == C[1] else c + j
            break
        C = _ec_add(C, S, a, ell)
        c += step
    if n0 is None:
        raise ArithmeticError("BSGS found no multiple of the point order in the Hasse interval")
    order = n0
    for r in arith.factorize(n0):
        while order % r == 0 and _ec_mul(order // r, P, a, ell) is None:
            order //= r
    return order


def _points(A, B, ell, start):
    """Deterministic stream of affine points on y^2 = x^3 + Ax + B."""
    x = start
    while True:
        rhs = (x * x * x + A * x + B) % ell
        if rhs == 0 or pow(rhs, (ell - 1) // 2, ell) == 1:
            yield x, arith.sqrt_mod_prime(rhs, ell)
        x += 1


def trace_bsgs(A: int, B: int, ell: int) -> Optional[int]:
    """a_ell of y^2 = x^3 + Ax + B over F_ell (ell > 3) by BSGS.

    Point orders on the curve and on its quadratic twist are combined until a
    single group order in the Hasse interval remains. Returns None when the
    candidates never narrow to one.
    """
    A %= ell
    B %= ell
    w = math.isqrt(4 * ell)
    lo, hi = ell + 1 - w, ell + 1 + w
    g = 2
    while pow(g, (ell - 1) // 2, ell) == 1:
        g += 1
    At, Bt = A * g * g % ell, B * g * g * g % ell
    pts = _points(A, B, ell, 1)
    tpts = _points(At, Bt, ell, 1)
    m_e, m_t = 1, 1
    for i in range(_BSGS_MAX_POINTS):
        if i % 2 == 0:
            m_e = math.lcm(m_e, _point_order(next(pts), A, ell, lo, hi))
        else:
            m_t = math.lcm(m_t, _point_order(next(tpts), At, ell, lo, hi))
        first = -(-lo // m_e) * m_e
        cands = [n for n in range(first, hi + 1, m_e) if (2 * ell + 2 - n) % m_t == 0]
        if len(cands) == 1:
            return ell + 1 - cands[0]
    return None


def trace_of_frobenius(curve: CurveSpec, ell: int, method: str = "auto") -> FrobeniusTrace:
    """a_ell = ell + 1 - #E(F_ell), with bad primes handled by reduction type.

    ``method`` is "auto", "exhaustive" or "bsgs". BSGS needs ell > 3 and
    falls back to the exhaustive count if it cannot isolate the group order.
    """
    if not arith.is_prime(ell):
        raise DomainError(f"{ell} is not prime")
    red = reduction_type(curve, ell)
    if red is not ReductionType.GOOD:
        a = {ReductionType.SPLIT: 1, ReductionType.NONSPLIT: -1, ReductionType.ADDITIVE: 0}[red]
        return FrobeniusTrace(ell, a, red, "reduction-type")
    if method not in ("auto", "exhaustive", "bsgs"):
        raise DomainError(f"unknown point counting method {method!r}")
    use_bsgs = method == "bsgs" or (method == "auto" and ell >= EXHAUSTIVE_LIMIT)
    if use_bsgs and ell > 3:
        A, B = curve.short_model()
        a = trace_bsgs(A, B, ell)
        if a is not None:
            return FrobeniusTrace(ell, a, red, "bsgs")
        log.debug("BSGS ambiguous at ell=%d, falling back to exhaustive count", ell)
    a = -_legendre_sum(curve, ell)
    return FrobeniusTrace(ell, a, red, "exhaustive")


def _trace_chunk(args):
    ainvs, conductor, primes = args
    curve = CurveSpec(ainvs, conductor)
    return [trace_of_frobenius(curve, int(l)).a_ell for l in primes]


_TRACE_CACHE: dict = {}


def traces_below(curve: CurveSpec, bound: int, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """(primes, a_ell) for every prime ell < bound; results are memoized.

    ``workers`` > 1 splits the prime list into contiguous chunks handled by a
    process pool; chunks are merged in order so output never depends on it.
    """
    key = (curve.a_invariants, curve.conductor, bound)
    if key in _TRACE_CACHE:
        return _TRACE_CACHE[key]
    primes = arith.primes_array(bound)
    if workers > 1 and len(primes) > 4096:
        from concurrent.futures import ProcessPoolExecutor

        chunks = np.array_split(primes, workers * 4)
        jobs = [(curve.a_invariants, curve.conductor, c.tolist()) for c in chunks]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_trace_chunk, jobs))
        traces = [a for part in parts for a in part]
    else:
        traces = [trace_of_frobenius(curve, l).a_ell for l in primes.tolist()]
    out = (primes, np.asarray(traces, dtype=np.int64))
    out[0].setflags(write=False)
    out[1].setflags(write=False)
    _TRACE_CACHE[key] = out
    return out


def hecke_an(curve: CurveSpec, bound: int, coprime_to: int = 1) -> list[Optional[int]]:
    """Coefficients [a_1, ..., a_bound] of the L-series of E.

    Indices sharing a factor with ``coprime_to`` are returned as None and
    their primes are never counted; use it for models that are not minimal
    at some primes.
    """
    if bound < 1:
        raise DomainError("bound must be at least 1")
    a = [None] * (bound + 1)
    a[1] = 1
    if bound == 1:
        return a[1:]
    spf = arith.smallest_prime_factors(bound + 1)
    skip = set(arith.prime_divisors(coprime_to)) if abs(coprime_to) > 1 else set()
    prime_power: dict[int, int] = {}
    for ell in arith.sieve_primes(bound + 1):
        if ell in skip:
            continue
        t = trace_of_frobenius(curve, ell)
        prev, cur, q = 1, t.a_ell, ell
        good = not t.bad
        while q <= bound:
            prime_power[q] = cur
            prev, cur = cur, (t.a_ell * cur - ell * prev) if good else t.a_ell * cur
            q *= ell
    for n in range(2, bound + 1):
        p = int(spf[n])
        if p in skip:
            continue
        q, m = 1, n
        while m % p == 0:
            m //= p
            q *= p
        if a[m] is not None:
            a[n] = prime_power[q] * a[m]
    return a[1:]


def is_good_ordinary(curve: CurveSpec, p: int) -> bool:
    if p < 5:
        log.warning("ordinarity test at p=%d < 5", p)
    if curve.is_bad(p):
        return False
    return trace_of_frobenius(curve, p).a_ell % p != 0


def is_anomalous(curve: CurveSpec, p: int) -> bool:
    t = trace_of_frobenius(curve, p)
    if t.bad:
        raise DomainError(f"anomaly is only defined at good primes; {p} is bad")
    return t.a_ell % p == 1 % p


def local_torsion_trivial(curve: CurveSpec, ell: int, p: int) -> TorsionVerdict:
    """Decide whether E(Q_ell)[p] = 0, three-valued.

    Good ell != p is an exact test; the other cases use sufficient
    conditions and answer Inconclusive when those do not apply.
    """
    if p % 2 == 0:
        raise DomainError("p must be odd")
    t = trace_of_frobenius(curve, ell)
    S, N, I = TorsionStatus.TRIVIAL, TorsionStatus.NONTRIVIAL, TorsionStatus.INCONCLUSIVE
    if t.reduction is ReductionType.GOOD:
        n = ell + 1 - t.a_ell
        if ell != p:
            if n % p:
                return TorsionVerdict(S, f"p does not divide #E(F_{ell}) = {n}")
            return TorsionVerdict(N, f"p divides #E(F_{ell}) = {n}")
        if n % p:
            return TorsionVerdict(S, f"p is non-anomalous (a_p = {t.a_ell})")
        return TorsionVerdict(I, "p is anomalous")
    if t.reduction is ReductionType.ADDITIVE:
        return TorsionVerdict(I, "additive reduction")
    if ell == p:
        return TorsionVerdict(I, "multiplicative reduction at p")
    ns = ell - t.a_ell
    if t.reduction is ReductionType.SPLIT:
        c = (curve.tamagawa or {}).get(ell)
        if c is None:
            c = arith.valuation(curve.discriminant, ell) if _verified_minimal_at(curve, ell) else None
        if c is None:
            return TorsionVerdict(I, f"no Tamagawa number at {ell}")
    else:
        # nonsplit: c_ell is 1 or 2, never divisible by odd p
        c = (curve.tamagawa or {}).get(ell, 1)
    if (c * ns) % p:
        return TorsionVerdict(S, f"p does not divide c_{ell} * #E_ns(F_{ell}) = {c}*{ns}")
    return TorsionVerdict(I, f"p divides c_{ell} * #E_ns(F_{ell}) = {c}*{ns}")


def quadratic_twist(curve: CurveSpec, d: int, conductor: Optional[int] = None) -> CurveSpec:
    """Integral model of the twist E^(d): d y^2 = f(x).

    Short models y^2 = x^3 + Ax + B twist to y^2 = x^3 + A d^2 x + B d^3.
    For d = 1 mod 4 the model keeping a1, a3 has b-invariants
    (d b2, d^2 b4, d^3 b6), so Delta scales by d^6 and stays minimal at 2;
    other d go through y^2 = x^3 + d b2 x^2 + 8 d^2 b4 x + 16 d^3 b6.
    ``conductor``, when given, must divide N_E * disc(Q(sqrt d))^2.
    """
    if d == 0 or not arith.is_squarefree(d):
        raise DomainError(f"twist parameter {d} must be a nonzero square-free integer")
    a1, a2, a3, a4, a6 = curve.a_invariants
    if a1 == a2 == a3 == 0:
        ainvs = (0, 0, 0, a4 * d * d, a6 * d**3)
    elif d % 4 == 1:
        ainvs = (
            a1,
            d * a2 + a1 * a1 * (d - 1) // 4,
            a3,
            d * d * a4 + a1 * a3 * (d * d - 1) // 2,
            d**3 * a6 + a3 * a3 * (d**3 - 1) // 4,
        )
    else:
        b2, b4, b6, _ = curve.b_invariants
        ainvs = (0, d * b2, 0, 8 * d * d * b4, 16 * d**3 * b6)
    if conductor is not None and curve.conductor is not None and d != 1:
        D = arith.fundamental_discriminant(d)
        if (curve.conductor * D * D) % conductor:
            raise ValidationError(f"conductor {conductor} does not divide N_E * D^2")
    label = f"{curve.label}^({d})" if curve.label else None
    return CurveSpec(ainvs, conductor, label=label)


def unit_root(a_p: int, p: int, precision: int) -> int:
    """The unit root of X^2 - a_p X + p in Z_p, modulo p**precision."""
    if a_p % p == 0:
        raise DomainError(f"a_p = {a_p} is divisible by p = {p}: no unit root")
    if precision < 1:
        raise DomainError("precision must be positive")
    mod = p**precision
    alpha, k = a_p % p, 1
    while k < precision:
        k = min(2 * k, precision)
        m = p**k
        f = (alpha * alpha - a_p * alpha + p) % m
        df = (2 * alpha - a_p) % m
        alpha = (alpha - f * pow(df, -1, m)) % m
    return alpha % mod
