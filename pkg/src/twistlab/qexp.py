"""Truncated q-expansions of integral and half-integral weight.

Coefficients are exact: ints, or Fractions where the weight-1/2 Hecke
operator introduces powers of 1/p.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Optional

from . import arith
from .curves import CurveSpec, hecke_an
from .errors import DomainError, IndeterminateError, PrecisionError, ValidationError


def _normalize(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    if isinstance(c, bool) or not isinstance(c, Rational):
        raise ValidationError(f"coefficient {c!r} is not an exact rational")
    return c


@dataclass(frozen=True)
class QExpansion:
    """sum_{n < precision} coeffs[n] q^n, tagged with weight, level and character."""

    weight_twice: int
    level: int
    character_D: int
    coeffs: tuple
    flags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.weight_twice < 1:
            raise ValidationError("weight_twice must be positive")
        if self.level < 1:
            raise ValidationError("level must be positive")
        if self.weight_twice % 2 and self.level % 4:
            raise ValidationError("half-integral weight needs 4 | level")
        if self.character_D != 1 and not arith.is_fundamental_discriminant(self.character_D):
            raise ValidationError(f"character_D={self.character_D} is not 1 or fundamental")
        if not self.coeffs:
            raise ValidationError("empty q-expansion")
        object.__setattr__(self, "coeffs", tuple(_normalize(c) for c in self.coeffs))
        object.__setattr__(self, "flags", frozenset(self.flags))

    @property
    def precision(self) -> int:
        return len(self.coeffs)

    @property
    def weight(self) -> Fraction:
        return Fraction(self.weight_twice, 2)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self):
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other: "QExpansion") -> "QExpansion":
        if (self.weight_twice, self.level, self.character_D) != (
            other.weight_twice,
            other.level,
            other.character_D,
        ):
            raise DomainError("can only add q-expansions of equal weight, level and character")
        n = min(self.precision, other.precision)
        return QExpansion(
            self.weight_twice,
            self.level,
            self.character_D,
            tuple(a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n])),
        )

    def to_record(self) -> dict:
        return {
            "weight_twice": self.weight_twice,
            "level": self.level,
            "character_D": self.character_D,
            "precision": self.precision,
            "coeffs": [c if isinstance(c, int) else f"{c.numerator}/{c.denominator}" for c in self.coeffs],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "QExpansion":
        try:
            coeffs = [Fraction(c) if isinstance(c, str) else c for c in rec["coeffs"]]
            q = cls(int(rec["weight_twice"]), int(rec["level"]), int(rec["character_D"]), tuple(coeffs))
        except KeyError as exc:
            raise ValidationError(f"q-expansion record missing field {exc.args[0]!r}") from None
        if "precision" in rec and int(rec["precision"]) != q.precision:
            raise ValidationError("precision field disagrees with the coefficient count")
        return q


@dataclass(frozen=True)
class HeckeResult:
    series: QExpansion
    operator_prime: int


def character_discriminant(*discs: int) -> int:
    """Fundamental discriminant of the primitive character chi_{D1} chi_{D2} ..."""
    prod = 1
    for D in discs:
        prod *= D
    k = arith.squarefree_kernel(prod)
    return 1 if k == 1 else arith.fundamental_discriminant(k)


def legendre_product_discriminant(r: int) -> int:
    """Discriminant of prod_{q | r} (./q) for square-free odd r: prod of q* = ±q."""
    D = 1
    for q in arith.prime_divisors(r) if r > 1 else []:
        D *= q if q % 4 == 1 else -q
    return D


def theta_series(precision: int) -> QExpansion:
    """Theta(z) = sum over all integers n of q^(n^2)."""
    if precision < 1:
        raise DomainError("precision must be positive")
    c = [0] * precision
    c[0] = 1
    m = 1
    while m * m < precision:
        c[m * m] = 2
        m += 1
    return QExpansion(1, 4, 1, tuple(c))


def shimura_theta(char_modulus: int, t: int, precision: int) -> QExpansion:
    """F = sum over m in Z of chi(m) m q^(t m^2), chi = prod of Legendre symbols mod r.

    Weight 3/2, level 4 r^2 t, character chi * chi_t * chi_{-1}. For even chi
    the terms for m and -m cancel; a zero series flagged ``even-character`` is
    returned.
    """
    r = char_modulus
    if r < 1 or r % 2 == 0 or not (r == 1 or arith.is_squarefree(r)):
        raise DomainError(f"character modulus {r} must be odd and square-free")
    if t < 1 or not arith.is_squarefree(t):
        raise DomainError(f"t = {t} must be a positive square-free integer")
    if precision < 1:
        raise DomainError("precision must be positive")
    D_chi = legendre_product_discriminant(r)
    D_t = 1 if t == 1 else arith.fundamental_discriminant(t)
    char = character_discriminant(D_chi, D_t, -4)
    level = 4 * r * r * t
    c = [0] * precision
    flags = set()
    if D_chi > 0:
        flags.add("even-character")
    else:
        m = 1
        while t * m * m < precision:
            c[t * m * m] = 2 * (arith.jacobi(m, r) if r > 1 else 1) * m
            m += 1
    return QExpansion(3, level, char, tuple(c), frozenset(flags))


def newform_qexp(curve: CurveSpec, precision: int) -> QExpansion:
    """Weight-2 newform attached to E: coefficients [0, a_1, ..., a_{B-1}]."""
    if precision < 1:
        raise DomainError("precision must be positive")
    if curve.conductor is None:
        raise DomainError("newform level needs the curve conductor")
    an = hecke_an(curve, precision - 1) if precision > 1 else []
    return QExpansion(4, curve.conductor, 1, (0, *an))


def twist_qexp(F: QExpansion, psi_D: int) -> QExpansion:
    """F_psi = sum a_n psi(n) q^n for the quadratic character of discriminant psi_D."""
    if psi_D == 1:
        return F
    if not arith.is_fundamental_discriminant(psi_D):
        raise DomainError(f"{psi_D} is not a fundamental discriminant")
    M = abs(psi_D)
    coeffs = tuple(c * arith.kronecker(psi_D, n) if c else c for n, c in enumerate(F.coeffs))
    return QExpansion(F.weight_twice, F.level * M * M, F.character_D, coeffs)


def hecke_Tp2(F: QExpansion, p: int) -> HeckeResult:
    """T(p^2) on a form of weight k/2, k odd.

    b_n = a_{p^2 n} + chi_1(p) (n/p) p^(lam-1) a_n + chi(p^2) p^(k-2) a_{n/p^2}
    with lam = (k-1)/2 and chi_1(p) = chi(p) (-1/p)^lam. Output precision is
    floor(B / p^2).
    """
    k = F.weight_twice
    if k % 2 == 0:
        raise DomainError("T(p^2) is implemented for half-integral weight only")
    if not arith.is_prime(p) or p == 2:
        raise DomainError(f"{p} is not an odd prime")
    if F.level % p == 0:
        raise DomainError(f"p = {p} divides the level {F.level}")
    p2 = p * p
    if F.precision < p2:
        raise PrecisionError(f"precision {F.precision} < p^2 = {p2}")
    lam = (k - 1) // 2
    chi_p = arith.kronecker(F.character_D, p)
    chi1 = chi_p * arith.legendre(-1, p) ** lam
    mid = chi1 * Fraction(p) ** (lam - 1)
    last = chi_p * chi_p * Fraction(p) ** (k - 2)
    a = F.coeffs
    out = []
    for n in range(F.precision // p2):
        b = a[p2 * n]
        if a[n]:
            b += mid * arith.legendre(n, p) * a[n]
        if n % p2 == 0:
            b += last * a[n // p2]
        out.append(b)
    series = QExpansion(k, F.level, F.character_D, tuple(out))
    return HeckeResult(series, p)


def eigen_check(F: QExpansion, p: int, through: int) -> Optional[Fraction]:
    """Eigenvalue of T(p^2) on F read off coefficients n < ``through``, or None."""
    if F.precision < through * p * p:
        raise PrecisionError(f"need precision {through * p * p}, have {F.precision}")
    a = F.coeffs[:through]
    if not any(a):
        raise IndeterminateError("all coefficients below the window are zero")
    b = hecke_Tp2(F, p).series.coeffs[:through]
    ratio = None
    for an, bn in zip(a, b):
        if an == 0:
            if bn != 0:
                return None
            continue
        r = Fraction(bn) / an
        if ratio is None:
            ratio = r
        elif r != ratio:
            return None
    return ratio
