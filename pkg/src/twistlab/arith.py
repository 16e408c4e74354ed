"""Exact integer number theory: primes, quadratic symbols, local square classes.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, FactorizationError, ResourceError

# type alias for values in {-1, 0, 1}
SymbolValue = int

#: Largest sieve bound accepted by :func:`sieve_primes` (one byte per integer).
SIEVE_MAX = 2**31

#: Trial division limit used by :func:`factorize` before switching to Pollard rho.
TRIAL_DIVISION_BOUND = 10**7

# Deterministic Miller-Rabin for n < 3.3e24 (covers all 64-bit inputs).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


# ---------------------------------------------------------------------------
# primes


def prime_mask(bound: int) -> np.ndarray:
    """Boolean array ``m`` of length ``bound`` with ``m[n]`` true iff n is prime."""
    if bound > SIEVE_MAX:
        raise ResourceError(f"sieve bound {bound} exceeds cap {SIEVE_MAX}")
    if bound < 0:
        raise DomainError("sieve bound must be non-negative")
    mask = np.ones(max(bound, 2), dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(bound - 1) + 1 if bound > 1 else 0):
        if mask[p]:
            mask[p * p :: p] = False
    return mask[:bound]


def sieve_primes(bound: int) -> tuple[int, ...]:
    """All primes strictly below ``bound``, ascending."""
    if bound < 2:
        raise DomainError("sieve bound must be at least 2")
    return tuple(np.flatnonzero(prime_mask(bound)).tolist())


def primes_array(bound: int) -> np.ndarray:
    """Like :func:`sieve_primes` but returns an int64 numpy array."""
    return np.flatnonzero(prime_mask(bound)).astype(np.int64)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def smallest_prime_factors(bound: int) -> np.ndarray:
    """``spf[n]`` is the least prime factor of n for 2 <= n < bound."""
    spf = np.zeros(max(bound, 2), dtype=np.int64)
    for p in range(2, bound):
        if spf[p] == 0:
            spf[p] = p
            if p * p < bound:
                block = spf[p * p :: p]
                block[block == 0] = p
    return spf[:bound]


# ---------------------------------------------------------------------------
# factorization


def _pollard_brent(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(
    n: int, trial_bound: int = TRIAL_DIVISION_BOUND, rho_rounds: int = 64
) -> dict[int, int]:
    """Prime factorization of ``|n|`` as ``{prime: exponent}``.

    Trial division runs up to ``min(trial_bound, sqrt(n))``; any cofactor
    left over is split with Brent's variant of Pollard rho.
    """
    n = abs(n)
    if n == 0:
        raise DomainError("cannot factor 0")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f, step = 5, 2
    limit = min(trial_bound, math.isqrt(n))
    # small inputs are done entirely by trial division
    while f <= limit and n > 1:
        if n % f == 0:
            while n % f == 0:
                out[f] = out.get(f, 0) + 1
                n //= f
            limit = min(trial_bound, math.isqrt(n))
        f += step
        step = 6 - step
    if n > 1:
        rng = random.Random(n)
        stack = [n]
        while stack:
            m = stack.pop()
            if m == 1:
                continue
            if is_prime(m):
                out[m] = out.get(m, 0) + 1
                continue
            for _ in range(rho_rounds):
                d = _pollard_brent(m, rng)
                if 1 < d < m:
                    break
            else:
                raise FactorizationError(f"could not split {m}")
            stack.extend((d, m // d))
    return dict(sorted(out.items()))


def prime_divisors(n: int) -> list[int]:
    return list(factorize(n))


def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    return all(e == 1 for e in factorize(n).values())


def squarefree_kernel(n: int) -> int:
    """The square-free integer in the class of ``n`` modulo squares (sign kept)."""
    if n == 0:
        raise DomainError("0 has no square class")
    k = 1
    for p, e in factorize(n).items():
        if e % 2:
            k *= p
    return k if n > 0 else -k


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise DomainError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# quadratic symbols


def jacobi(a: int, n: int) -> SymbolValue:
    """Jacobi symbol (a/n) for odd positive n."""
    if n <= 0 or n % 2 == 0:
        raise DomainError(f"Jacobi symbol needs odd positive modulus, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def paper_qrs(c: int, d: int) -> SymbolValue:
    """Quadratic residue symbol (c/d) for odd d, extended to negative d.

    d > 0 gives the Jacobi symbol (any sign of c); for d < 0 the symbol is
    (c/|d|) when c > 0 and -(c/|d|) when c < 0; (0/±1) is 1.
    """
    if d % 2 == 0:
        raise DomainError(f"residue symbol needs odd d, got {d}")
    if d > 0:
        return jacobi(c, d)
    if c == 0:
        # only d = -1 reaches here with a nonzero answer
        return jacobi(0, -d)
    if c > 0:
        return jacobi(c, -d)
    return -jacobi(c, -d)


@dataclass(frozen=True)
class Epsilon:
    """The eighth-root-of-unity factor eps_d in {1, i}, stored as i**exponent."""

    exponent: int

    def __post_init__(self):
        if self.exponent not in (0, 1):
            raise DomainError("epsilon exponent must be 0 or 1")

    @property
    def value(self) -> complex:
        return 1j if self.exponent else 1 + 0j


def epsilon_d(d: int) -> Epsilon:
    if d % 2 == 0:
        raise DomainError(f"epsilon_d needs odd d, got {d}")
    return Epsilon(0 if d % 4 == 1 else 1)


def legendre(a: int, p: int) -> SymbolValue:
    """Legendre symbol via Euler's criterion (p an odd prime)."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def legendre_table(p: int) -> np.ndarray:
    """Array ``t`` with ``t[a] = (a/p)`` for 0 <= a < p, p an odd prime."""
    t = -np.ones(p, dtype=np.int8)
    x = np.arange(1, p, dtype=np.int64)
    t[(x * x) % p] = 1
    t[0] = 0
    return t


def is_fundamental_discriminant(D: int) -> bool:
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return is_squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def fundamental_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt(d)) for square-free d != 0, 1."""
    if d == 0 or not is_squarefree(d):
        raise DomainError(f"{d} is not a nonzero square-free integer")
    return d if d % 4 == 1 else 4 * d


def kronecker_chi(D: int, n: int) -> SymbolValue:
    """Quadratic character chi_D(n) = (D/n), D = 1 or a fundamental discriminant."""
    if D != 1 and not is_fundamental_discriminant(D):
        raise DomainError(f"{D} is not a fundamental discriminant")
    return kronecker(D, n)


def kronecker(a: int, n: int) -> SymbolValue:
    """Kronecker symbol (a/n) for arbitrary integers, without validation."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    return result * jacobi(a, n)


def sqrt_mod_prime(a: int, p: int) -> int:
    """A square root of a modulo the odd prime p (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        raise DomainError(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


# ---------------------------------------------------------------------------
# local square classes


@dataclass(frozen=True, order=True)
class LocalSquareClass:
    """Class of a nonzero rational in Q_q^* / (Q_q^*)^2.

    ``unit_class`` is the Legendre symbol of the unit part for odd q and the
    unit part mod 8 for q = 2.
    """

    prime: int
    val_parity: int
    unit_class: int

    def __post_init__(self):
        if self.val_parity not in (0, 1):
            raise DomainError("val_parity must be 0 or 1")
        allowed = (1, 3, 5, 7) if self.prime == 2 else (1, -1)
        if self.unit_class not in allowed:
            raise DomainError(f"unit class {self.unit_class} invalid at q={self.prime}")

    @property
    def is_trivial(self) -> bool:
        return self.val_parity == 0 and self.unit_class == 1


def _as_fraction(n) -> Fraction:
    if isinstance(n, tuple):
        num, den = n
        if den == 0:
            raise DomainError("zero denominator")
        return Fraction(num, den)
    return Fraction(n)


def local_square_class(n, q: int) -> LocalSquareClass:
    """Square class of ``n`` at the prime ``q``.

    ``n`` may be an int, a Fraction or a ``(numerator, denominator)`` pair.
    """
    x = _as_fraction(n)
    if x == 0:
        raise DomainError("0 has no local square class")
    num, den = x.numerator, x.denominator
    vn, vd = valuation(num, q), valuation(den, q)
    un, ud = num // q**vn, den // q**vd
    # unit part of num/den is un * ud^{-1}, same square class as un * ud
    u = un * ud
    if q == 2:
        unit = u % 8
    else:
        unit = legendre(u, q)
    return LocalSquareClass(q, (vn - vd) % 2, unit)


def same_local_square(n1, n2, q: int) -> bool:
    return local_square_class(n1, q) == local_square_class(n2, q)


# ---------------------------------------------------------------------------
# Iwasawa invariants


@dataclass(frozen=True)
class IwasawaInvariants:
    mu: int
    lam: int

    @property
    def lambda_(self) -> int:
        return self.lam


def iwasawa_mu_lambda(coeffs, p: int) -> IwasawaInvariants:
    """mu and lambda of the power series sum(c_i x^i) over Z_p.

    mu is the least p-adic valuation of a coefficient; lambda is the first
    index attaining it, i.e. the degree of the distinguished polynomial in
    the Weierstrass factorization of f / p^mu.
    """
    vals = [valuation(c, p) if c else None for c in coeffs]
    finite = [v for v in vals if v is not None]
    if not finite:
        raise DomainError("zero polynomial has no Iwasawa invariants")
    mu = min(finite)
    return IwasawaInvariants(mu, vals.index(mu))
