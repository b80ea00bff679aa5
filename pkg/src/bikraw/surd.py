"""Exact numbers of the form ``q * sqrt(r)`` with rational ``q`` and integer ``r``.

The radicand is kept squarefree, so two surds with the same radicand can be
added and equality of values is decided by comparing ``(q, r)``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

_SMALL_PRIMES_LIMIT = 10_000


class SurdClosureError(ArithmeticError):
    """Attempt to add surds with different radicands."""


@lru_cache(maxsize=None)
def primes_upto(n: int) -> tuple[int, ...]:
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p:: p] = bytearray(len(range(p * p, n + 1, p)))
    return tuple(i for i, f in enumerate(sieve) if f)


def legendre_exponent(n: int, p: int) -> int:
    """Exponent of the prime ``p`` in ``n!``."""
    e = 0
    while n:
        n //= p
        e += n
    return e


def _square_split(n: int) -> tuple[int, int]:
    """Write a positive integer as ``s**2 * f`` and return ``(s, f)``.

    ``f`` is squarefree unless ``n`` has a non-square cofactor with all prime
    factors above the trial-division limit.
    """
    s, f = 1, 1
    for p in primes_upto(_SMALL_PRIMES_LIMIT):
        if p * p > n:
            break
        if n % p:
            continue
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            f *= p
    if n > 1:
        r = math.isqrt(n)
        if r * r == n:
            s *= r
        else:
            f *= n
    return s, f


class Surd:
    """Value ``coefficient * sqrt(radicand)``; zero is stored as ``(0, 0)``."""

    __slots__ = ("coefficient", "radicand")

    def __init__(self, coefficient=0, radicand=1, *, _canonical=False):
        coefficient = Fraction(coefficient)
        radicand = Fraction(radicand)
        if radicand < 0:
            raise ValueError(f"negative radicand {radicand}")
        if coefficient == 0 or radicand == 0:
            self.coefficient, self.radicand = Fraction(0), Fraction(0)
            return
        if not _canonical:
            # sqrt(p/q) = sqrt(p*q) / q
            n = radicand.numerator * radicand.denominator
            s, f = _square_split(n)
            coefficient = coefficient * s / radicand.denominator
            radicand = Fraction(f)
        self.coefficient = coefficient
        self.radicand = radicand

    @classmethod
    def sqrt(cls, r) -> "Surd":
        """``sqrt(r)`` for a nonnegative rational ``r``."""
        return cls(1, r)

    @classmethod
    def rational(cls, q) -> "Surd":
        return cls(q, 1, _canonical=True) if q != 0 else cls()

    @classmethod
    def from_prime_exponents(cls, exps: dict[int, int], coefficient=1) -> "Surd":
        """``coefficient * sqrt(prod p**e)`` with (possibly negative) exponents."""
        num, den, rad = 1, 1, 1
        for p, e in exps.items():
            if e == 0:
                continue
            h, odd = divmod(e, 2)  # floor division keeps e = 2h + odd with odd in {0, 1}
            if h > 0:
                num *= p ** h
            elif h < 0:
                den *= p ** (-h)
            if odd:
                rad *= p
        return cls(Fraction(coefficient) * num / den, rad, _canonical=True)

    def is_zero(self) -> bool:
        return self.coefficient == 0

    def square(self) -> Fraction:
        return self.coefficient * self.coefficient * self.radicand

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Surd(self.coefficient * other, self.radicand, _canonical=True) if other else Surd()
        if not isinstance(other, Surd):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return Surd()
        r1, r2 = self.radicand.numerator, other.radicand.numerator
        g = math.gcd(r1, r2)
        # squarefree r1, r2: r1*r2 = g^2 * (r1/g)(r2/g) and the cofactor is squarefree
        return Surd(self.coefficient * other.coefficient * g, (r1 // g) * (r2 // g), _canonical=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return Surd(self.coefficient / other, self.radicand, _canonical=True)
        if not isinstance(other, Surd):
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by zero surd")
        # 1/(c sqrt r) = sqrt(r) / (c r)
        inv = Surd(1 / (other.coefficient * other.radicand), other.radicand, _canonical=True)
        return self * inv

    def __neg__(self):
        return Surd(-self.coefficient, self.radicand, _canonical=True) if not self.is_zero() else Surd()

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Surd.rational(other)
        if not isinstance(other, Surd):
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.radicand != other.radicand:
            raise SurdClosureError(f"cannot add sqrt({self.radicand}) and sqrt({other.radicand}) terms")
        c = self.coefficient + other.coefficient
        return Surd(c, self.radicand, _canonical=True) if c else Surd()

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Surd.rational(other)
        if not isinstance(other, Surd):
            return NotImplemented
        if (self.coefficient > 0) != (other.coefficient > 0) or (self.coefficient < 0) != (other.coefficient < 0):
            return False
        return self.square() == other.square()

    def __hash__(self):
        return hash((self.coefficient, self.radicand))

    def __float__(self):
        if self.is_zero():
            return 0.0
        return float(self.coefficient) * math.sqrt(self.radicand)

    def __repr__(self):
        if self.radicand in (0, 1):
            return f"Surd({self.coefficient})"
        return f"Surd({self.coefficient} * sqrt({self.radicand}))"

    def sign(self) -> int:
        return (self.coefficient > 0) - (self.coefficient < 0)


class SurdSum:
    """Exact linear combination of square roots of distinct squarefree integers.

    Such roots are linearly independent over the rationals, so the total is
    zero exactly when every radicand group cancels.
    """

    def __init__(self):
        self.terms: dict[Fraction, Fraction] = {}

    def add(self, s: Surd) -> None:
        if s.is_zero():
            return
        c = self.terms.get(s.radicand, 0) + s.coefficient
        if c:
            self.terms[s.radicand] = c
        else:
            self.terms.pop(s.radicand, None)

    def is_zero(self) -> bool:
        return not self.terms

    def as_surd(self) -> Surd:
        if not self.terms:
            return Surd()
        if len(self.terms) > 1:
            raise SurdClosureError(f"sum spans {len(self.terms)} radicands")
        (r, c), = self.terms.items()
        return Surd(c, r, _canonical=True)

    def __float__(self):
        return sum(float(c) * math.sqrt(r) for r, c in self.terms.items())
