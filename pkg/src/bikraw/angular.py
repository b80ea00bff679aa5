"""Triangle coefficients, Racah W, 9-j symbols and Racah polynomials.

Angular momenta are half-integers. They are carried as :class:`HalfInt`
(an integer ``two_j``) at the API boundary and as exact
:class:`~fractions.Fraction` values internally. Every coupling coefficient is
returned as an exact :class:`~bikraw.surd.Surd`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

from .series import ZeroDenominatorError, hyp_terminating, pochhammer
from .surd import Surd, SurdClosureError, SurdSum, legendre_exponent, primes_upto


class ClosedFormSingular(ArithmeticError):
    """The closed-form weight hits a negative factorial or a vanishing denominator."""


@dataclass(frozen=True, order=True)
class HalfInt:
    two_j: int

    def __post_init__(self):
        if not isinstance(self.two_j, int) or self.two_j < 0:
            raise ValueError(f"two_j must be a nonnegative integer, got {self.two_j!r}")

    @property
    def value(self) -> Fraction:
        return Fraction(self.two_j, 2)

    def __str__(self):
        return str(self.two_j // 2) if self.two_j % 2 == 0 else f"{self.two_j}/2"


Spin = Union[HalfInt, Fraction, int]


def _j(v: Spin) -> Fraction:
    """Coerce to an exact half-integer value (may be negative)."""
    if isinstance(v, HalfInt):
        return v.value
    f = Fraction(v)
    if (2 * f).denominator != 1:
        raise ValueError(f"{v!r} is not a half-integer")
    return f


def _int(f: Fraction) -> int:
    assert f.denominator == 1, f
    return f.numerator


def is_triangle(a, b, c) -> bool:
    """Triangle condition with integer perimeter, on nonnegative spins."""
    a, b, c = _j(a), _j(b), _j(c)
    if min(a, b, c) < 0:
        return False
    return (a + b + c).denominator == 1 and abs(a - b) <= c <= a + b


def _factorial_exponents(plus: Iterable[int], minus: Iterable[int]) -> dict[int, int]:
    """Prime exponents of prod(plus)! / prod(minus)!."""
    plus, minus = list(plus), list(minus)
    top = max(plus + minus + [1])
    exps = {}
    for p in primes_upto(max(top, 2)):
        if p > top:
            break
        e = sum(legendre_exponent(n, p) for n in plus) - sum(legendre_exponent(n, p) for n in minus)
        if e:
            exps[p] = e
    return exps


@lru_cache(maxsize=None)
def _delta(a: Fraction, b: Fraction, c: Fraction) -> Surd:
    if not is_triangle(a, b, c):
        return Surd()
    exps = _factorial_exponents([_int(a + b - c), _int(a - b + c), _int(b + c - a)], [_int(a + b + c + 1)])
    return Surd.from_prime_exponents(exps)


def triangle_delta(a: Spin, b: Spin, c: Spin) -> Surd:
    """Square root of (a+b-c)!(a-b+c)!(b+c-a)!/(a+b+c+1)!, zero off the triangle."""
    return _delta(_j(a), _j(b), _j(c))


@lru_cache(maxsize=None)
def _racah_w(a, e, b, y, k, x) -> Surd:
    if not (is_triangle(a, b, x) and is_triangle(b, y, k) and is_triangle(x, y, e) and is_triangle(a, e, k)):
        return Surd()
    pref = _delta(a, b, x) * _delta(b, y, k) * _delta(x, y, e) * _delta(a, e, k)
    f = math.factorial
    num = f(_int(2 * a)) * f(_int(a + b + e - y)) * f(_int(a + b + e + y + 1))
    den = (f(_int(a + b - x)) * f(_int(a - b + x)) * f(_int(b + y - k)) * f(_int(b - y + k))
           * f(_int(x - y + e)) * f(_int(y - x + e)) * f(_int(a + e - k)) * f(_int(a - e + k)))
    series = hyp_terminating(
        [k - a - e, -k - a - e - 1, x - a - b, -x - a - b - 1],
        [-2 * a, y - a - b - e, -y - a - b - e - 1], Fraction(1)).value
    return pref * (Fraction(num, den) * series)


def racah_w(a: Spin, e: Spin, b: Spin, y: Spin, k: Spin, x: Spin) -> Surd:
    """Racah coefficient W(a e b y; k x) as a Delta prefactor times a balanced 4F3."""
    return _racah_w(*(_j(v) for v in (a, e, b, y, k, x)))


@dataclass(frozen=True)
class NineJArgs:
    """Nine spins in row-major order::

        a b x
        c d y
        m n e
    """

    a: HalfInt
    b: HalfInt
    x: HalfInt
    c: HalfInt
    d: HalfInt
    y: HalfInt
    m: HalfInt
    n: HalfInt
    e: HalfInt

    @classmethod
    def from_two_j(cls, values: Iterable[int]) -> "NineJArgs":
        values = list(values)
        if len(values) != 9:
            raise ValueError("a 9-j symbol needs exactly nine entries")
        return cls(*(HalfInt(int(v)) for v in values))

    def values(self) -> tuple[Fraction, ...]:
        return tuple(getattr(self, f).value for f in "abxcdymne")

    def triads(self):
        a, b, x, c, d, y, m, n, e = self.values()
        return [(a, b, x), (c, d, y), (m, n, e), (a, c, m), (b, d, n), (x, y, e)]


def _triads(a, b, x, c, d, y, m, n, e):
    return [(a, b, x), (c, d, y), (m, n, e), (a, c, m), (b, d, n), (x, y, e)]


@lru_cache(maxsize=None)
def _ninej(a, b, x, c, d, y, m, n, e) -> Surd:
    if not all(is_triangle(*t) for t in _triads(a, b, x, c, d, y, m, n, e)):
        return Surd()
    lo = max(abs(a - e), abs(b - y), abs(c - n))
    hi = min(a + e, b + y, c + n)
    total = Surd()
    radicand = None
    k = lo
    while k <= hi:
        term = (2 * k + 1) * (_racah_w(a, e, c, n, k, m) * _racah_w(a, e, b, y, k, x)
                              * _racah_w(b, y, n, c, k, d))
        if not term.is_zero():
            if radicand is None:
                radicand = term.radicand
            elif term.radicand != radicand:
                raise SurdClosureError(f"9-j term at k={k} has radicand {term.radicand}, expected {radicand}")
            total = total + term
        k += 1
    return total


def ninej(args: NineJArgs | Iterable[Spin]) -> Surd:
    """9-j symbol as a single sum over k of three Racah coefficients.

    The k-dependent triangle factors each appear in exactly two of the three
    W factors, so all terms share one radicand; this is checked at runtime.
    """
    if isinstance(args, NineJArgs):
        vals = args.values()
    else:
        vals = tuple(_j(v) for v in args)
        if len(vals) != 9:
            raise ValueError("a 9-j symbol needs exactly nine entries")
    if min(vals) < 0:
        return Surd()
    return _ninej(*vals)


def _substituted(x, y, m, n, a, b, c, d, N):
    a, b, c, d = (_j(v) for v in (a, b, c, d))
    vals = (a, b, a + b - x, c, d, c + d - y, a + c - m, b + d - n, a + b + c + d - N)
    if min(vals) < 0 or min(x, y, m, n, N) < 0:
        raise ValueError(f"substituted 9-j arguments {tuple(str(v) for v in vals)} are out of range")
    return vals


def f_mn_normalized(x: int, y: int, m: int, n: int, a: Spin, b: Spin, c: Spin, d: Spin, N: int) -> Surd:
    """Normalized 9-j function whose squares at m=n=0 give the bivariate weight.

    The 9-j has rows (a, b, a+b-x), (c, d, c+d-y), (a+c-m, b+d-n, a+b+c+d-N),
    multiplied by the square root of
    (2a+2b+1-2x)(2a+2c+1-2m)(2b+2d+1-2n)(2c+2d+1-2y).
    """
    vals = _substituted(x, y, m, n, a, b, c, d, N)
    sym = _ninej(*vals)
    if sym.is_zero():
        return sym
    a, b, c, d = vals[0], vals[1], vals[3], vals[4]
    pre = (2 * a + 2 * b + 1 - 2 * x) * (2 * a + 2 * c + 1 - 2 * m) * (2 * b + 2 * d + 1 - 2 * n) * (2 * c + 2 * d + 1 - 2 * y)
    return Surd.sqrt(pre) * sym


def _fact(h) -> int:
    h = Fraction(h)
    if h.denominator != 1:
        raise ClosedFormSingular(f"non-integer factorial argument {h}")
    if h < 0:
        raise ClosedFormSingular(f"factorial of negative integer {h}")
    return math.factorial(h.numerator)


def _rfact(h) -> Fraction:
    """1/h!, which is 0 for negative integers h."""
    h = Fraction(h)
    if h.denominator != 1:
        raise ClosedFormSingular(f"non-integer factorial argument {h}")
    return Fraction(1, math.factorial(h.numerator)) if h >= 0 else Fraction(0)


def weight_w_xy(x: int, y: int, a: Spin, b: Spin, c: Spin, d: Spin, N: int) -> Fraction:
    """Closed-form weight at (x, y): the m=n=0 case of the normalized 9-j, squared.

    Points where the substituted 9-j violates a triangle give 0. Where the
    closed form has a negative factorial in a numerator or a 3F2 denominator
    vanishing before termination, :class:`ClosedFormSingular` is raised; the
    9-j route (``f_mn_normalized(x, y, 0, 0, ...) ** 2``) still applies there.
    """
    vals = _substituted(x, y, 0, 0, a, b, c, d, N)
    if x + y > N or not all(is_triangle(*t) for t in _triads(*vals)):
        return Fraction(0)
    A, B, C, D = (2 * v for v in (vals[0], vals[1], vals[3], vals[4]))
    f, r = _fact, _rfact
    v = Fraction(math.factorial(N), math.factorial(x) * math.factorial(y) * math.factorial(N - x - y))
    v *= f(A - x) * f(A) * f(B) * f(C) * f(D) * r(A + y - N) ** 2 * r(B - x) * r(C - y) * r(D - y)
    v *= Fraction(A + B + 1 - 2 * x) / (A + B + 1 - x) * f(A + B + y - x - N) * r(A + B - x)
    v *= f(A + C - N) * r(A + C)
    v *= Fraction(C + D + 1 - 2 * y) / (C + D + 1 - y)
    v *= f(C + D - 2 * y) * r(C + D - y) * f(C + D - 2 * y) * r(C + D + x - y - N)
    v *= f(B + D - N) * r(B + D)
    v *= f(A + B + C + D + 1 - N) * r(A + B + C + D + 1 - x - y - N)
    # a reciprocal factorial of a negative integer can meet a pole of the 3F2,
    # so the series is evaluated before a zero prefactor is trusted
    try:
        s = hyp_terminating([x + y - N, A + B + 1 + y - x - N, y - C], [A + 1 + y - N, 2 * y - C - D], Fraction(1)).value
    except ZeroDenominatorError as exc:
        raise ClosedFormSingular(f"3F2 factor: {exc}") from exc
    return v * s * s


def ninej_gram(a: Spin, b: Spin, c: Spin, d: Spin, e: Spin):
    """Exact Gram matrix of the 9-j orthogonality relation for fixed (a, b, c, d, e).

    Rows and columns are indexed by the admissible (m, n) pairs; entry
    ((m, n), (m', n')) is the sum over x, y of
    (2x+1)(2y+1) sqrt((2m+1)(2n+1)(2m'+1)(2n'+1)) {a b x; c d y; m n e}{a b x; c d y; m' n' e}.
    Returns ``(labels, matrix)`` with Surd entries.
    """
    a, b, c, d, e = (_j(v) for v in (a, b, c, d, e))

    def rng(p, q):
        v = abs(p - q)
        while v <= p + q:
            yield v
            v += 1

    mn = [(m, n) for m in rng(a, c) for n in rng(b, d) if is_triangle(m, n, e)]
    xy = [(x, y) for x in rng(a, b) for y in rng(c, d) if is_triangle(x, y, e)]
    rows = {}
    for m, n in mn:
        rows[(m, n)] = [
            Surd.sqrt((2 * x + 1) * (2 * y + 1) * (2 * m + 1) * (2 * n + 1)) * _ninej(a, b, x, c, d, y, m, n, e)
            for x, y in xy]
    gram = []
    for p in mn:
        row = []
        for q in mn:
            acc = SurdSum()
            for s1, s2 in zip(rows[p], rows[q]):
                acc.add(s1 * s2)
            row.append(acc)
        gram.append(row)
    return mn, gram


def ninej_orthocheck(max_two_j: int) -> dict:
    """Check the 9-j orthogonality relation for every admissible argument set.

    Covers every (a, b, c, d, e) such that all spins appearing in the sum,
    including the full x and y ranges, have ``two_j <= max_two_j``.
    """
    cases = failures = 0
    first_failure = None
    for ta, tb, tc, td in itertools.product(range(max_two_j + 1), repeat=4):
        if ta + tb > max_two_j or tc + td > max_two_j or ta + tc > max_two_j or tb + td > max_two_j:
            continue
        for te in range(max_two_j + 1):
            labels, gram = ninej_gram(*(Fraction(t, 2) for t in (ta, tb, tc, td, te)))
            for i, p in enumerate(labels):
                for k, q in enumerate(labels):
                    cases += 1
                    val = gram[i][k]
                    ok = (val.as_surd() == (1 if i == k else 0)) if len(val.terms) <= 1 else False
                    if not ok:
                        failures += 1
                        if first_failure is None:
                            first_failure = {"two_j": (ta, tb, tc, td, te), "mn": str(p), "mn2": str(q)}
    return {"max_two_j": max_two_j, "cases": cases, "failures": failures, "first_failure": first_failure}


# ---------------------------------------------------------------------------
# Racah polynomials


@dataclass(frozen=True)
class RacahParams:
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    N: int

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("N must be nonnegative")


def racah_polynomial(n: int, x: int, params: RacahParams):
    """Balanced terminating 4F3 in the variable x of degree n."""
    al, be, ga, N = params.alpha, params.beta, params.gamma, params.N
    if not (0 <= n <= N and 0 <= x <= N):
        raise ValueError("degree and variable must lie in 0..N")
    return hyp_terminating([-n, n + al + be + 1, -x, x + ga - N], [al + 1, -N, be + ga + 1], Fraction(1)).value


def _poch_multi(params, k):
    out = 1
    for p in params:
        out *= pochhammer(p, k)
    return out


def _nonzero(value, label):
    if value == 0:
        raise ZeroDenominatorError(f"denominator factor {label} vanishes", factor=label)
    return value


def racah_weight_and_norm(params: RacahParams):
    """Weight rho(x) and norm constants h_m, x, m in 0..N.

    With f_m(x) = sqrt(rho(x) h_m) R_m(x) the family f_0..f_N is orthonormal.
    """
    al, be, ga, N = params.alpha, params.beta, params.gamma, params.N
    rho = []
    g0 = _nonzero(ga - N, "(gamma-N)")
    for x in range(N + 1):
        den = _nonzero(math.factorial(x) * _poch_multi((ga - N - al, -N - be, ga + 1), x),
                       f"x!(gamma-N-alpha, -N-beta, gamma+1)_x at x={x}")
        rho.append(Fraction(ga - N + 2 * x) / g0 * _poch_multi((ga - N, al + 1, be + ga + 1, -N), x) / den)
    lead_den = _nonzero(pochhammer(al + be + 2, N), "(alpha+beta+2)_N") * _nonzero(pochhammer(-ga, N), "(-gamma)_N")
    lead = Fraction(_poch_multi((be + 1, al + 1 - ga), N)) / lead_den
    base = _nonzero(al + be + 1, "(alpha+beta+1)")
    h = []
    for m in range(N + 1):
        den = _nonzero(math.factorial(m) * _poch_multi((be + 1, al - ga + 1, N + al + be + 2), m),
                       f"m!(beta+1, alpha-gamma+1, N+alpha+beta+2)_m at m={m}")
        h.append(lead * (al + be + 1 + 2 * m) / base * _poch_multi((al + be + 1, al + 1, be + ga + 1, -N), m) / den)
    return rho, h


def racah_gram(params: RacahParams):
    """Matrix of sum_x f_m(x) f_n(x); the identity when the family is orthonormal.

    Diagonal entries are rational. Off-diagonal entries are returned as
    Surds: the rational sum is multiplied by sqrt(h_m h_n).
    """
    rho, h = racah_weight_and_norm(params)
    N = params.N
    R = [[racah_polynomial(m, x, params) for x in range(N + 1)] for m in range(N + 1)]
    out = []
    for m in range(N + 1):
        row = []
        for n in range(N + 1):
            s = sum(rho[x] * R[m][x] * R[n][x] for x in range(N + 1))
            if m == n:
                row.append(Surd.rational(h[m] * s))
            elif s == 0:
                row.append(Surd())
            else:
                hh = h[m] * h[n]
                row.append(Surd(s, hh) if hh >= 0 else Surd(s, -hh))  # magnitude only for mixed signs
        out.append(row)
    return out
