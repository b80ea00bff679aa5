"""Bivariate Krawtchouk polynomials P_{m,n}(x, y) and their orthonormal form.

The polynomials are parametrized either directly by four numbers
``(t, u, v, w)`` or by a positive quadruple ``p = (p1, p2, p3, p4)`` from
which (t, u, v, w), the trinomial weight parameters and the dual weight
parameters are all derived.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .series import appell_f1, f1_iterated, hyp2f1, is_exact, pochhammer
from .surd import Surd, SurdSum


class DegenerateWeightError(ValueError):
    """p1 * p4 == p2 * p3: the trinomial weight loses its third cell."""


@dataclass(frozen=True)
class PParams:
    p1: Fraction
    p2: Fraction
    p3: Fraction
    p4: Fraction

    def __post_init__(self):
        for name in ("p1", "p2", "p3", "p4"):
            v = Fraction(getattr(self, name))
            if v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def of(cls, *values) -> "PParams":
        if len(values) == 1:
            values = tuple(values[0])
        return cls(*(Fraction(v) for v in values))

    def as_tuple(self):
        return (self.p1, self.p2, self.p3, self.p4)

    @property
    def degenerate(self) -> bool:
        return self.p1 * self.p4 == self.p2 * self.p3


@dataclass(frozen=True)
class TUVWParams:
    t: object
    u: object
    v: object
    w: object

    def as_tuple(self):
        return (self.t, self.u, self.v, self.w)


@dataclass(frozen=True)
class EtaPair:
    eta1: object
    eta2: object

    @property
    def complement(self):
        return 1 - self.eta1 - self.eta2


def grid(N: int) -> list[tuple[int, int]]:
    """Points (x, y) with x + y <= N in lexicographic order."""
    return [(x, y) for x in range(N + 1) for y in range(N + 1 - x)]


def _check_nondegenerate(p: PParams):
    if p.degenerate:
        raise DegenerateWeightError(f"p1*p4 == p2*p3 for p = {tuple(map(str, p.as_tuple()))}: weight complement is 0")


def weight_complement(p: PParams) -> Fraction:
    """(p1 p4 - p2 p3)^2 / ((p1+p2)(p1+p3)(p4+p2)(p4+p3))."""
    p1, p2, p3, p4 = p.as_tuple()
    return (p1 * p4 - p2 * p3) ** 2 / ((p1 + p2) * (p1 + p3) * (p4 + p2) * (p4 + p3))


def eta_from_p(p: PParams) -> EtaPair:
    _check_nondegenerate(p)
    p1, p2, p3, p4 = p.as_tuple()
    s = p1 + p2 + p3 + p4
    eta = EtaPair(p1 * p2 * s / ((p1 + p2) * (p1 + p3) * (p2 + p4)),
                  p3 * p4 * s / ((p1 + p3) * (p4 + p2) * (p4 + p3)))
    if eta.complement != weight_complement(p):
        raise ArithmeticError("trinomial complement disagrees with its closed form")
    return eta


def etabar_from_p(p: PParams) -> EtaPair:
    """Dual weight parameters; their complement equals that of :func:`eta_from_p`."""
    _check_nondegenerate(p)
    p1, p2, p3, p4 = p.as_tuple()
    s = p1 + p2 + p3 + p4
    eta = EtaPair(p1 * p3 * s / ((p1 + p2) * (p1 + p3) * (p3 + p4)),
                  p2 * p4 * s / ((p1 + p2) * (p2 + p4) * (p4 + p3)))
    if eta.complement != weight_complement(p):
        raise ArithmeticError("dual trinomial complement disagrees with its closed form")
    return eta


def tuvw_from_p(p: PParams) -> TUVWParams:
    p1, p2, p3, p4 = p.as_tuple()
    s = p1 + p2 + p3 + p4
    return TUVWParams((p1 + p2) * (p1 + p3) / (p1 * s),
                      (p1 + p3) * (p4 + p3) / (p3 * s),
                      (p1 + p2) * (p2 + p4) / (p2 * s),
                      (p4 + p2) * (p4 + p3) / (p4 * s))


def multinomial(N: int, x: int, y: int) -> int:
    return math.factorial(N) // (math.factorial(x) * math.factorial(y) * math.factorial(N - x - y))


def trinomial_pmf(x: int, y: int, N: int, eta: EtaPair):
    if min(x, y) < 0 or x + y > N:
        raise ValueError(f"({x}, {y}) is outside the grid x + y <= {N}")
    return multinomial(N, x, y) * eta.eta1 ** x * eta.eta2 ** y * eta.complement ** (N - x - y)


def _check_indices(m, n, x, y, N):
    if min(m, n, x, y) < 0 or m + n > N or x + y > N:
        raise ValueError(f"need m+n <= N and x+y <= N, got (m,n)=({m},{n}), (x,y)=({x},{y}), N={N}")


def poly_P(m: int, n: int, x: int, y: int, N: int, params: TUVWParams):
    """Quadruple sum in t, u, v, w; an iterated Appell F1 at (-m, -n; -x, -y; -N)."""
    _check_indices(m, n, x, y, N)
    t, u, v, w = params.as_tuple()
    return f1_iterated(-m, -n, -x, -y, -N, t, u, v, w)


def poly_P_alt(m: int, n: int, x: int, y: int, N: int, params: TUVWParams):
    """Same value as :func:`poly_P`, via an outer double sum times a transformed F1.

    Uses the form with arguments v/(v-1), (v-w)/(v-1) when v != 1, otherwise
    (w-v)/(w-1), w/(w-1) when w != 1. With v == w == 1 it returns
    :func:`poly_P`.
    """
    _check_indices(m, n, x, y, N)
    t, u, v, w = params.as_tuple()
    one = Fraction(1) if is_exact(v) and is_exact(w) else 1.0
    if v != 1:
        scale = (one - v) ** n
        inner = lambda i, j: appell_f1(-n, x + y - N, j - y, i + j - N, v / (v - one), (v - w) / (v - one))
    elif w != 1:
        scale = (one - w) ** n
        inner = lambda i, j: appell_f1(-n, i - x, x + y - N, i + j - N, (w - v) / (w - one), w / (w - one))
    else:
        return poly_P(m, n, x, y, N, params)
    total = 0
    for i in range(min(m, x) + 1):
        for j in range(min(m - i, y) + 1):
            c = pochhammer(-m, i + j) * pochhammer(-x, i) * pochhammer(-y, j)
            if c == 0:
                continue
            c = Fraction(c, math.factorial(i) * math.factorial(j) * pochhammer(-N, i + j))
            total += c * t ** i * u ** j * inner(i, j)
    return scale * total


def poly_P_degenerate(m: int, n: int, x: int, y: int, N: int, t):
    """2F1(-m-n, -x-y; -N; t), the value of P_{m,n}(x, y) when t = u = v = w."""
    _check_indices(m, n, x, y, N)
    return hyp2f1(-m - n, -x - y, -N, t)


def orthonormal_R(m: int, n: int, x: int, y: int, N: int, p: PParams) -> Surd:
    """sqrt(b2(x,y;eta) b2(m,n;etabar) / (1-eta1-eta2)^N) * P_{m,n}(x, y), exact."""
    _check_indices(m, n, x, y, N)
    eta, etabar = eta_from_p(p), etabar_from_p(p)
    radicand = trinomial_pmf(x, y, N, eta) * trinomial_pmf(m, n, N, etabar) / eta.complement ** N
    return Surd.sqrt(radicand) * poly_P(m, n, x, y, N, tuvw_from_p(p))


def orthonormality_gram(N: int, p: PParams):
    """Matrix of sum over the grid of R_{m,n} R_{m',n'}; rows ordered like :func:`grid`."""
    pts = grid(N)
    R = {(m, n): [orthonormal_R(m, n, x, y, N, p) for x, y in pts] for m, n in pts}
    out = []
    for a in pts:
        row = []
        for b in pts:
            acc = SurdSum()
            for s1, s2 in zip(R[a], R[b]):
                acc.add(s1 * s2)
            row.append(acc.as_surd())
        out.append(row)
    return out


def _neg_poch_ratio_2f1(l: int, n: int, y: int, z):
    """(-y)_n * 2F1(-l, -n; y-n+1; z) as a polynomial.

    For n > y the 2F1 denominator vanishes while (-y)_n = 0; the product is
    finite and is summed through (-y)_n / (y-n+1)_k = (-1)^n (y-n+k+1)_{n-k}.
    """
    total = 0
    for k in range(min(l, n) + 1):
        total += (-1) ** n * pochhammer(y - n + k + 1, n - k) * Fraction(
            pochhammer(-l, k) * pochhammer(-n, k), math.factorial(k)) * z ** k
    return total


def r_mn_explicit(m: int, n: int, x: int, y: int, N: int, p: PParams) -> Surd:
    """Orthonormal function from the single-sum expression with three 2F1 factors.

    Independent of :func:`orthonormal_R`. The two agree exactly when
    p1 p4 > p2 p3; when p1 p4 < p2 p3 this form carries the extra sign
    (-1)^(N+m+n+x+y), so R_{0,0} is not positive everywhere.
    """
    _check_indices(m, n, x, y, N)
    _check_nondegenerate(p)
    p1, p2, p3, p4 = p.as_tuple()
    s = p1 + p2 + p3 + p4
    q = p2 + p3 + p4
    powers = [
        ("p1", p1, 2 * N - 2 * y - x - m), ("p2", p2, x + n), ("p3", p3, y + m), ("p4", p4, y - n),
        ("p1+p2", p1 + p2, y - N), ("p1+p3", p1 + p3, n - N), ("p2+p4", p2 + p4, N - m - 2 * y),
        ("p3+p4", p3 + p4, N - x - 2 * y), ("p1+p2+p3+p4", s, m - n + x + y),
    ]
    radicand = Fraction(multinomial(N, x, y) * multinomial(N, m, n))
    for label, base, exp in powers:
        if base <= 0:
            raise ValueError(f"square-root factor ({label}) is not positive")
        radicand *= base ** exp
    z1 = (p1 + p2) * q / (p2 * s)
    z2 = -p4 * q / (p2 * p3)
    z3 = (p1 + p3) * q / (p3 * s)
    ratio = p2 * p3 * s / (p1 * (p2 + p4) * (p3 + p4))
    total = Fraction(0)
    for l in range(N - y + 1):
        total += (Fraction(pochhammer(y - N, l), math.factorial(l)) * ratio ** l
                  * hyp2f1(-l, -x, y - N, z1)
                  * _neg_poch_ratio_2f1(l, n, y, z2)
                  * hyp2f1(n - y - l, -m, n - N, z3))
    rational = q ** (y - N) / pochhammer(-N, n) * total
    return Surd.sqrt(radicand) * rational
