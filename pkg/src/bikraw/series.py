"""Terminating hypergeometric and Appell-type series.

Every routine works on either exact rationals (:class:`fractions.Fraction`
or ``int``) or binary floats; the backend is whatever the caller passes in.
Sums are plain nested loops over the finite index range, no recurrences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

Scalar = Union[int, Fraction, float]

#: float parameters closer than this to a nonpositive integer are snapped to it
SNAP_TOL = 1e-9


class SeriesError(ValueError):
    """Base class for ill-posed series input."""


class NonTerminatingError(SeriesError):
    pass


class ZeroDenominatorError(SeriesError):
    """A denominator factor vanished before the series terminated."""

    def __init__(self, message, index=None, factor=None):
        super().__init__(message)
        self.index = index
        self.factor = factor


class UnbalancedError(SeriesError):
    def __init__(self, residual):
        super().__init__(f"series is not balanced (residual a+b+c+1-d-e-f-n = {residual})")
        self.residual = residual


@dataclass(frozen=True)
class SeriesValue:
    value: Scalar
    term_count: int


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def as_exact(x) -> Fraction:
    """Coerce ``int``, ``Fraction`` or a string such as ``"3/4"`` to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"cannot use {x!r} in the exact backend")


def nonpositive_integer(a) -> int | None:
    """Return ``-a`` if ``a`` is a nonpositive integer, else ``None``.

    Floats within :data:`SNAP_TOL` of a nonpositive integer count as one.
    """
    if is_exact(a):
        a = Fraction(a)
        if a.denominator == 1 and a <= 0:
            return -a.numerator
        return None
    r = round(a)
    if abs(a - r) <= SNAP_TOL and r <= 0:
        return -int(r)
    return None


def _is_zero(x) -> bool:
    if is_exact(x):
        return x == 0
    return abs(x) <= SNAP_TOL


def pochhammer(a, k: int):
    """Rising factorial ``a (a+1) ... (a+k-1)``; 1 for ``k == 0``."""
    if k < 0:
        raise ValueError("pochhammer index must be nonnegative")
    r = 1
    for i in range(k):
        r *= a + i
    return r


def poch_table(a, kmax: int) -> list:
    """``[(a)_0, (a)_1, ..., (a)_kmax]``."""
    out = [1]
    r = 1
    for i in range(kmax):
        r = r * (a + i)
        out.append(r)
    return out


def _snap(a):
    n = nonpositive_integer(a)
    if n is not None and not is_exact(a):
        return float(-n)
    return a


def _unit(z):
    return Fraction(1) if is_exact(z) else 1.0


def hyp_terminating(numer: Sequence, denom: Sequence, z) -> SeriesValue:
    """Terminating generalized hypergeometric series ``pFq(numer; denom; z)``.

    The sum runs until the first numerator Pochhammer vanishes. A
    denominator factor that is zero strictly before that point raises
    :class:`ZeroDenominatorError` carrying the index.
    """
    numer = [_snap(a) for a in numer]
    denom = [_snap(b) for b in denom]
    stops = [n for n in map(nonpositive_integer, numer) if n is not None]
    if not stops:
        raise NonTerminatingError(f"no nonpositive integer among numerator parameters {numer!r}")
    top = min(stops)

    term = _unit(z)
    total = term
    count = 1
    for k in range(top):
        den = 1
        for b in denom:
            f = b + k
            if _is_zero(f):
                raise ZeroDenominatorError(
                    f"denominator parameter {b!r} hits zero at index {k + 1} "
                    f"before termination at {top}", index=k + 1, factor=b)
            den *= f
        num = 1
        for a in numer:
            num *= a + k
        term = term * num * z / (den * (k + 1))
        if term == 0:
            # only z == 0 can zero a term before `top`
            break
        total += term
        count += 1
    return SeriesValue(total, count)


def hyp(numer: Sequence, denom: Sequence, z):
    """Value-only shorthand for :func:`hyp_terminating`."""
    return hyp_terminating(numer, denom, z).value


def hyp2f1(a, b, c, z):
    return hyp([a, b], [c], z)


def whipple_transform(numer: Sequence, denom: Sequence):
    """Whipple's transformation of a terminating balanced 4F3 at unit argument.

    ``numer = (-n, a, b, c)`` and ``denom = (d, e, f)`` with
    ``a + b + c + 1 == d + e + f + n``. Returns ``(numer', denom', prefactor)``
    with ``4F3(numer; denom; 1) == prefactor * 4F3(numer'; denom'; 1)``:

        numer' = (-n, a, d - b, d - c)
        denom' = (d, 1 + a - e - n, 1 + a - f - n)
        prefactor = (e - a)_n (f - a)_n / ((e)_n (f)_n)
    """
    if len(numer) != 4 or len(denom) != 3:
        raise ValueError("whipple_transform needs 4 numerator and 3 denominator parameters")
    mn, a, b, c = numer
    d, e, f = denom
    n = nonpositive_integer(mn)
    if n is None:
        raise NonTerminatingError(f"first numerator parameter {mn!r} is not a nonpositive integer")
    residual = a + b + c + 1 - d - e - f - n
    if not _is_zero(residual):
        raise UnbalancedError(residual)
    den = pochhammer(e, n) * pochhammer(f, n)
    if _is_zero(den):
        raise ZeroDenominatorError("(e)_n (f)_n vanishes", factor=(e, f))
    pre = _one(a, b, c, d, e, f) * pochhammer(e - a, n) * pochhammer(f - a, n) / den
    return (mn, a, d - b, d - c), (d, 1 + a - e - n, 1 + a - f - n), pre


def _bound(param, *args):
    """Largest index allowed by a terminating parameter or a zero argument."""
    n = nonpositive_integer(param)
    if n is not None:
        return n
    if args and all(_is_zero(x) for x in args):
        return 0
    return None


def _check_den(d, k, top):
    if _is_zero(d):
        raise ZeroDenominatorError(
            f"denominator Pochhammer vanishes at total index {k} before termination", index=k)


def appell_f1(a, b, c, d, x, y):
    """Appell F1: sum of (a)_{i+j} (b)_i (c)_j x^i y^j / (i! j! (d)_{i+j})."""
    A = _bound(a, x, y)
    B = _bound(b, x)
    C = _bound(c, y)
    if A is None and (B is None or C is None):
        raise NonTerminatingError("appell_f1 needs a or both b and c to be nonpositive integers")
    imax = A if B is None else (B if A is None else min(A, B))
    jmax = A if C is None else (C if A is None else min(A, C))
    kmax = imax + jmax
    pa, pd = poch_table(a, kmax), poch_table(d, kmax)
    pb, pc = poch_table(b, imax), poch_table(c, jmax)
    xs, ys = poch_table_pow(x, imax), poch_table_pow(y, jmax)
    one = _one(a, b, c, d, x, y)
    xi = [one * pb[i] * xs[i] / math.factorial(i) for i in range(imax + 1)]
    yj = [one * pc[j] * ys[j] / math.factorial(j) for j in range(jmax + 1)]
    total = 0
    for i in range(imax + 1):
        if xi[i] == 0:
            continue
        for j in range(jmax + 1):
            if A is not None and i + j > A:
                break
            if pa[i + j] == 0 or yj[j] == 0:
                continue
            _check_den(pd[i + j], i + j, A)
            total += xi[i] * yj[j] * pa[i + j] / pd[i + j]
    return _finish(total, a, b, c, d, x, y)


def appell_f3(a, b, a2, b2, c, x, y):
    """Appell F3: sum of (a)_r (a2)_r (b)_s (b2)_s x^r y^s / (r! s! (c)_{r+s})."""
    r_bounds = [n for n in (_bound(a, x), _bound(a2, x)) if n is not None]
    s_bounds = [n for n in (_bound(b, y), _bound(b2, y)) if n is not None]
    if not r_bounds or not s_bounds:
        raise NonTerminatingError("appell_f3 needs a nonpositive integer in (a, a2) and in (b, b2)")
    rmax, smax = min(r_bounds), min(s_bounds)
    pa, pa2 = poch_table(a, rmax), poch_table(a2, rmax)
    pb, pb2 = poch_table(b, smax), poch_table(b2, smax)
    pc = poch_table(c, rmax + smax)
    xs, ys = poch_table_pow(x, rmax), poch_table_pow(y, smax)
    one = _one(a, b, a2, b2, c, x, y)
    xr = [one * pa[r] * pa2[r] * xs[r] / math.factorial(r) for r in range(rmax + 1)]
    ys_ = [one * pb[s] * pb2[s] * ys[s] / math.factorial(s) for s in range(smax + 1)]
    total = 0
    for r in range(rmax + 1):
        if xr[r] == 0:
            continue
        for s in range(smax + 1):
            if ys_[s] == 0:
                continue
            _check_den(pc[r + s], r + s, None)
            total += xr[r] * ys_[s] / pc[r + s]
    return _finish(total, a, b, a2, b2, c, x, y)


def f1_iterated(a, a2, b, c, d, lam, mu, nu, rho):
    """Iterated Appell F1 (quadruple sum).

    sum over i, j, k, l of
    (a)_{i+j} (a2)_{k+l} (b)_{i+k} (c)_{j+l} lam^i mu^j nu^k rho^l
    / (i! j! k! l! (d)_{i+j+k+l})
    """
    A = _bound(a, lam, mu)
    A2 = _bound(a2, nu, rho)
    if A is None or A2 is None:
        raise NonTerminatingError("f1_iterated needs a and a2 to be nonpositive integers")
    B = nonpositive_integer(b)
    C = nonpositive_integer(c)
    if _is_zero(lam):
        imax = 0
    else:
        imax = A if B is None else min(A, B)
    if _is_zero(mu):
        jmax = 0
    else:
        jmax = A if C is None else min(A, C)
    if _is_zero(nu):
        kmax = 0
    else:
        kmax = A2 if B is None else min(A2, B)
    if _is_zero(rho):
        lmax = 0
    else:
        lmax = A2 if C is None else min(A2, C)

    pa, pa2 = poch_table(a, A), poch_table(a2, A2)
    pb, pc = poch_table(b, imax + kmax), poch_table(c, jmax + lmax)
    pd = poch_table(d, imax + jmax + kmax + lmax)
    ls, ms = poch_table_pow(lam, imax), poch_table_pow(mu, jmax)
    ns, rs = poch_table_pow(nu, kmax), poch_table_pow(rho, lmax)
    fact = [math.factorial(i) for i in range(max(imax, jmax, kmax, lmax) + 1)]

    one = _one(a, a2, b, c, d, lam, mu, nu, rho)
    lm = [[one * ls[i] * ms[j] / (fact[i] * fact[j]) for j in range(jmax + 1)] for i in range(imax + 1)]
    total = 0
    for k in range(kmax + 1):
        for l in range(min(lmax, A2 - k) + 1):
            wkl = one * pa2[k + l] * ns[k] * rs[l] / (fact[k] * fact[l])
            if wkl == 0:
                continue
            for i in range(imax + 1):
                if B is not None and i + k > B:
                    break
                for j in range(min(jmax, A - i) + 1):
                    if C is not None and j + l > C:
                        break
                    q = pa[i + j] * pb[i + k] * pc[j + l]
                    if q == 0:
                        continue
                    s = i + j + k + l
                    _check_den(pd[s], s, None)
                    total += wkl * lm[i][j] * q / pd[s]
    return _finish(total, a, a2, b, c, d, lam, mu, nu, rho)


def poch_table_pow(x, kmax: int) -> list:
    out = [1]
    for _ in range(kmax):
        out.append(out[-1] * x)
    return out


def _one(*inputs):
    # exact unit keeps int / int from turning into a float
    return Fraction(1) if all(is_exact(v) for v in inputs) else 1.0


def _finish(total, *inputs):
    if all(is_exact(v) for v in inputs):
        return Fraction(total)
    return float(total)
