"""The bivariate cumulative Bernoulli trial chain.

A round starts from a score (i1, i2) of N dice. Each of the i1 dice showing
the first success face is re-thrown and kept with probability alpha1, and
likewise for i2 with alpha2. All remaining dice are then thrown together and
land on the first face with probability beta1, the second with beta2.

Orientation convention, used by every module in this package: kernel
matrices are column-stochastic, ``entry[r][c] = K(state_r <- state_c)``.
The polynomial P_{m,n} evaluated on the states is a left eigenvector, i.e.
``sum_j K(j <- i) P(j) = lambda P(i)``; equivalently ``Psi_00 * P`` is a
right eigenvector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .poly import EtaPair, TUVWParams, poly_P
from .series import appell_f3, is_exact

ORIENTATION = "column-stochastic: entry[r][c] = K(state_r <- state_c)"
SPECTRUM_TOL = 1e-9


@dataclass(frozen=True)
class ChainParams:
    N: int
    alpha1: object
    alpha2: object
    beta1: object
    beta2: object

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        for name in ("alpha1", "alpha2", "beta1", "beta2"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not self.beta1 + self.beta2 < 1:
            raise ValueError(f"beta1 + beta2 must be < 1, got {self.beta1 + self.beta2}")

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in (self.alpha1, self.alpha2, self.beta1, self.beta2))

    @property
    def degenerate(self) -> bool:
        return self.alpha1 == self.alpha2

    @property
    def D(self):
        a1, a2, b1, b2 = self.alpha1, self.alpha2, self.beta1, self.beta2
        return 1 + a1 * b1 / (1 - a1) + a2 * b2 / (1 - a2)

    @property
    def eta(self) -> EtaPair:
        D = self.D
        return EtaPair(self.beta1 / ((1 - self.alpha1) * D), self.beta2 / ((1 - self.alpha2) * D))


@dataclass(frozen=True)
class StateSpace:
    N: int
    states: tuple
    index: dict = field(compare=False, repr=False)

    def __len__(self):
        return len(self.states)


def build_state_space(N: int) -> StateSpace:
    """All (i1, i2) with i1 + i2 <= N, lexicographic in (i1, i2)."""
    states = tuple((i, j) for i in range(N + 1) for j in range(N + 1 - i))
    return StateSpace(N, states, {s: k for k, s in enumerate(states)})


@dataclass(frozen=True)
class KernelMatrix:
    space: StateSpace
    entries: np.ndarray  # object dtype for the exact backend
    backend: str
    evaluator: str

    def column_sums(self):
        return [sum(self.entries[:, c]) for c in range(len(self.space))]

    def as_float(self) -> np.ndarray:
        return self.entries.astype(float)

    def entry(self, dest, src):
        return self.entries[self.space.index[tuple(dest)], self.space.index[tuple(src)]]


def binomial_pmf(k: int, M: int, alpha):
    if not 0 <= k <= M:
        raise ValueError(f"need 0 <= k <= M, got k={k}, M={M}")
    return math.comb(M, k) * alpha ** k * (1 - alpha) ** (M - k)


def trinomial(i1: int, i2: int, M: int, p, q):
    """M!/(i1! i2! (M-i1-i2)!) p^i1 q^i2 (1-p-q)^(M-i1-i2)."""
    if min(i1, i2) < 0 or i1 + i2 > M:
        return 0
    c = math.factorial(M) // (math.factorial(i1) * math.factorial(i2) * math.factorial(M - i1 - i2))
    return c * p ** i1 * q ** i2 * (1 - p - q) ** (M - i1 - i2)


def _assemble(params: ChainParams, entry, evaluator: str) -> KernelMatrix:
    space = build_state_space(params.N)
    n = len(space)
    exact = params.exact
    K = np.empty((n, n), dtype=object if exact else float)
    for c, src in enumerate(space.states):
        for r, dest in enumerate(space.states):
            K[r, c] = entry(dest, src)
    return KernelMatrix(space, K, "exact" if exact else "float", evaluator)


def _unit(params: ChainParams):
    return Fraction(1) if params.exact else 1.0


def _binomial_table(M: int, alpha, one):
    return [[one * binomial_pmf(k, i, alpha) for k in range(i + 1)] for i in range(M + 1)]


def kernel_convolution(params: ChainParams) -> KernelMatrix:
    """Sum over the kept counts (k1, k2) of binomial keeps times a trinomial rethrow."""
    N, a1, a2, b1, b2 = params.N, params.alpha1, params.alpha2, params.beta1, params.beta2
    one = _unit(params)
    keep1, keep2 = _binomial_table(N, a1, one), _binomial_table(N, a2, one)
    rethrow = {(M, p1, p2): one * trinomial(p1, p2, M, b1, b2)
               for M in range(N + 1) for p1 in range(M + 1) for p2 in range(M + 1 - p1)}

    def entry(dest, src):
        (j1, j2), (i1, i2) = dest, src
        total = 0 * one
        for k1 in range(min(i1, j1) + 1):
            for k2 in range(min(i2, j2) + 1):
                total += keep1[i1][k1] * keep2[i2][k2] * rethrow[(N - k1 - k2, j1 - k1, j2 - k2)]
        return total

    return _assemble(params, entry, "convolution")


def kernel_closed(params: ChainParams) -> KernelMatrix:
    """Closed form with the factorials pulled out of the double sum."""
    N, a1, a2, b1, b2 = params.N, params.alpha1, params.alpha2, params.beta1, params.beta2
    f = math.factorial
    one = _unit(params)
    r1, r2 = a1 / ((1 - a1) * b1), a2 / ((1 - a2) * b2)
    p1 = [one * r1 ** k for k in range(N + 1)]
    p2 = [one * r2 ** k for k in range(N + 1)]

    def entry(dest, src):
        (j1, j2), (i1, i2) = dest, src
        pre = (one * f(i1) * f(i2) * b1 ** j1 * b2 ** j2 * (1 - b1 - b2) ** (N - j1 - j2)
               * (1 - a1) ** i1 * (1 - a2) ** i2 / f(N - j1 - j2))
        s = 0
        for k1 in range(min(i1, j1) + 1):
            for k2 in range(min(i2, j2) + 1):
                s += p1[k1] * p2[k2] * f(N - k1 - k2) / (
                    f(i1 - k1) * f(i2 - k2) * f(j1 - k1) * f(j2 - k2) * f(k1) * f(k2))
        return pre * s

    return _assemble(params, entry, "closed")


def kernel_f3(params: ChainParams) -> KernelMatrix:
    """Trinomial factor times an Appell F3 in the destination and source counts."""
    N, a1, a2, b1, b2 = params.N, params.alpha1, params.alpha2, params.beta1, params.beta2
    X, Y = a1 / (b1 * (a1 - 1)), a2 / (b2 * (a2 - 1))

    def entry(dest, src):
        (j1, j2), (i1, i2) = dest, src
        return (trinomial(j1, j2, N, b1, b2) * (1 - a1) ** i1 * (1 - a2) ** i2
                * appell_f3(-j1, -j2, -i1, -i2, -N, X, Y))

    return _assemble(params, entry, "f3")


KERNELS = {"conv": kernel_convolution, "closed": kernel_closed, "f3": kernel_f3}


def stationary_distribution(params: ChainParams) -> list:
    """Trinomial law over the states with parameters eta; eigenvalue 1 of the kernel."""
    eta = params.eta
    return [trinomial(i1, i2, params.N, eta.eta1, eta.eta2) for i1, i2 in build_state_space(params.N).states]


def detailed_balance_residual(K: KernelMatrix, psi: Sequence):
    """max over pairs of |psi(j) K(i <- j) - psi(i) K(j <- i)|."""
    A = K.entries
    n = len(psi)
    return max((abs(psi[c] * A[r, c] - psi[r] * A[c, r]) for r in range(n) for c in range(n)), default=0)


def stationarity_residual(K: KernelMatrix, psi: Sequence):
    A = K.entries
    n = len(psi)
    return max(abs(sum(A[r, c] * psi[c] for c in range(n)) - psi[r]) for r in range(n))


# ---------------------------------------------------------------------------
# fixed points


@dataclass(frozen=True)
class FixedPointSolution:
    t: object
    u: object
    v: object
    w: object
    branch: str  # sign of the square root assigned to (t, u): "plus", "minus" or "degenerate"
    degenerate: bool
    discriminant: object

    def tuvw(self) -> TUVWParams:
        return TUVWParams(self.t, self.u, self.v, self.w)


def discriminant(params: ChainParams):
    """Both expressions for the discriminant of the quadratic in t - alpha1.

    The second is a sum of squares and hence nonnegative.
    """
    a1, a2, b1, b2 = params.alpha1, params.alpha2, params.beta1, params.beta2
    first = (a1 - a2 + a1 * b1 + a2 * b2) ** 2 - 4 * a1 * b1 * (a1 - a2)
    second = (a1 - a2 + a2 * b2 - a1 * b1) ** 2 + 4 * a1 * a2 * b1 * b2
    return first, second


def exact_sqrt(q: Fraction):
    """Fraction square root when q is a rational square, else None."""
    q = Fraction(q)
    if q < 0:
        return None
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


SQRT_DIGITS = 60


def _sqrt(x):
    if is_exact(x):
        r = exact_sqrt(x)
        if r is not None:
            return r
    return math.sqrt(float(x))


def _sqrt_rational(q: Fraction) -> tuple[Fraction, bool]:
    """(sqrt(q), True) for rational squares, else a rational approximation to
    :data:`SQRT_DIGITS` digits and False."""
    r = exact_sqrt(q)
    if r is not None:
        return r, True
    scale = 10 ** SQRT_DIGITS
    return Fraction(math.isqrt(q.numerator * q.denominator * scale * scale), q.denominator * scale), False


def _rationals(params: ChainParams):
    return tuple(Fraction(v) for v in (params.alpha1, params.alpha2, params.beta1, params.beta2))


def _partner(t, a1, b1, b2):
    """Second coordinate of a fixed point from the first: beta2 u = -beta1 t + t(1-alpha1)/(t-alpha1)."""
    if t == a1:
        raise ZeroDivisionError("fixed point coincides with alpha1")
    return (-b1 * t + t * (1 - a1) / (t - a1)) / b2


def _quadratic_roots(params: ChainParams):
    a1, a2, b1, b2 = _rationals(params)
    delta = (a1 - a2 + a1 * b1 + a2 * b2) ** 2 - 4 * a1 * b1 * (a1 - a2)
    sq, exact = _sqrt_rational(delta)
    B = a1 - a2 + a1 * b1 + a2 * b2
    scale = (1 - a1) / (2 * (a1 - a2) * b1)
    return (B + sq) * scale, (B - sq) * scale, exact and params.exact


def quadratic_roots(params: ChainParams):
    """Roots (plus, minus) for t - alpha1 of the quadratic fixed-point relation.

    Exact Fractions when the discriminant is a rational square and the
    parameters are exact; otherwise computed with a high-precision rational
    square root and rounded to float at the end.
    """
    plus, minus, exact = _quadratic_roots(params)
    return (plus, minus) if exact else (float(plus), float(minus))


def u_roots_direct(params: ChainParams):
    """Both roots for u from the u-centred form of the quadratic (cross-check)."""
    a1, a2, b1, b2 = _rationals(params)
    delta = (a1 - a2 + a1 * b1 + a2 * b2) ** 2 - 4 * a1 * b1 * (a1 - a2)
    sq, exact = _sqrt_rational(delta)
    scale = (1 - a2) / (2 * b2 * (a2 - a1))
    B = a2 - a1 + a1 * b1 + a2 * b2
    roots = (a2 + (B + sq) * scale, a2 + (B - sq) * scale)
    return roots if exact and params.exact else tuple(float(r) for r in roots)


def degenerate_fixed_point(params: ChainParams):
    a, b1, b2 = params.alpha1, params.beta1, params.beta2
    return (1 - a * (1 - b1 - b2)) / (b1 + b2)


def solve_fixed_points(params: ChainParams) -> tuple[FixedPointSolution, FixedPointSolution]:
    """Both assignments of the two quadratic roots to (t, u) and (v, w)."""
    delta, _ = discriminant(params)
    if params.degenerate:
        T = degenerate_fixed_point(params)
        sol = FixedPointSolution(T, T, T, T, "degenerate", True, delta)
        return sol, sol
    a1, _, b1, b2 = _rationals(params)
    plus, minus, exact = _quadratic_roots(params)
    tp, tm = a1 + plus, a1 + minus
    vals = [tp, _partner(tp, a1, b1, b2), tm, _partner(tm, a1, b1, b2)]
    if not exact:
        vals = [float(v) for v in vals]
    tp, up, tm, um = vals
    return (FixedPointSolution(tp, up, tm, um, "plus", False, delta),
            FixedPointSolution(tm, um, tp, up, "minus", False, delta))


def fixed_point_residuals(params: ChainParams, sol: FixedPointSolution) -> dict:
    """Normalized residuals of the four fixed-point relations.

    Each relation ``z = a (z (1 - b) - b' z') / (1 - b1 p - b2 q)`` is cleared
    of its denominator and the residual is divided by the sum of absolute
    values of the monomials, a componentwise backward error. The ratio form is
    ill-conditioned whenever the denominator is near zero, which happens for
    roots close to 1. Evaluated in exact arithmetic at the returned (possibly
    rounded) solution; exact solutions give Fraction residuals.

    ``u_beta1_variant`` is the u relation with (1 - beta1) in place of
    (1 - beta2); it is reported for comparison and is not expected to vanish.
    """
    a1, a2, b1, b2 = _rationals(params)
    t, u, v, w = (Fraction(x) for x in (sol.t, sol.u, sol.v, sol.w))

    def rel(z, p, q, a, c_self, c_other, other):
        # z (1 - b1 p - b2 q) - a (c_self z - c_other other)
        terms = [z, -z * b1 * p, -z * b2 * q, -a * c_self * z, a * c_other * other]
        scale = sum(abs(x) for x in terms)
        return abs(sum(terms)) / scale if scale else Fraction(0)

    out = {
        "t": rel(t, t, u, a1, 1 - b1, b2, u),
        "u": rel(u, t, u, a2, 1 - b2, b1, t),
        "v": rel(v, v, w, a1, 1 - b1, b2, w),
        "w": rel(w, v, w, a2, 1 - b2, b1, v),
        "u_beta1_variant": rel(u, t, u, a2, 1 - b1, b1, t),
    }
    if not all(is_exact(x) for x in (sol.t, sol.u, sol.v, sol.w)):
        out = {k: float(r) for k, r in out.items()}
    return out


def root_factors(params: ChainParams, sol: FixedPointSolution):
    """(1 - beta1 t - beta2 u, 1 - beta1 v - beta2 w)."""
    b1, b2 = params.beta1, params.beta2
    return 1 - b1 * sol.t - b2 * sol.u, 1 - b1 * sol.v - b2 * sol.w


# ---------------------------------------------------------------------------
# eigenvalues


def _family(N, fn):
    return {(m, n): fn(m, n) for m in range(N + 1) for n in range(N + 1 - m)}


def eigenvalues_analytic(params: ChainParams, sols=None) -> dict:
    """Candidate closed forms for the eigenvalues, keyed by family name.

    Nondegenerate families:

    * ``mixed_roots``: x1^m x2^n with x1, x2 the factors 1 - beta1 t - beta2 u
      and 1 - beta1 v - beta2 w of the two roots (t, u) and (v, w).
    * ``plus_root_only`` / ``minus_root_only``: one factor to the power m+n.
    * ``symmetric_closed_form``: ((alpha1(1-beta1) + alpha2(1-beta2) + sqrt(Delta)) / 2)^(m+n).

    Degenerate families (alpha1 == alpha2 == alpha, common fixed point T):

    * ``alpha_power``: alpha^(m+n).
    * ``common_fixed_point``: (1 - (beta1 + beta2) T)^(m+n).
    * ``mixed_roots_limit``: alpha^m (alpha (1 - beta1 - beta2))^n, the limit
      of ``mixed_roots`` as alpha2 -> alpha1 (one root escapes to infinity and
      its factor alpha1 (1 - t) / (alpha1 - t) tends to alpha).
    """
    N = params.N
    a1, a2, b1, b2 = params.alpha1, params.alpha2, params.beta1, params.beta2
    sols = sols or solve_fixed_points(params)
    delta, _ = discriminant(params)
    if params.degenerate:
        a = a1
        T = sols[0].t
        c = 1 - (b1 + b2) * T
        low = a * (1 - b1 - b2)
        return {
            "alpha_power": _family(N, lambda m, n: a ** (m + n)),
            "common_fixed_point": _family(N, lambda m, n: c ** (m + n)),
            "mixed_roots_limit": _family(N, lambda m, n: a ** m * low ** n),
        }
    x1, x2 = root_factors(params, sols[0])
    closed = (a1 * (1 - b1) + a2 * (1 - b2) + _sqrt(delta)) / 2
    return {
        "mixed_roots": _family(N, lambda m, n: x1 ** m * x2 ** n),
        "plus_root_only": _family(N, lambda m, n: x1 ** (m + n)),
        "minus_root_only": _family(N, lambda m, n: x2 ** (m + n)),
        "symmetric_closed_form": _family(N, lambda m, n: closed ** (m + n)),
    }


def symmetrized_kernel(params: ChainParams) -> np.ndarray:
    """diag(psi)^(-1/2) K diag(psi)^(1/2), symmetric by detailed balance."""
    K = kernel_closed(params).as_float()
    s = np.sqrt(np.array([float(p) for p in stationary_distribution(params)]))
    S = K * s[None, :] / s[:, None]
    return S


def verify_spectrum(params: ChainParams, tol: float = SPECTRUM_TOL) -> dict:
    """Dense eigenvalues of the symmetrized kernel matched against each analytic family."""
    S = symmetrized_kernel(params)
    asym = float(np.abs(S - S.T).max())
    numeric = np.sort(np.linalg.eigvalsh((S + S.T) / 2))
    sols = solve_fixed_points(params)
    families = eigenvalues_analytic(params, sols)
    deviations = {}
    for name, fam in families.items():
        cand = np.sort(np.array([float(v) for v in fam.values()]))
        deviations[name] = float(np.abs(cand - numeric).max())
    matches = sorted(name for name, dev in deviations.items() if dev < tol)
    verdict = matches[0] if len(matches) == 1 else ("ambiguous" if matches else "none")
    mult: dict[str, int] = {}
    for v in numeric:
        key = f"{v:.12g}"
        mult[key] = mult.get(key, 0) + 1
    return {
        "N": params.N,
        "numeric": [float(v) for v in numeric],
        "symmetrization_defect": asym,
        "deviations": deviations,
        "matches": matches,
        "verdict": verdict,
        "branch": sols[0].branch,
        "multiplicities": mult,
    }


# ---------------------------------------------------------------------------
# eigenvectors


def eigenvector_samples(params: ChainParams, sol: FixedPointSolution, m: int, n: int) -> np.ndarray:
    space = build_state_space(params.N)
    tuvw = TUVWParams(*(float(v) for v in (sol.t, sol.u, sol.v, sol.w)))
    return np.array([float(poly_P(m, n, i1, i2, params.N, tuvw)) for i1, i2 in space.states])


def verify_eigen(params: ChainParams, sol: FixedPointSolution, m: int, n: int) -> dict:
    """Apply the kernel to P_{m,n} in three orientations and report residuals.

    ``transpose``: sum_j K(j <- i) phi(j); ``forward``: sum_j K(i <- j) phi(j);
    ``weighted``: the forward kernel applied to psi * phi, compared with
    psi * phi. For each, the Rayleigh quotient lambda and the relative
    sup-norm residual are reported, together with the residual at the
    analytic ``mixed_roots`` eigenvalue of this branch assignment.
    """
    K = kernel_closed(params).as_float()
    phi = eigenvector_samples(params, sol, m, n)
    psi = np.array([float(p) for p in stationary_distribution(params)])
    if params.degenerate:
        a = float(params.alpha1)
        analytic = a ** m * (a * (1 - float(params.beta1) - float(params.beta2))) ** n
    else:
        x1, x2 = root_factors(params, sol)
        analytic = float(x1) ** m * float(x2) ** n
    out = {"m": m, "n": n, "analytic_lambda": analytic, "orientations": {}}
    for name, A, vec in (("transpose", K.T, phi), ("forward", K, phi), ("weighted", K, psi * phi)):
        Av = A @ vec
        norm = float(np.abs(vec).max())
        lam = float(vec @ Av / (vec @ vec))
        out["orientations"][name] = {
            "lambda": lam,
            "residual": float(np.abs(Av - lam * vec).max()) / norm,
            "residual_at_analytic": float(np.abs(Av - analytic * vec).max()) / norm,
        }
    out["best"] = min(out["orientations"], key=lambda k: out["orientations"][k]["residual_at_analytic"])
    return out
