import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bikraw.chain import (KERNELS, ChainParams, build_state_space, degenerate_fixed_point, detailed_balance_residual,
                          discriminant, eigenvalues_analytic, exact_sqrt, fixed_point_residuals, kernel_closed,
                          quadratic_roots, solve_fixed_points, stationarity_residual, stationary_distribution,
                          u_roots_direct, verify_eigen, verify_spectrum)

from conftest import unit_rationals

HALF_THIRD = ChainParams(1, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4), Fraction(1, 4))


@st.composite
def chain_params(draw, N=st.integers(1, 3), distinct=True):
    a1, a2 = draw(unit_rationals()), draw(unit_rationals())
    if distinct and a1 == a2:
        a2 = a1 / 2
    b1 = draw(unit_rationals())
    b2 = draw(unit_rationals()) * (1 - b1)
    return ChainParams(draw(N), a1, a2, b1, b2)


def per_die_kernel(params: ChainParams) -> dict:
    """Each die moves independently; multiply the per-die laws by enumeration."""
    a1, a2, b1, b2 = params.alpha1, params.alpha2, params.beta1, params.beta2
    blank = {1: b1, 2: b2, 0: 1 - b1 - b2}
    law = {
        1: {f: (a1 if f == 1 else 0) + (1 - a1) * p for f, p in blank.items()},
        2: {f: (a2 if f == 2 else 0) + (1 - a2) * p for f, p in blank.items()},
        0: blank,
    }
    out = {}
    for i1, i2 in build_state_space(params.N).states:
        faces = [1] * i1 + [2] * i2 + [0] * (params.N - i1 - i2)
        col = {}
        for outcome in itertools.product((0, 1, 2), repeat=params.N):
            pr = math.prod((law[f][o] for f, o in zip(faces, outcome)), start=Fraction(1))
            key = (outcome.count(1), outcome.count(2))
            col[key] = col.get(key, 0) + pr
        out[(i1, i2)] = col
    return out


def test_state_space():
    space = build_state_space(5)
    assert len(space) == 21
    assert space.states[:3] == ((0, 0), (0, 1), (0, 2))
    for k, s in enumerate(space.states):
        assert space.index[s] == k


def test_params_validation():
    with pytest.raises(ValueError):
        ChainParams(0, Fraction(1, 2), Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))
    with pytest.raises(ValueError):
        ChainParams(1, Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))
    with pytest.raises(ValueError):
        ChainParams(1, Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))


def test_worked_kernel():
    K = kernel_closed(HALF_THIRD)
    expected = [[Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)],
                [Fraction(1, 4), Fraction(1, 2), Fraction(1, 8)],
                [Fraction(1, 4), Fraction(1, 6), Fraction(5, 8)]]
    assert K.entries.tolist() == expected
    assert K.entry((1, 0), (0, 0)) == Fraction(1, 4)


def test_worked_stationary_constants():
    assert HALF_THIRD.D == Fraction(11, 8)
    assert (HALF_THIRD.eta.eta1, HALF_THIRD.eta.eta2) == (Fraction(4, 11), Fraction(3, 11))
    assert discriminant(HALF_THIRD) == (Fraction(11, 192), Fraction(11, 192))


@given(chain_params())
def test_kernels_match_per_die_enumeration(params):
    oracle = per_die_kernel(params)
    for name, fn in KERNELS.items():
        K = fn(params)
        for (src, col) in oracle.items():
            for dest, v in col.items():
                assert K.entry(dest, src) == v, name


@given(chain_params(N=st.integers(1, 4)))
def test_stochastic_reversible_stationary(params):
    K = kernel_closed(params)
    assert all(s == 1 for s in K.column_sums())
    psi = stationary_distribution(params)
    assert sum(psi) == 1
    assert detailed_balance_residual(K, psi) == 0
    assert stationarity_residual(K, psi) == 0


def test_float_backend_residuals():
    params = ChainParams(4, 0.37, 0.61, 0.2, 0.45)
    K = kernel_closed(params)
    assert K.backend == "float"
    psi = stationary_distribution(params)
    assert max(abs(s - 1) for s in K.column_sums()) < 1e-12
    assert detailed_balance_residual(K, psi) < 1e-12
    assert stationarity_residual(K, psi) < 1e-12


@given(chain_params(N=st.just(1), distinct=False))
def test_discriminant_forms_agree_and_nonnegative(params):
    first, second = discriminant(params)
    assert first == second >= 0


def test_exact_sqrt():
    assert exact_sqrt(Fraction(9, 16)) == Fraction(3, 4)
    assert exact_sqrt(Fraction(2)) is None
    assert exact_sqrt(Fraction(-1)) is None


@given(chain_params(N=st.just(1)))
def test_fixed_point_residuals(params):
    for sol in solve_fixed_points(params):
        res = fixed_point_residuals(params, sol)
        for key in "tuvw":
            if isinstance(res[key], Fraction):
                assert res[key] == 0
            else:
                assert res[key] < 1e-12


def test_fixed_points_exact_when_discriminant_is_square():
    params = ChainParams(1, Fraction(1, 8), Fraction(1, 4), Fraction(1, 4), Fraction(3, 8))
    first, _ = discriminant(params)
    assert first == Fraction(1, 64)
    plus, minus = solve_fixed_points(params)
    assert isinstance(plus.t, Fraction)
    assert all(v == 0 for k, v in fixed_point_residuals(params, plus).items() if k in "tuvw")
    assert (plus.t, plus.u) == (minus.v, minus.w)


def test_beta1_variant_of_u_relation_fails():
    params = ChainParams(1, Fraction(1, 8), Fraction(1, 4), Fraction(1, 4), Fraction(3, 8))
    res = fixed_point_residuals(params, solve_fixed_points(params)[0])
    assert res["u"] == 0 and res["u_beta1_variant"] != 0


@given(chain_params(N=st.just(1)))
def test_u_roots_cross_check(params):
    plus, minus = solve_fixed_points(params)
    direct = sorted(float(v) for v in u_roots_direct(params))
    assert np.allclose(sorted([float(plus.u), float(minus.u)]), direct, rtol=1e-9, atol=1e-12)
    q = quadratic_roots(params)
    assert np.isclose(float(q[0]) + float(params.alpha1), float(plus.t), rtol=1e-12)


def test_degenerate_fixed_point():
    params = ChainParams(2, Fraction(1, 2), Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))
    assert degenerate_fixed_point(params) == Fraction(3, 2)
    sol = solve_fixed_points(params)[0]
    assert sol.degenerate and (sol.t, sol.u, sol.v, sol.w) == (Fraction(3, 2),) * 4
    assert all(v == 0 for k, v in fixed_point_residuals(params, sol).items() if k in "tuvw")


def test_analytic_families_contain_unit_eigenvalue():
    for fam in eigenvalues_analytic(ChainParams(3, 0.4, 0.7, 0.2, 0.3)).values():
        assert fam[(0, 0)] == 1 and len(fam) == 10


@pytest.mark.parametrize("params, verdict", [
    (ChainParams(3, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4), Fraction(1, 4)), "mixed_roots"),
    (ChainParams(3, 0.8, 0.3, 0.1, 0.5), "mixed_roots"),
    (ChainParams(3, Fraction(1, 2), Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)), "mixed_roots_limit"),
])
def test_spectrum_verdict(params, verdict):
    rep = verify_spectrum(params)
    assert rep["verdict"] == verdict
    assert rep["symmetrization_defect"] < 1e-12


@pytest.mark.parametrize("params", [ChainParams(3, 0.4, 0.7, 0.2, 0.3), ChainParams(4, 0.9, 0.15, 0.3, 0.6)])
def test_polynomials_are_transpose_eigenvectors(params):
    for sol in solve_fixed_points(params):
        for m in range(params.N + 1):
            for n in range(params.N + 1 - m):
                rep = verify_eigen(params, sol, m, n)
                assert rep["best"] in ("transpose", "weighted")
                assert rep["orientations"]["transpose"]["residual_at_analytic"] < 1e-10
                assert rep["orientations"]["weighted"]["residual_at_analytic"] < 1e-10


def test_literal_forward_orientation_fails():
    params = ChainParams(3, 0.4, 0.7, 0.2, 0.3)
    rep = verify_eigen(params, solve_fixed_points(params)[0], 1, 1)
    assert rep["orientations"]["forward"]["residual"] > 1e-3


def test_degenerate_polynomials_depend_on_total_degree_only():
    params = ChainParams(3, 0.5, 0.5, 0.3, 0.2)
    sol = solve_fixed_points(params)[0]
    low = 0.5 * (1 - 0.3 - 0.2)
    for m in range(params.N + 1):
        for n in range(params.N + 1 - m):
            rep = verify_eigen(params, sol, m, n)["orientations"]["transpose"]
            # an eigenvector, but for (alpha (1 - beta1 - beta2))^(m+n), not alpha^m (...)^n
            assert rep["residual"] < 1e-12
            assert abs(rep["lambda"] - low ** (m + n)) < 1e-12
