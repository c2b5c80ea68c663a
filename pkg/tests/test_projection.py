"""Exactness and reconstruction tests for the moment projection matrices."""

from fractions import Fraction

import numpy as np
import pytest

from delaymargin.polynomials import (
    RationalPolynomial,
    poly_weighted,
    rodrigues_poly,
)
from delaymargin.projection import (
    crosscheck_closed_forms,
    derivative_moment_map,
    legendre_derivative_map,
    weighted_moment_map,
)

F = Fraction


def reconstruct(coords, num_terms):
    out = RationalPolynomial.zero()
    for l in range(num_terms):
        out = out + rodrigues_poly(0, l).scale(coords[l])
    return out


def valid_weighted_params(max_m=4, max_nu=4, max_big_m=8):
    for m in range(max_m + 1):
        for nu in range(max_nu + 1):
            for big_m in range(1, max_big_m + 1):
                if m + nu <= big_m - 1:
                    yield m, nu, big_m


def test_identity_at_weight_zero():
    for big_m in (1, 3, 6):
        xi = weighted_moment_map(0, big_m - 1, big_m)
        expected = tuple(
            tuple(F(1) if i == j else F(0) for j in range(big_m))
            for i in range(big_m)
        )
        assert xi.entries == expected


def test_single_row_example():
    xi = weighted_moment_map(1, 0, 2)
    assert xi.entries == ((F(1, 2), F(1, 2)),)


@pytest.mark.parametrize("m,nu,big_m", list(valid_weighted_params()))
def test_weighted_rows_reconstruct_exactly(m, nu, big_m):
    xi = weighted_moment_map(m, nu, big_m)
    for j in range(nu + 1):
        row = xi.entries[j]
        assert reconstruct(row, big_m) == poly_weighted(m, j)
        # zero fill beyond degree m + j
        assert all(row[l] == 0 for l in range(m + j + 1, big_m))


def test_weighted_map_rejects_bad_params():
    with pytest.raises(ValueError):
        weighted_moment_map(2, 3, 5)  # m + nu = 5 > M - 1 = 4
    with pytest.raises(ValueError):
        weighted_moment_map(-1, 0, 3)


def test_derivative_rows_examples():
    z = derivative_moment_map(0, 1, 3)
    assert z.entries[0] == (F(1), F(-1), F(0), F(0), F(0))
    assert z.entries[1] == (F(1), F(1), F(-2), F(0), F(0))
    z1 = derivative_moment_map(1, 0, 2)
    assert z1.entries[0] == (F(1), F(0), F(-1), F(0))


def test_derivative_map_minimal_case():
    z = derivative_moment_map(0, 0, 0)
    assert z.entries == ((F(1), F(-1)),)


@pytest.mark.parametrize(
    "m,nu,big_m",
    [
        (m, nu, big_m)
        for m in range(5)
        for nu in range(5)
        for big_m in range(1, 9)
        if m + nu <= big_m
    ],
)
def test_derivative_rows_reconstruct_exactly(m, nu, big_m):
    z = derivative_moment_map(m, nu, big_m)
    for j in range(nu + 1):
        row = z.entries[j]
        q = poly_weighted(m, j)
        assert row[0] == q.eval(1) == 1
        assert row[1] == -q.eval(0)
        zeta = tuple(-c for c in row[2:])
        assert reconstruct(zeta, big_m) == q.derivative()
        # zero fill at and beyond column m + j
        assert all(zeta[l] == 0 for l in range(m + j, big_m))


def test_derivative_map_rejects_bad_params():
    with pytest.raises(ValueError):
        derivative_moment_map(2, 2, 3)  # m + nu = 4 > M = 3


def test_legendre_derivative_map_examples():
    l1 = legendre_derivative_map(1)
    assert l1.entries == ((F(1), F(-1), F(0)),)
    l2 = legendre_derivative_map(2)
    assert l2.entries == (
        (F(1), F(-1), F(0), F(0)),
        (F(1), F(1), F(-2), F(0)),
    )
    l5 = legendre_derivative_map(5)
    assert [row[1] for row in l5.entries] == [F(-1), F(1), F(-1), F(1), F(-1)]
    assert l5.entries == derivative_moment_map(0, 4, 5).entries


# ---------------------------------------------------------------------------
# Float-level identities tying the maps to weighted moments on [a, b].
# ---------------------------------------------------------------------------


def random_poly_vector(rng, dim, degree):
    return [
        RationalPolynomial.from_coeffs(
            [F(int(rng.integers(-6, 7)), int(rng.integers(1, 4))) for _ in range(degree + 1)]
        )
        for _ in range(dim)
    ]


def legendre_moments(fs, a, b, big_m):
    """phi_l = int_a^b R(0,l)((s-a)/(b-a)) f(s) ds, exactly, as floats."""
    width = b - a
    out = np.empty((big_m, len(fs)))
    for l in range(big_m):
        basis = rodrigues_poly(0, l)
        for i, f in enumerate(fs):
            # substitute s = a + width * x and integrate over [0, 1]
            g = f.compose_affine(a, width)
            out[l, i] = float(width * (basis * g).integral())
    return out


def weighted_moment(f_vec, m, j, a, b):
    width = b - a
    p = rodrigues_poly(m, j)
    vals = []
    for f in f_vec:
        g = f.compose_affine(a, width)
        vals.append(float(width * (p * g).shift_exponents(m).integral()))
    return np.array(vals)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_moment_identity_on_intervals(seed):
    rng = np.random.default_rng(100 + seed)
    m, nu, big_m = [(1, 2, 4), (0, 3, 5), (2, 1, 6)][seed]
    a, b = [(F(-1), F(2)), (F(0), F(1)), (F(1, 2), F(7, 2))][seed]
    fs = random_poly_vector(rng, dim=2, degree=big_m - 1)
    phi = legendre_moments(fs, a, b, big_m)  # (M, n)
    xi = weighted_moment_map(m, nu, big_m).as_array()
    got = xi @ phi  # (nu+1, n)
    for j in range(nu + 1):
        want = weighted_moment(fs, m, j, a, b)
        assert np.allclose(got[j], want, atol=1e-10)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_boundary_identity_for_derivatives(seed):
    rng = np.random.default_rng(200 + seed)
    m, nu, big_m = [(1, 2, 4), (0, 2, 4), (3, 1, 5)][seed]
    a, b = [(F(0), F(2)), (F(-1), F(1)), (F(1), F(3))][seed]
    width = b - a
    fs = random_poly_vector(rng, dim=2, degree=4)
    phi = legendre_moments(fs, a, b, big_m)
    f_b = np.array([float(f.eval(b)) for f in fs])
    f_a = np.array([float(f.eval(a)) for f in fs])
    stacked = np.vstack([f_b, f_a, phi / float(width)])  # (M+2, n)
    z = derivative_moment_map(m, nu, big_m).as_array()
    got = z @ stacked
    dfs = [f.derivative() for f in fs]
    for j in range(nu + 1):
        want = weighted_moment(dfs, m, j, a, b)
        assert np.allclose(got[j], want, atol=1e-10)


# ---------------------------------------------------------------------------
# Closed-form crosscheck diagnostics.
# ---------------------------------------------------------------------------


def test_crosscheck_agrees_after_corrections():
    for m, nu, big_m in [(0, 2, 3), (1, 1, 3), (2, 2, 5), (3, 0, 4)]:
        report = crosscheck_closed_forms(m, nu, big_m)
        assert report.clean, report.lines()
        assert any("coefficient matrix" in s for s in report.agreements)


def test_crosscheck_identity_case():
    report = crosscheck_closed_forms(0, 3, 4)
    assert report.clean
    assert any("weighted moment map" in s for s in report.agreements)
    assert any("boundary column of ones" in s for s in report.agreements)


def test_crosscheck_reports_skip_outside_tight_case():
    report = crosscheck_closed_forms(1, 1, 5)  # m + nu = 2 != M - 1 = 4
    assert any("skipped" in s for s in report.notes)
    assert report.clean
