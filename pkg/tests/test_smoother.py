import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pmglfa.smoother import (
    Chebyshev,
    Jacobi,
    chebyshev_coefficients,
    chebyshev_error_symbol,
    chebyshev_scalars_upto,
    estimate_lambda_max,
    jacobi_error_symbol,
    preconditioned_symbol,
    smoother_error_symbol,
    smoother_spectrum_sweep,
)
from pmglfa.symbol import localization, operator_symbol
from pmglfa.weakform import assemble_element, laplacian_weakform


def laplacian_symbol(p, d=1):
    return operator_symbol(assemble_element(laplacian_weakform(d), p), localization(p, d))


def random_thetas(d, count=100, seed=0):
    return np.random.default_rng(seed).uniform(-np.pi / 2, 3 * np.pi / 2, (count, d))


def test_spec_validation():
    with pytest.raises(ValueError):
        Jacobi(-0.1)
    with pytest.raises(ValueError):
        Chebyshev(2, lower=0.5, upper=0.4)
    with pytest.raises(ValueError):
        chebyshev_coefficients(0, 0.1, 1.0)
    with pytest.raises(ValueError):
        chebyshev_coefficients(2, 1.0, 1.0)


def test_linear_preconditioned_symbol_and_lambda_max():
    sym = laplacian_symbol(1)
    t = np.linspace(-1, 4, 50)[:, None]
    np.testing.assert_allclose(preconditioned_symbol(sym, t)[:, 0, 0], 1 - np.cos(t[:, 0]), atol=1e-14)
    assert abs(estimate_lambda_max(sym) - 2.0) < 1e-14


@pytest.mark.parametrize("p", [2, 4, 8])
def test_lambda_max_sample_matches_dense_scan(p):
    sym = laplacian_symbol(p)
    dense = estimate_lambda_max(sym, np.linspace(-np.pi / 2, 3 * np.pi / 2, 1001)[:, None])
    assert abs(estimate_lambda_max(sym) - dense) <= 0.01 * dense


def test_jacobi_closed_form():
    sym = laplacian_symbol(1)
    assert abs(jacobi_error_symbol(sym, 2 / 3, 1, np.array([np.pi]))[0, 0] + 1 / 3) < 1e-14
    eye = jacobi_error_symbol(laplacian_symbol(3), 0.0, 2, random_thetas(1, 5))
    np.testing.assert_allclose(eye, np.broadcast_to(np.eye(3), eye.shape), atol=1e-15)


def test_jacobi_stable_iff_weight_at_most_one():
    t = np.linspace(-np.pi / 2, 3 * np.pi / 2, 1001)[:, None]
    sym = laplacian_symbol(1)
    for omega in (0.25, 0.5, 1.0):
        assert np.max(np.abs(jacobi_error_symbol(sym, omega, 1, t))) <= 1 + 1e-14
    assert np.max(np.abs(jacobi_error_symbol(sym, 1.01, 1, t))) > 1


@pytest.mark.parametrize("nu", [2, 3])
def test_power_law(nu):
    sym = laplacian_symbol(3, 2)
    thetas = random_thetas(2)
    one = jacobi_error_symbol(sym, 0.7, 1, thetas)
    assert np.abs(jacobi_error_symbol(sym, 0.7, nu, thetas) - np.linalg.matrix_power(one, nu)).max() <= 1e-12
    one = chebyshev_error_symbol(sym, 3, 1, 0.2, 2.0, thetas)
    many = chebyshev_error_symbol(sym, 3, nu, 0.2, 2.0, thetas)
    assert np.abs(many - np.linalg.matrix_power(one, nu)).max() <= 1e-12


@pytest.mark.parametrize("p,d", [(2, 1), (4, 1), (2, 2)])
def test_first_order_chebyshev_is_jacobi(p, d):
    sym = laplacian_symbol(p, d)
    lam = estimate_lambda_max(sym)
    coeffs = chebyshev_coefficients(1, 0.1 * lam, lam)
    thetas = random_thetas(d)
    cheb = chebyshev_error_symbol(sym, 1, 1, 0.1 * lam, lam, thetas)
    jac = jacobi_error_symbol(sym, 1 / coeffs.alpha, 1, thetas)
    assert np.abs(cheb - jac).max() <= 1e-12


def test_order_zero_is_identity():
    sym = laplacian_symbol(2)
    e = chebyshev_error_symbol(sym, 0, 1, 0.1, 1.0, random_thetas(1, 3))
    np.testing.assert_array_equal(e, np.broadcast_to(np.eye(2), e.shape))


def test_second_order_scalar_by_hand():
    # p=1: the preconditioned symbol at theta=pi is 2, interval [0.2, 2]
    sym = laplacian_symbol(1)
    alpha, c = 1.1, 0.9
    beta0 = -c * c / (2 * alpha)
    gamma1 = -(alpha + beta0)
    lam = 2.0
    e1 = 1 - lam / alpha
    e2 = (lam * e1 - alpha * e1 - beta0 * 1.0) / gamma1
    got = chebyshev_error_symbol(sym, 2, 1, 0.2, 2.0, np.array([np.pi]))[0, 0]
    assert abs(got - e2) < 1e-14


@given(st.integers(1, 8), st.floats(0.01, 0.9), st.floats(0.0, 1.0))
def test_recurrence_matches_scaled_chebyshev_polynomial(k, lower, x):
    lmin, lmax = lower * 2.0, 2.0
    lam = np.array([lmin + x * (lmax - lmin)])
    coeffs = chebyshev_coefficients(k, lmin, lmax)
    *_, got = chebyshev_scalars_upto(lam, coeffs, k)
    alpha, c = coeffs.alpha, coeffs.c
    cheb = np.polynomial.chebyshev.Chebyshev.basis(k)
    expected = cheb((alpha - lam) / c) / cheb(alpha / c)
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_smoother_error_symbol_dispatch():
    sym = laplacian_symbol(2)
    thetas = random_thetas(1, 4)
    np.testing.assert_allclose(smoother_error_symbol(sym, Jacobi(0.6, 2), thetas),
                               jacobi_error_symbol(sym, 0.6, 2, thetas))
    lam = estimate_lambda_max(sym)
    np.testing.assert_allclose(smoother_error_symbol(sym, Chebyshev(3), thetas),
                               chebyshev_error_symbol(sym, 3, 1, 0.1 * lam, lam, thetas))


def test_spectrum_sweep_linear_curve_and_count():
    t = np.linspace(-np.pi / 2, 3 * np.pi / 2, 32, endpoint=False)[:, None]
    eig = smoother_spectrum_sweep(laplacian_symbol(1), Jacobi(1.0), t)
    np.testing.assert_allclose(eig[:, 0], 1 - np.cos(t[:, 0]), atol=1e-14)
    eig = smoother_spectrum_sweep(laplacian_symbol(3, 2), Chebyshev(2), np.zeros((5, 2)) + 0.3)
    assert eig.shape == (5, 9)
    assert np.all(np.diff(eig.real, axis=1) >= 0)
