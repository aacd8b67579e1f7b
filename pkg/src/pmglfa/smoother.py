"""Error-propagation symbols of Jacobi and Chebyshev smoothers."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Union

import numpy as np

from .symbol import OperatorSymbol, diagonal_symbol

# frequencies used for the maximal eigenvalue estimate, per dimension
LAMBDA_SAMPLES_1D = (-np.pi / 2, 0.0, np.pi / 2, np.pi)
# bytes of complex workspace allowed per batch of frequencies
BATCH_BYTES = 64 * 2**20


@dataclass(frozen=True)
class Jacobi:
    """Weighted point Jacobi, ``passes`` sweeps per smoothing step."""

    omega: float
    passes: int = 1

    def __post_init__(self):
        if self.omega < 0:
            raise ValueError(f"Jacobi weight must be non-negative, got {self.omega}")
        if self.passes < 0:
            raise ValueError(f"passes must be >= 0, got {self.passes}")


@dataclass(frozen=True)
class Chebyshev:
    """Chebyshev semi-iteration of order ``order`` on the Jacobi-preconditioned operator.

    The target interval is ``[lower * lam, upper * lam]`` where ``lam`` is
    ``lambda_max`` if given, otherwise the sampled estimate.
    """

    order: int
    passes: int = 1
    lower: float = 0.1
    upper: float = 1.0
    lambda_max: float | None = None

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"Chebyshev order must be >= 0, got {self.order}")
        if self.passes < 0:
            raise ValueError(f"passes must be >= 0, got {self.passes}")
        if not 0.0 <= self.lower < self.upper:
            raise ValueError(f"need 0 <= lower < upper, got {self.lower}, {self.upper}")


SmootherSpec = Union[Jacobi, Chebyshev]


@dataclass(frozen=True)
class ChebyshevCoefficients:
    alpha: float
    c: float
    beta: tuple[float, ...]
    gamma: tuple[float, ...]


def chebyshev_coefficients(k: int, lambda_min: float, lambda_max: float) -> ChebyshevCoefficients:
    """Recurrence coefficients for a degree-``k`` Chebyshev polynomial on the interval."""
    if k < 1:
        raise ValueError(f"Chebyshev order must be >= 1, got {k}")
    if not 0.0 <= lambda_min < lambda_max:
        raise ValueError(f"empty or invalid interval [{lambda_min}, {lambda_max}]")
    alpha = 0.5 * (lambda_max + lambda_min)
    c = 0.5 * (lambda_max - lambda_min)
    gamma = [-alpha]
    beta = [-(c * c) / (2.0 * alpha)]
    for _ in range(1, k):
        g = -(alpha + beta[-1])
        gamma.append(g)
        beta.append((c / 2.0) ** 2 / g)
    return ChebyshevCoefficients(alpha, c, tuple(beta[: max(k - 1, 0)]), tuple(gamma))


def spectral_radius(mats: np.ndarray) -> np.ndarray:
    """Spectral radius of each matrix in a stack."""
    return np.max(np.abs(np.linalg.eigvals(mats)), axis=-1)


def preconditioned_symbol(sym: OperatorSymbol, thetas, diag=None) -> np.ndarray:
    """``(Q^T diag(A_e) Q)^{-1} A(theta)`` for a batch of frequencies."""
    if diag is None:
        diag = diagonal_symbol(sym.operator, sym.loc)
    inv = 1.0 / np.diag(diag)
    return inv[:, None] * sym(thetas)


def sample_thetas(dim: int, values=LAMBDA_SAMPLES_1D) -> np.ndarray:
    return np.array(list(itertools.product(values, repeat=dim)), dtype=float)


def estimate_lambda_max(sym: OperatorSymbol, samples=None) -> float:
    """Largest spectral radius of the Jacobi-preconditioned symbol over a few frequencies."""
    if samples is None:
        samples = sample_thetas(sym.dim)
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    diag = diagonal_symbol(sym.operator, sym.loc)
    rows = sym.operator.size
    batch = max(1, BATCH_BYTES // (16 * 4 * rows * rows))
    return max(
        float(np.max(spectral_radius(preconditioned_symbol(sym, samples[i:i + batch], diag))))
        for i in range(0, len(samples), batch)
    )


def _matrix_power(mats: np.ndarray, nu: int) -> np.ndarray:
    return np.linalg.matrix_power(mats, nu)


def jacobi_error(precond: np.ndarray, omega: float, nu: int) -> np.ndarray:
    """``(I - omega * precond)^nu`` for a stack of preconditioned symbols."""
    eye = np.eye(precond.shape[-1])
    return _matrix_power(eye - omega * precond, nu)


def chebyshev_error(precond: np.ndarray, coeffs: ChebyshevCoefficients, k: int) -> np.ndarray:
    """Degree-``k`` Chebyshev error polynomial applied to a stack of preconditioned symbols."""
    eye = np.broadcast_to(np.eye(precond.shape[-1], dtype=precond.dtype), precond.shape)
    if k == 0:
        return eye.copy()
    alpha = coeffs.alpha
    prev, cur = eye, eye - precond / alpha
    for j in range(2, k + 1):
        nxt = (precond @ cur - alpha * cur - coeffs.beta[j - 2] * prev) / coeffs.gamma[j - 1]
        prev, cur = cur, nxt
    return cur


def chebyshev_errors_upto(precond: np.ndarray, coeffs: ChebyshevCoefficients, kmax: int):
    """Yield ``E_1 .. E_kmax`` from one pass of the recurrence."""
    eye = np.broadcast_to(np.eye(precond.shape[-1], dtype=precond.dtype), precond.shape)
    prev, cur = eye, eye - precond / coeffs.alpha
    yield cur
    for j in range(2, kmax + 1):
        prev, cur = cur, (precond @ cur - coeffs.alpha * cur - coeffs.beta[j - 2] * prev) / coeffs.gamma[j - 1]
        yield cur


def chebyshev_scalars_upto(lam: np.ndarray, coeffs: ChebyshevCoefficients, kmax: int):
    """Yield the scalar error polynomials ``e_1(lam) .. e_kmax(lam)`` elementwise."""
    prev, cur = np.ones_like(lam), 1.0 - lam / coeffs.alpha
    yield cur
    for j in range(2, kmax + 1):
        prev, cur = cur, (lam * cur - coeffs.alpha * cur - coeffs.beta[j - 2] * prev) / coeffs.gamma[j - 1]
        yield cur


def chebyshev_interval(spec: Chebyshev, sym: OperatorSymbol) -> tuple[float, float]:
    lam = spec.lambda_max if spec.lambda_max is not None else estimate_lambda_max(sym)
    return spec.lower * lam, spec.upper * lam


def jacobi_error_symbol(sym: OperatorSymbol, omega: float, nu: int, theta) -> np.ndarray:
    return jacobi_error(preconditioned_symbol(sym, theta), omega, nu)


def chebyshev_error_symbol(
    sym: OperatorSymbol, k: int, nu: int, lambda_min: float, lambda_max: float, theta
) -> np.ndarray:
    precond = preconditioned_symbol(sym, theta)
    if k == 0:
        return _matrix_power(np.broadcast_to(np.eye(sym.size), precond.shape).astype(complex), nu)
    coeffs = chebyshev_coefficients(k, lambda_min, lambda_max)
    return _matrix_power(chebyshev_error(precond, coeffs, k), nu)


def smoother_error_symbol(sym: OperatorSymbol, spec: SmootherSpec, theta, interval=None) -> np.ndarray:
    """Error propagation symbol of ``spec`` (including its passes) at ``theta``."""
    if isinstance(spec, Jacobi):
        return jacobi_error_symbol(sym, spec.omega, spec.passes, theta)
    lo, hi = interval if interval is not None else chebyshev_interval(spec, sym)
    return chebyshev_error_symbol(sym, spec.order, spec.passes, lo, hi, theta)


def smoother_spectrum_sweep(sym: OperatorSymbol, spec: SmootherSpec, thetas) -> np.ndarray:
    """Eigenvalues of the preconditioned operator symbol ``M^{-1} A(theta)``.

    Jacobi uses ``omega D^{-1} A``; Chebyshev uses ``I - E_k``.  Returns an
    array of shape ``(len(thetas), size)`` with eigenvalues sorted by real part.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    precond = preconditioned_symbol(sym, thetas)
    if isinstance(spec, Jacobi):
        mats = spec.omega * precond
    else:
        lo, hi = chebyshev_interval(spec, sym)
        eye = np.eye(sym.size)
        mats = eye - chebyshev_error(precond, chebyshev_coefficients(spec.order, lo, hi), spec.order)
    eigs = np.linalg.eigvals(mats)
    order = np.argsort(eigs.real, axis=-1, kind="stable")
    return np.take_along_axis(eigs, order, axis=-1)
