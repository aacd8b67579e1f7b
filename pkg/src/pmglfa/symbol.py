"""Fourier mode localization and symbols of element-localized operators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import kron_all
from .weakform import ElementOperator


@dataclass(frozen=True)
class Localization:
    """Binary map ``Q`` from element nodes to the modes unique to one element."""

    matrix: np.ndarray
    degree: int
    dim: int
    components: int

    @property
    def num_modes(self) -> int:
        return self.matrix.shape[1]

    def multiplicity(self) -> np.ndarray:
        """Number of elements sharing each element node on the periodic grid."""
        per_mode = self.matrix.sum(axis=0)
        return self.matrix @ per_mode


def localization_1d(p: int) -> np.ndarray:
    if p < 1:
        raise ValueError(f"degree must be >= 1, got {p}")
    return np.vstack([np.eye(p), np.eye(1, p)])


def localization(p: int, d: int, n: int = 1) -> Localization:
    """``Q = I_n (x) Q1d (x) ... (x) Q1d`` with ``Q1d = [I_p; e_0]``."""
    q = kron_all([localization_1d(p)] * d)
    return Localization(np.kron(np.eye(n), q), p, d, n)


def phase(target_coords: np.ndarray, source_coords: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """``exp(i (x_j - x_i) . theta)`` for rows ``x_i`` in ``target_coords``.

    ``thetas`` has shape ``(..., d)``; the result has shape ``(..., rows, cols)``.
    """
    xi = target_coords @ thetas[..., :, None]  # (..., rows, 1)
    xj = source_coords @ thetas[..., :, None]
    return np.exp(1j * (np.swapaxes(xj, -1, -2) - xi))


def localized_symbol(
    matrix: np.ndarray,
    row_coords: np.ndarray,
    col_coords: np.ndarray,
    q_row: np.ndarray,
    q_col: np.ndarray,
    thetas,
) -> np.ndarray:
    """``Q_row^T (M * exp(i (x_col - x_row) . theta)) Q_col`` for a batch of thetas."""
    thetas = np.asarray(thetas, dtype=float)
    return q_row.T @ (matrix * phase(row_coords, col_coords, thetas)) @ q_col


@dataclass(frozen=True)
class OperatorSymbol:
    """Symbol of an element operator as a function of frequency.

    Calling ``sym(theta)`` with ``theta`` of shape ``(d,)`` returns one matrix;
    shape ``(batch, d)`` returns a stack.
    """

    operator: ElementOperator
    loc: Localization

    @property
    def size(self) -> int:
        return self.loc.num_modes

    @property
    def dim(self) -> int:
        return self.operator.dim

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1] != self.dim:
            raise ValueError(f"theta must have {self.dim} components, got shape {theta.shape}")
        c = self.operator.coords
        q = self.loc.matrix
        return localized_symbol(self.operator.matrix, c, c, q, q, theta)

    evaluate = __call__


def _check_sizes(ae: ElementOperator, loc: Localization) -> None:
    if ae.size != loc.matrix.shape[0]:
        raise ValueError(
            f"element operator has {ae.size} rows but localization expects {loc.matrix.shape[0]}"
        )


def operator_symbol(ae: ElementOperator, loc: Localization) -> OperatorSymbol:
    _check_sizes(ae, loc)
    return OperatorSymbol(ae, loc)


def diagonal_symbol(ae: ElementOperator, loc: Localization) -> np.ndarray:
    """``Q^T diag(A_e) Q``: the frequency-independent Jacobi symbol."""
    _check_sizes(ae, loc)
    q = loc.matrix
    diag = q.T @ (np.diag(ae.matrix)[:, None] * q)
    if np.any(np.diag(diag) == 0.0):
        raise ValueError("operator diagonal has zero entries; Jacobi is undefined")
    return diag
