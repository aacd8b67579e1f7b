"""Grid transfer operators for p-multigrid and macro-element h-multigrid."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .basis import gauss_lobatto_points, kron_all, lagrange_matrices, tensor_coords
from .symbol import Localization, localization, localized_symbol
from .weakform import ElementOperator, WeakForm, assemble_element


@dataclass(frozen=True)
class TransferPair:
    """Element prolongation ``P_e = D_scale B_ctof`` and its localization data.

    Restriction is the transpose, ``R_e = P_e^T``.
    """

    b_ctof: np.ndarray
    d_scale: np.ndarray
    fine_coords: np.ndarray
    coarse_coords: np.ndarray
    fine_loc: Localization
    coarse_loc: Localization

    @property
    def prolongation(self) -> np.ndarray:
        return self.d_scale[:, None] * self.b_ctof

    @property
    def restriction(self) -> np.ndarray:
        return self.prolongation.T


def _build_pair(b1d: np.ndarray, fine1d: np.ndarray, coarse1d: np.ndarray,
                fine_loc: Localization, coarse_loc: Localization, d: int, n: int) -> TransferPair:
    b = np.kron(np.eye(n), kron_all([b1d] * d))
    d_scale = 1.0 / fine_loc.multiplicity()
    fine = np.tile(tensor_coords(fine1d, d), (n, 1))
    coarse = np.tile(tensor_coords(coarse1d, d), (n, 1))
    return TransferPair(b, d_scale, fine, coarse, fine_loc, coarse_loc)


def p_transfer(p_coarse: int, p_fine: int, d: int, n: int = 1, allow_equal: bool = False) -> TransferPair:
    """Interpolation of the degree-``p_coarse`` basis at the degree-``p_fine`` nodes.

    With ``allow_equal`` the degrees may coincide, giving the identity transfer.
    """
    if not (1 <= p_coarse < p_fine or (allow_equal and 1 <= p_coarse == p_fine)):
        raise ValueError(f"need 1 <= p_coarse < p_fine, got {p_coarse}, {p_fine}")
    fine_nodes = gauss_lobatto_points(p_fine + 1)
    coarse_nodes = gauss_lobatto_points(p_coarse + 1)
    b1d, _ = lagrange_matrices(coarse_nodes, fine_nodes)
    return _build_pair(
        b1d, (fine_nodes + 1) / 2, (coarse_nodes + 1) / 2,
        localization(p_fine, d, n), localization(p_coarse, d, n), d, n,
    )


def macro_nodes_1d(p: int, m: int) -> np.ndarray:
    """Nodes of ``m`` degree-``p`` sub-elements tiling [0, 1], shared ends merged."""
    sub = (gauss_lobatto_points(p + 1) + 1) / 2
    pts = [(s + sub[:-1]) / m for s in range(m)]
    return np.concatenate(pts + [np.array([1.0])])


def h_transfer(p: int, m: int, d: int, n: int = 1) -> TransferPair:
    """Coarse degree-``p`` element to a fine macro-element of ``m**d`` sub-elements."""
    if m < 2:
        raise ValueError(f"macro-element needs m >= 2 sub-elements, got {m}")
    if p < 1:
        raise ValueError(f"degree must be >= 1, got {p}")
    coarse_nodes = gauss_lobatto_points(p + 1)
    fine1d = macro_nodes_1d(p, m)
    b1d, _ = lagrange_matrices(coarse_nodes, 2 * fine1d - 1)
    return _build_pair(
        b1d, fine1d, (coarse_nodes + 1) / 2,
        localization(m * p, d, n), localization(p, d, n), d, n,
    )


def h_macro_element(ae_sub: ElementOperator, m: int) -> ElementOperator:
    """Assemble ``m**d`` copies of a sub-element operator into one macro-element.

    ``ae_sub`` must already be built at the sub-element size ``h / m``.
    """
    if m < 2:
        raise ValueError(f"macro-element needs m >= 2 sub-elements, got {m}")
    p, d, n = ae_sub.degree, ae_sub.dim, ae_sub.components
    nf = m * p + 1
    sub_nodes = (p + 1) ** d
    macro_nodes = nf**d
    local = np.array(list(itertools.product(range(p + 1), repeat=d)))
    strides = nf ** np.arange(d - 1, -1, -1)

    if ae_sub.size != n * sub_nodes:
        raise ValueError("sub-element operator size does not match its degree")
    mat = np.zeros((n * macro_nodes, n * macro_nodes))
    for s in itertools.product(range(m), repeat=d):
        glob = (np.asarray(s) * p + local) @ strides
        idx = np.concatenate([c * macro_nodes + glob for c in range(n)])
        mat[np.ix_(idx, idx)] += ae_sub.matrix

    fine1d = (np.arange(m)[:, None] + _coords_1d(ae_sub)[None, :-1]).ravel() / m
    fine1d = np.append(fine1d, 1.0)
    coords = np.tile(tensor_coords(fine1d, d), (n, 1))
    return ElementOperator(mat, coords, ae_sub.h * m, n, d, m * p)


def _coords_1d(ae: ElementOperator) -> np.ndarray:
    """Recover the 1D node coordinates from a tensor element's coordinate table."""
    return np.unique(ae.coords[:, 0])


def macro_element_operator(wf: WeakForm, p: int, m: int, h=None) -> ElementOperator:
    """Macro-element of size ``h`` built from degree-``p`` sub-elements of size ``h / m``."""
    h = wf.h if h is None else h
    sub = assemble_element(wf, p, np.asarray(h, dtype=float) / m)
    return h_macro_element(sub, m)


def prolongation_symbol(tp: TransferPair, theta) -> np.ndarray:
    """``Q_f^T (P_e * exp(i (x_c - x_f) . theta)) Q_c``."""
    return localized_symbol(
        tp.prolongation, tp.fine_coords, tp.coarse_coords,
        tp.fine_loc.matrix, tp.coarse_loc.matrix, theta,
    )


def restriction_symbol(tp: TransferPair, theta) -> np.ndarray:
    """``Q_c^T (R_e * exp(i (x_f - x_c) . theta)) Q_f``."""
    return localized_symbol(
        tp.restriction, tp.coarse_coords, tp.fine_coords,
        tp.coarse_loc.matrix, tp.fine_loc.matrix, theta,
    )
