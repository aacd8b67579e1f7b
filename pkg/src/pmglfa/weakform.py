"""Pointwise weak forms and dense element operators ``A_e = B^T D B``."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .basis import ElementBasis, lagrange_basis

# (basis, h) -> array of shape (num_qpts, n*(1+d), n*(1+d))
BlockBuilder = Callable[[ElementBasis, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class WeakForm:
    """Bilinear form given by its quadrature-point blocks.

    ``blocks(basis, h)`` returns one ``n(1+d) x n(1+d)`` matrix per quadrature
    point acting on ``(u_c, d_0 u_c, ..., d_{d-1} u_c)`` for each component
    ``c`` (components outermost).  Blocks already include quadrature weights
    and the affine map from [-1, 1]^d to an element of size ``h``.
    """

    components: int
    dim: int
    blocks: BlockBuilder
    name: str = "custom"
    scale: float = 1.0
    h: float = 1.0

    def scaled(self, s: float) -> "WeakForm":
        """The same form multiplied by ``s``."""
        return replace(self, scale=self.scale * s)

    def evaluate(self, basis: ElementBasis, h) -> np.ndarray:
        h = _element_size(h, self.dim)
        return self.scale * self.blocks(basis, h)


@dataclass(frozen=True)
class ElementOperator:
    """Dense element matrix with the normalized coordinates of its rows.

    ``coords`` has one row per degree of freedom (replicated per component)
    in the element frame, where the element spans [0, 1]^d.
    """

    matrix: np.ndarray
    coords: np.ndarray
    h: np.ndarray
    components: int
    dim: int
    degree: int

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ElasticityModel:
    """Isotropic linear elastic material."""

    young: float = 1.0
    poisson: float = 0.3

    def __post_init__(self):
        if self.young <= 0:
            raise ValueError(f"Young's modulus must be positive, got {self.young}")
        if not 0.0 < self.poisson < 0.5:
            raise ValueError(f"Poisson ratio must lie in (0, 0.5), got {self.poisson}")

    @property
    def lame_lambda(self) -> float:
        nu = self.poisson
        return self.young * nu / ((1 + nu) * (1 - 2 * nu))

    @property
    def lame_mu(self) -> float:
        return self.young / (2 * (1 + self.poisson))

    def voigt_stiffness(self, dim: int = 3) -> np.ndarray:
        """Stiffness in Voigt order: (11, 22, 33, 23, 13, 12) in 3D, (11, 22, 12) in 2D.

        2D is plane strain; 1D keeps only the axial modulus ``lambda + 2 mu``.
        """
        lam, mu = self.lame_lambda, self.lame_mu
        size = len(_voigt_pairs(dim))
        c = np.zeros((size, size))
        c[:dim, :dim] = lam
        c[range(dim), range(dim)] = lam + 2 * mu
        c[range(dim, size), range(dim, size)] = mu
        return c


def _element_size(h, dim: int) -> np.ndarray:
    h = np.broadcast_to(np.asarray(h, dtype=float), (dim,)).copy()
    if np.any(h <= 0):
        raise ValueError(f"element size must be positive, got {h}")
    return h


def _jacobians(basis: ElementBasis, h: np.ndarray):
    """Quadrature weights times |J|, and the reference-to-physical gradient factors."""
    wdetj = basis.weights * np.prod(h / 2.0)
    return wdetj, 2.0 / h


def laplacian_weakform(dim: int, h=1.0) -> WeakForm:
    """Scalar Laplacian ``(grad u, grad v)`` on elements of size ``h``."""
    if dim not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {dim}")

    def blocks(basis: ElementBasis, h: np.ndarray) -> np.ndarray:
        wdetj, ginv = _jacobians(basis, h)
        out = np.zeros((basis.num_qpts, 1 + dim, 1 + dim))
        out[:, 1:, 1:] = wdetj[:, None, None] * np.diag(ginv**2)[None]
        return out

    _element_size(h, dim)
    return WeakForm(1, dim, blocks, name="laplacian", h=h)


def _voigt_pairs(dim: int) -> list[tuple[int, int]]:
    if dim not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {dim}")
    shear = {1: [], 2: [(0, 1)], 3: [(1, 2), (0, 2), (0, 1)]}[dim]
    return [(a, a) for a in range(dim)] + shear


def _voigt_maps(dim: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Voigt maps on the displacement gradient in ``(c, k) -> d_k u_c`` ordering.

    Returns ``(strain, stress)``: ``strain`` takes the gradient to the Voigt
    vector of symmetric-gradient components ``eps_ij``; ``stress`` expands a
    Voigt stress vector to the full tensor, so that ``stress.T @ s``
    contracts ``s`` against a test-function gradient.
    """
    pairs = _voigt_pairs(dim)
    strain = np.zeros((len(pairs), dim * dim))
    stress = np.zeros((len(pairs), dim * dim))
    for row, (i, j) in enumerate(pairs):
        cols = sorted({dim * i + j, dim * j + i})
        strain[row, cols] = 1.0 / len(cols)
        stress[row, cols] = 1.0
    return strain, stress


def elasticity_weakform(model: ElasticityModel, h=1.0, dim: int = 3) -> WeakForm:
    """Linear elasticity ``(grad v : sigma(u))`` with ``dim`` displacement components.

    ``sigma`` is the Voigt stiffness applied to the symmetric-gradient
    components ``eps_ij`` (shear entries not doubled) and expanded back to a
    symmetric tensor.
    """
    strain, stress = _voigt_maps(dim)
    grad_coupling = stress.T @ model.voigt_stiffness(dim) @ strain  # (c, k) ordering
    width = 1 + dim

    def blocks(basis: ElementBasis, h: np.ndarray) -> np.ndarray:
        wdetj, ginv = _jacobians(basis, h)
        scale = np.tile(ginv, dim)
        coupling = grad_coupling * np.outer(scale, scale)
        out = np.zeros((basis.num_qpts, dim * width, dim * width))
        # field layout per component: (value, d0, ..., d_{dim-1})
        grad_idx = np.array([width * c + 1 + k for c in range(dim) for k in range(dim)])
        out[:, grad_idx[:, None], grad_idx[None, :]] = wdetj[:, None, None] * coupling[None]
        return out

    _element_size(h, dim)
    return WeakForm(dim, dim, blocks, name="elasticity", h=h)


def element_operator(wf: WeakForm, basis: ElementBasis, h=None) -> ElementOperator:
    """Assemble ``B^T D B`` for one element of size ``h`` (default ``wf.h``).

    Degrees of freedom are ordered with components outermost.
    """
    if wf.dim != basis.dim:
        raise ValueError(f"weak form is {wf.dim}D but basis is {basis.dim}D")
    h = _element_size(wf.h if h is None else h, wf.dim)
    n, d = wf.components, wf.dim
    blocks = wf.evaluate(basis, h)
    expected = (basis.num_qpts, n * (1 + d), n * (1 + d))
    if blocks.shape != expected:
        raise ValueError(f"weak form blocks have shape {blocks.shape}, expected {expected}")

    # fields[a] : (num_qpts, num_nodes), a = value, d_0, ..., d_{d-1}
    fields = np.concatenate([basis.interp[None], basis.grad_blocks()], axis=0)
    blocks = blocks.reshape(basis.num_qpts, n, 1 + d, n, 1 + d)
    mat = np.einsum("aqi,qcaeb,bqj->ciej", fields, blocks, fields, optimize=True)
    size = n * basis.num_nodes
    mat = mat.reshape(size, size)
    coords = np.tile(basis.node_coords(), (n, 1))
    return ElementOperator(mat, coords, h, n, d, basis.degree)


def assemble_element(wf: WeakForm, degree: int, h=None) -> ElementOperator:
    """Convenience: element operator of ``wf`` on a degree-``p`` Lagrange element."""
    return element_operator(wf, lagrange_basis(degree, wf.dim), h)
