"""Lagrange bases on Gauss-Lobatto nodes with Gauss-Legendre quadrature.

One-dimensional bases are extended to ``d`` dimensions with Kronecker
products.  Tensor indices follow ``numpy.kron``: the first factor varies
slowest.  Axis ``k`` of a node coordinate always refers to Kronecker factor
``k``, and gradient block ``k`` differentiates along that axis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from numpy.polynomial import legendre


@dataclass(frozen=True)
class QuadratureRule:
    """Quadrature points and weights on the reference interval [-1, 1]."""

    points: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ElementBasis:
    """Tensor-product Lagrange basis evaluated at tensor quadrature points.

    Attributes
    ----------
    degree : int
        Polynomial degree ``p``.
    dim : int
        Spatial dimension ``d``.
    nodes1d : ndarray
        The ``p + 1`` Gauss-Lobatto nodes on [-1, 1].
    quadrature : QuadratureRule
        One-dimensional Gauss-Legendre rule with ``p + 1`` points.
    interp : ndarray
        ``q**d x (p+1)**d`` interpolation matrix.
    grad : ndarray
        ``d*q**d x (p+1)**d`` reference gradient matrix, one block per axis.
    weights : ndarray
        Tensor quadrature weights, length ``q**d``.
    """

    degree: int
    dim: int
    nodes1d: np.ndarray
    quadrature: QuadratureRule
    interp: np.ndarray
    grad: np.ndarray
    weights: np.ndarray = field(repr=False)

    @property
    def num_nodes(self) -> int:
        return (self.degree + 1) ** self.dim

    @property
    def num_qpts(self) -> int:
        return self.quadrature.size ** self.dim

    def grad_blocks(self) -> np.ndarray:
        """Gradient matrix reshaped to ``(d, q**d, (p+1)**d)``."""
        return self.grad.reshape(self.dim, self.num_qpts, self.num_nodes)

    def node_coords(self) -> np.ndarray:
        """Node coordinates normalized to [0, 1]^d, shape ``((p+1)**d, d)``."""
        return tensor_coords((self.nodes1d + 1.0) / 2.0, self.dim)


def gauss_legendre_rule(q: int) -> QuadratureRule:
    """``q``-point Gauss-Legendre rule, exact for degree ``2q - 1``."""
    if q < 1:
        raise ValueError(f"quadrature size must be >= 1, got {q}")
    x, w = legendre.leggauss(q)
    if q % 2 == 1:
        x[q // 2] = 0.0
    return QuadratureRule(points=x, weights=w)


def gauss_lobatto_points(count: int) -> np.ndarray:
    """Gauss-Lobatto points: roots of ``(1 - x^2) P'_{count-1}(x)``."""
    if count < 2:
        raise ValueError(f"Gauss-Lobatto needs at least 2 points, got {count}")
    n = count - 1
    interior = np.sort(legendre.Legendre.basis(n).deriv().roots().real) if n > 1 else np.empty(0)
    x = np.concatenate([[-1.0], interior, [1.0]])
    if count % 2 == 1:
        x[n // 2] = 0.0
    # enforce exact symmetry about zero
    return 0.5 * (x - x[::-1])


def lagrange_matrices(nodes, eval_points) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the Lagrange cardinal functions on ``nodes``.

    Returns ``(interp, grad)`` with ``interp[i, j] = l_j(eval_points[i])`` and
    ``grad[i, j] = l_j'(eval_points[i])``.
    """
    nodes = np.asarray(nodes, dtype=float)
    pts = np.asarray(eval_points, dtype=float)
    n = len(nodes)
    diffs = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diffs, 1.0)
    if np.any(diffs == 0.0):
        raise ValueError("Lagrange nodes must be distinct")
    denom = np.prod(diffs, axis=1)

    interp = np.empty((len(pts), n))
    grad = np.zeros((len(pts), n))
    for j in range(n):
        others = np.delete(nodes, j)
        factors = pts[:, None] - others[None, :]
        interp[:, j] = np.prod(factors, axis=1) / denom[j]
        # product rule: sum over the dropped factor
        for m in range(n - 1):
            grad[:, j] += np.prod(np.delete(factors, m, axis=1), axis=1)
        grad[:, j] /= denom[j]
    return interp, grad


def tensor_coords(coords1d, dim: int) -> np.ndarray:
    """Tensor grid of 1D coordinates, shape ``(len**dim, dim)``, kron order."""
    coords1d = np.asarray(coords1d, dtype=float)
    mesh = np.meshgrid(*([coords1d] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def kron_all(mats) -> np.ndarray:
    return reduce(np.kron, mats)


def tensor_basis(interp1d, grad1d, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Kronecker extension of 1D interpolation and gradient matrices.

    Gradient block ``k`` replaces factor ``k`` with ``grad1d``.
    """
    if dim not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {dim}")
    interp = kron_all([interp1d] * dim)
    blocks = []
    for k in range(dim):
        factors = [interp1d] * dim
        factors[k] = grad1d
        blocks.append(kron_all(factors))
    return interp, np.vstack(blocks)


def lagrange_basis(degree: int, dim: int) -> ElementBasis:
    """H1 Lagrange basis of degree ``p`` on Gauss-Lobatto nodes, ``p + 1`` Gauss points."""
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    nodes = gauss_lobatto_points(degree + 1)
    rule = gauss_legendre_rule(degree + 1)
    interp1d, grad1d = lagrange_matrices(nodes, rule.points)
    interp, grad = tensor_basis(interp1d, grad1d, dim)
    weights = kron_all([rule.weights] * dim)
    return ElementBasis(degree, dim, nodes, rule, interp, grad, weights)
