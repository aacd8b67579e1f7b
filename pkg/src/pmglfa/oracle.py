"""Periodic-grid reference: assembled block-circulant operators and direct two-grid iteration."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .basis import ElementBasis
from .smoother import Chebyshev, Jacobi, SmootherSpec, chebyshev_coefficients
from .symbol import OperatorSymbol
from .transfer import TransferPair
from .twogrid import TwoGridAnalysis, TwoGridSpec
from .weakform import ElementOperator, WeakForm, element_operator

MAX_UNKNOWNS = 20_000
BAILOUT = 1e12


class OracleSizeError(ValueError):
    """The periodic problem would exceed the dense-assembly cap."""


@dataclass(frozen=True)
class PeriodicProblem:
    """Operator assembled on an ``N``-periodic grid of identical elements.

    ``dofs[e]`` maps the element's local degrees of freedom to global ones;
    ``nodes_1d`` is the number of distinct nodes per element per direction
    (the element degree, or ``m * p`` for a macro-element).
    """

    element: ElementOperator
    num_elements: int
    nodes_1d: int
    dofs: np.ndarray
    operator: np.ndarray

    @property
    def dim(self) -> int:
        return self.element.dim

    @property
    def components(self) -> int:
        return self.element.components

    @property
    def size(self) -> int:
        return self.operator.shape[0]


def periodic_dofs(nodes_1d: int, dim: int, components: int, num_elements: int) -> np.ndarray:
    """Global indices of each element's degrees of freedom on the periodic grid.

    Element-local ordering matches the element operators (components
    outermost, first axis slowest); shape ``(num_elements**dim, local size)``.
    """
    n1 = nodes_1d * num_elements
    per_comp = n1**dim
    local = np.array(list(itertools.product(range(nodes_1d + 1), repeat=dim)))
    rows = []
    for e in itertools.product(range(num_elements), repeat=dim):
        idx = (np.asarray(e) * nodes_1d + local) % n1
        flat = np.ravel_multi_index(tuple(idx.T), (n1,) * dim)
        rows.append(np.concatenate([c * per_comp + flat for c in range(components)]))
    return np.array(rows)


def _check_size(unknowns: int) -> None:
    if unknowns > MAX_UNKNOWNS:
        raise OracleSizeError(f"periodic problem has {unknowns} unknowns, above the cap of {MAX_UNKNOWNS}")


def assemble_element_periodic(element: ElementOperator, num_elements: int, nodes_1d: int | None = None) -> PeriodicProblem:
    """Sum copies of ``element`` over an ``N**d`` periodic grid."""
    if num_elements < 3:
        raise ValueError(f"need at least 3 elements per direction, got {num_elements}")
    nodes_1d = element.degree if nodes_1d is None else nodes_1d
    d, n = element.dim, element.components
    _check_size(n * (nodes_1d * num_elements) ** d)
    dofs = periodic_dofs(nodes_1d, d, n, num_elements)
    size = n * (nodes_1d * num_elements) ** d
    op = np.zeros((size, size))
    for idx in dofs:
        op[np.ix_(idx, idx)] += element.matrix
    return PeriodicProblem(element, num_elements, nodes_1d, dofs, op)


def assemble_periodic(wf: WeakForm, basis: ElementBasis, num_elements: int) -> PeriodicProblem:
    """Assemble ``wf`` on ``N**d`` periodic elements of the given basis."""
    return assemble_element_periodic(element_operator(wf, basis), num_elements)


def assemble_transfer(tp: TransferPair, fine: PeriodicProblem, coarse: PeriodicProblem) -> np.ndarray:
    """Global prolongation from the element prolongation ``D_scale B_ctof``."""
    if fine.num_elements != coarse.num_elements:
        raise ValueError("fine and coarse problems must share the element grid")
    pe = tp.prolongation
    out = np.zeros((fine.size, coarse.size))
    for fi, ci in zip(fine.dofs, coarse.dofs):
        out[np.ix_(fi, ci)] += pe
    return out


def discrete_frequencies(dim: int, num_elements: int) -> np.ndarray:
    """The ``N**d`` frequencies ``2 pi k / N`` resolved by an ``N``-periodic grid."""
    t = 2 * np.pi * np.arange(num_elements) / num_elements
    return np.array(list(itertools.product(t, repeat=dim)))


def _sorted_eigs(mats: np.ndarray, hermitian: bool) -> np.ndarray:
    if hermitian:
        return np.sort(np.linalg.eigvalsh(mats).ravel())
    eigs = np.linalg.eigvals(mats).ravel()
    return eigs[np.lexsort((eigs.imag, eigs.real))]


def circulant_eig_check(problem: PeriodicProblem, symbol: OperatorSymbol) -> float:
    """Max mismatch between the assembled spectrum and the union of symbol spectra."""
    if symbol.size * problem.num_elements**problem.dim != problem.size:
        raise ValueError("symbol size does not match the periodic problem")
    thetas = discrete_frequencies(problem.dim, problem.num_elements)
    hermitian = bool(np.allclose(problem.operator, problem.operator.T, rtol=0, atol=1e-12))
    direct = _sorted_eigs(problem.operator, hermitian)
    via_symbol = _sorted_eigs(symbol(thetas), hermitian)
    return float(np.max(np.abs(direct - via_symbol)))


# -- direct two-grid iteration ----------------------------------------------


class PeriodicTwoGrid:
    """Assembled two-grid cycle on the periodic grid, mirroring a :class:`TwoGridSpec`."""

    def __init__(self, spec: TwoGridSpec, num_elements: int):
        self.spec = spec
        self.analysis = TwoGridAnalysis(spec)
        fine_el = self.analysis.fine.operator
        coarse_el = self.analysis.coarse.operator
        n, d = spec.components, spec.dim
        total = n * (fine_el.degree * num_elements) ** d
        _check_size(total)
        self.fine = assemble_element_periodic(fine_el, num_elements)
        self.coarse = assemble_element_periodic(coarse_el, num_elements)
        self.prolongation = assemble_transfer(self.analysis.transfer, self.fine, self.coarse)
        self.restriction = self.prolongation.T
        self.coarse_pinv = np.linalg.pinv(self.coarse.operator, rcond=1e-10, hermitian=True)
        self.inv_diag = 1.0 / np.diag(self.fine.operator)
        per_comp = self.fine.size // n
        # translations: constants per component
        basis = np.zeros((self.fine.size, n))
        for c in range(n):
            basis[c * per_comp:(c + 1) * per_comp, c] = 1.0 / math.sqrt(per_comp)
        self.nullspace = basis

    def project(self, e: np.ndarray) -> np.ndarray:
        return e - self.nullspace @ (self.nullspace.T @ e)

    def smooth(self, e: np.ndarray, smoother: SmootherSpec) -> np.ndarray:
        a, dinv = self.fine.operator, self.inv_diag
        if isinstance(smoother, Jacobi):
            for _ in range(smoother.passes):
                e = e - smoother.omega * dinv * (a @ e)
            return e
        if smoother.order == 0:
            return e
        lo, hi = self.analysis.chebyshev_interval(smoother)
        coeffs = chebyshev_coefficients(smoother.order, lo, hi)
        for _ in range(smoother.passes):
            prev, cur = e, e - dinv * (a @ e) / coeffs.alpha
            for j in range(2, smoother.order + 1):
                nxt = (dinv * (a @ cur) - coeffs.alpha * cur - coeffs.beta[j - 2] * prev) / coeffs.gamma[j - 1]
                prev, cur = cur, nxt
            e = cur
        return e

    def cycle(self, e: np.ndarray) -> np.ndarray:
        sm = self.spec.smoother
        e = self.smooth(e, sm)
        e = e - self.prolongation @ (self.coarse_pinv @ (self.restriction @ (self.fine.operator @ e)))
        return self.project(self.smooth(e, sm))


@dataclass
class MeasuredFactor:
    factor: float
    trials: list[float]
    iterations: int
    num_elements: int
    diverged: bool


def measured_two_grid_factor(
    spec: TwoGridSpec,
    num_elements: int,
    iterations: int = 60,
    trials: int = 3,
    seed: int = 0,
    window: int = 5,
) -> MeasuredFactor:
    """Asymptotic error reduction of the assembled two-grid cycle.

    Each trial starts from a seeded uniform random error with the constant
    (translation) modes removed; the factor is the geometric mean of the last
    ``window`` error-norm ratios, and the worst trial is reported.  A trial
    stops early once the error has grown by more than ``BAILOUT``.
    """
    if iterations < 20:
        raise ValueError(f"need at least 20 iterations, got {iterations}")
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    tg = PeriodicTwoGrid(spec, num_elements)
    rng = np.random.default_rng(seed)
    results, diverged = [], False
    for _ in range(trials):
        e = tg.project(rng.uniform(-1.0, 1.0, tg.fine.size))
        e /= np.linalg.norm(e)
        logs: list[float] = []
        growth = 0.0
        for _ in range(iterations):
            e = tg.cycle(e)
            norm = np.linalg.norm(e)
            if norm == 0.0:
                logs.append(-np.inf)
                break
            logs.append(math.log(norm))
            growth += logs[-1]
            e /= norm
            if growth > math.log(BAILOUT):
                diverged = True
                break
        tail = logs[-window:]
        results.append(float(math.exp(sum(tail) / len(tail))))
    return MeasuredFactor(max(results), results, iterations, num_elements, diverged)


def comparison_report(spec: TwoGridSpec, config: dict, num_elements: int, iterations: int = 60,
                      trials: int = 3, seed: int = 0) -> dict:
    """Oracle-vs-LFA comparison as a JSON-ready dict."""
    lfa = TwoGridAnalysis(spec).sweep([spec.smoother])[0]
    measured = measured_two_grid_factor(spec, num_elements, iterations, trials, seed)
    tol = 0.02 + 0.05 * lfa.mu
    return {
        "config": config,
        "lfa_factor": lfa.mu,
        "measured_factor": measured.factor,
        "N": num_elements,
        "iterations": iterations,
        "trials": measured.trials,
        "diverged": measured.diverged,
        "tolerance": tol,
        "agrees": bool(abs(measured.factor - lfa.mu) <= tol),
    }


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)
