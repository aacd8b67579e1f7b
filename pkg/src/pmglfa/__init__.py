"""Local Fourier analysis of p-multigrid and macro-element h-multigrid for high-order finite elements."""
from .basis import ElementBasis, QuadratureRule, gauss_legendre_rule, gauss_lobatto_points, lagrange_basis, lagrange_matrices
from .oracle import PeriodicProblem, assemble_periodic, circulant_eig_check, measured_two_grid_factor
from .smoother import Chebyshev, Jacobi, chebyshev_error_symbol, estimate_lambda_max, jacobi_error_symbol
from .symbol import Localization, OperatorSymbol, diagonal_symbol, localization, operator_symbol
from .tables import TABLES, compute_table
from .transfer import TransferPair, h_macro_element, h_transfer, macro_element_operator, p_transfer
from .twogrid import (
    AllFrequenciesExcluded,
    SweepResult,
    TwoGridAnalysis,
    TwoGridSpec,
    convergence_factor,
    optimal_omega,
    two_grid_symbol,
)
from .weakform import ElasticityModel, ElementOperator, WeakForm, assemble_element, elasticity_weakform, laplacian_weakform

__all__ = [
    "AllFrequenciesExcluded", "Chebyshev", "ElasticityModel", "ElementBasis", "ElementOperator", "Jacobi",
    "Localization", "OperatorSymbol", "PeriodicProblem", "QuadratureRule", "SweepResult", "TABLES",
    "TransferPair", "TwoGridAnalysis", "TwoGridSpec", "WeakForm", "assemble_element", "assemble_periodic",
    "chebyshev_error_symbol", "circulant_eig_check", "compute_table", "convergence_factor", "diagonal_symbol",
    "elasticity_weakform", "estimate_lambda_max", "gauss_legendre_rule", "gauss_lobatto_points",
    "h_macro_element", "h_transfer", "jacobi_error_symbol", "lagrange_basis", "lagrange_matrices",
    "laplacian_weakform", "localization", "macro_element_operator", "measured_two_grid_factor",
    "operator_symbol", "optimal_omega", "p_transfer", "two_grid_symbol",
]
