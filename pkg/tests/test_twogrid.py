import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pmglfa.smoother import Chebyshev, Jacobi
from pmglfa.twogrid import (
    AllFrequenciesExcluded,
    TwoGridAnalysis,
    TwoGridSpec,
    _conjugate_partner,
    convergence_factor,
    omega_grid,
    omega_sweep,
    optimal_omega,
    optimal_omegas,
    theta_grid,
    theta_grid_1d,
    two_grid_symbol,
)
from pmglfa.weakform import ElasticityModel, elasticity_weakform, laplacian_weakform

LAP1 = laplacian_weakform(1)
OMEGAS = omega_grid(0.3, 1.2, 0.01)


def test_spec_validation():
    with pytest.raises(ValueError):
        TwoGridSpec(LAP1, 2)
    with pytest.raises(ValueError):
        TwoGridSpec(LAP1, 2, 1, macro=2)
    with pytest.raises(ValueError):
        TwoGridSpec(LAP1, 2, 3)
    with pytest.raises(ValueError):
        TwoGridSpec(LAP1, 2, 1, resolution=4)
    with pytest.raises(ValueError):
        TwoGridSpec(LAP1, 2, 1, cutoff=0.0)
    with pytest.raises(ValueError):
        TwoGridSpec(LAP1, 2, 1, grid="random")
    with pytest.raises(ValueError):
        TwoGridSpec(LAP1, 2, macro=1)


def test_theta_grids():
    cell = theta_grid_1d(8)
    np.testing.assert_allclose(cell, -np.pi / 2 + (np.arange(8) + 0.5) * np.pi / 4)
    assert not np.any(np.isclose(cell, 0.0))
    node = theta_grid_1d(8, "node")
    assert np.any(np.isclose(node, 0.0))
    assert theta_grid(2, 8).shape == (64, 2)
    assert np.all((cell >= -np.pi / 2) & (cell < 3 * np.pi / 2))


@pytest.mark.parametrize("kind", ["cell", "node"])
@pytest.mark.parametrize("dim,res", [(1, 8), (1, 16), (2, 8), (3, 8)])
def test_conjugate_partner_is_negated_frequency(kind, dim, res):
    thetas = theta_grid(dim, res, kind)
    partner = _conjugate_partner(dim, res, kind)
    diff = (thetas[partner] + thetas) / (2 * np.pi)
    np.testing.assert_allclose(diff, np.round(diff), atol=1e-12)


def test_zero_smoothing_gives_projection():
    analysis = TwoGridAnalysis(TwoGridSpec(LAP1, 4, 2, Jacobi(0.7, passes=0)))
    thetas = np.array([[0.4], [1.9], [-1.2]])
    e, valid = analysis.symbol(thetas)
    corr, _, _ = analysis.coarse_correction(thetas)
    assert np.all(valid)
    np.testing.assert_allclose(e, corr, atol=1e-14)
    np.testing.assert_allclose(e @ e, e, atol=1e-11)


def test_zero_weight_gives_unit_factor():
    spec = TwoGridSpec(laplacian_weakform(2), 2, 1, Jacobi(0.0), resolution=16)
    assert abs(convergence_factor(spec).mu - 1.0) < 1e-10


@pytest.mark.parametrize("wf,p", [(LAP1, 3), (laplacian_weakform(2), 2), (elasticity_weakform(ElasticityModel(), dim=2), 2)])
def test_matched_degrees_give_exact_coarse_solve(wf, p):
    spec = TwoGridSpec(wf, p, p, Jacobi(0.8), resolution=8)
    assert convergence_factor(spec).mu <= 1e-10


@given(st.floats(0.01, 100.0))
def test_scale_invariance(s):
    for smoother in (Jacobi(0.63), Chebyshev(2)):
        base = TwoGridSpec(LAP1, 4, 2, smoother, resolution=32)
        scaled = TwoGridSpec(LAP1.scaled(s), 4, 2, smoother, resolution=32)
        assert abs(convergence_factor(base).mu - convergence_factor(scaled).mu) <= 1e-10


@pytest.mark.parametrize("smoother", [Jacobi(0.62), Jacobi(0.77), Jacobi(0.70, 2)] + [Chebyshev(k) for k in (1, 2, 3, 4)],
                         ids=repr)
def test_aggressive_coarsening_is_not_better(smoother):
    mu_41 = convergence_factor(TwoGridSpec(LAP1, 4, 1, smoother)).mu
    mu_42 = convergence_factor(TwoGridSpec(LAP1, 4, 2, smoother)).mu
    assert mu_41 >= mu_42


@pytest.mark.parametrize("spec", [
    TwoGridSpec(LAP1, 4, 2, Jacobi(0.6)),
    TwoGridSpec(laplacian_weakform(2), 3, 1, Chebyshev(3)),
    TwoGridSpec(LAP1, 2, macro=2, smoother=Jacobi(0.7, 2)),
    TwoGridSpec(elasticity_weakform(ElasticityModel(), dim=2), 2, 1, Chebyshev(2)),
], ids=["p1d", "p2d-cheb", "h1d", "elasticity2d"])
def test_hermitian_path_matches_dense_eigenvalues(spec):
    analysis = TwoGridAnalysis(spec)
    assert analysis.galerkin
    thetas = np.random.default_rng(1).uniform(-np.pi / 2, 3 * np.pi / 2, (40, spec.dim))
    fast, valid_fast = analysis.radii_hermitian(thetas, [spec.smoother])
    dense, valid_dense = analysis.radii_dense(thetas, [spec.smoother])
    np.testing.assert_array_equal(valid_fast, valid_dense)
    np.testing.assert_allclose(fast, dense, atol=1e-10)


def test_two_grid_symbol_example_and_singular_frequency():
    spec = TwoGridSpec(LAP1, 2, 1, Jacobi(0.63))
    assert abs(convergence_factor(spec).mu - 0.137) <= 0.005
    e = two_grid_symbol(spec, [1.0])
    assert e.shape == (2, 2)
    with pytest.raises(np.linalg.LinAlgError):
        two_grid_symbol(spec, [0.0])


def test_linear_coarse_symbol_excluded_only_at_zero():
    # a 1x1 coarse symbol must still be caught by the singular-frequency test
    spec = TwoGridSpec(LAP1, 2, 1, Chebyshev(1), resolution=8, grid="node")
    (result,) = TwoGridAnalysis(spec).sweep([spec.smoother])
    assert len(result.excluded) == 1
    assert abs(result.excluded[0, 0]) < 1e-12
    assert len(result.radii) == 7
    assert result.mu < 1.0


def test_all_frequencies_excluded():
    spec = TwoGridSpec(LAP1, 2, 1, Jacobi(0.6), resolution=8, cutoff=1e6)
    with pytest.raises(AllFrequenciesExcluded):
        convergence_factor(spec)


def test_sweep_result_fields():
    spec = TwoGridSpec(LAP1, 4, 2, Jacobi(0.62), resolution=64)
    result = convergence_factor(spec)
    assert result.mu == result.radii.max()
    assert len(result.thetas) == 64
    summary = result.summary()
    assert summary["num_frequencies"] == 64 and summary["excluded"] == 0
    assert result.theta_max.shape == (1,)


def test_threads_are_bit_identical():
    spec = TwoGridSpec(laplacian_weakform(2), 3, 2, Chebyshev(2), resolution=32)
    serial = TwoGridAnalysis(spec).sweep([spec.smoother])[0]
    threaded = TwoGridAnalysis(spec).sweep([spec.smoother], threads=4)[0]
    np.testing.assert_array_equal(serial.radii, threaded.radii)


def test_omega_grid():
    np.testing.assert_allclose(omega_grid(0.3, 0.35, 0.01), [0.3, 0.31, 0.32, 0.33, 0.34, 0.35])
    with pytest.raises(ValueError):
        omega_grid(0.5, 0.4, 0.01)
    with pytest.raises(ValueError):
        omega_grid(0.3, 1.0, 0.0)


@pytest.mark.parametrize("pf,pc,nu,omega,mu", [(2, 1, 1, 0.63, 0.137), (8, 4, 2, 0.60, 0.068)])
def test_optimal_omega_examples(pf, pc, nu, omega, mu):
    w, m = optimal_omega(TwoGridSpec(LAP1, pf, pc, Jacobi(1.0, nu)), omega_grid(0.3, 1.1, 0.01))
    assert abs(w - omega) <= 0.01 + 1e-12
    assert abs(m - mu) <= 0.005


def test_optimal_omega_2d_example():
    w, m = optimal_omega(TwoGridSpec(laplacian_weakform(2), 2, 1, Jacobi(1.0)), OMEGAS)
    assert abs(w - 0.95) <= 0.01 + 1e-12
    assert abs(m - 0.230) <= 0.01


def test_optimal_omegas_matches_single_sweeps():
    spec = TwoGridSpec(LAP1, 4, 2, Jacobi(1.0), resolution=64)
    batch = optimal_omegas(spec, OMEGAS, (1, 2))
    for nu, best in zip((1, 2), batch):
        assert best == optimal_omega(spec.with_smoother(Jacobi(1.0, nu)), OMEGAS)


def test_optimal_omega_ties_go_to_smaller_weight():
    # with zero passes the factor is 1 for every weight
    w, m = optimal_omega(TwoGridSpec(LAP1, 2, 1, Jacobi(1.0, 0), resolution=16), [0.9, 0.5, 0.7])
    assert abs(m - 1.0) < 1e-10
    assert w == 0.9


def test_omega_curve_shape():
    curve = omega_sweep(TwoGridSpec(LAP1, 4, 1, Jacobi(1.0)), OMEGAS)
    mus = np.array([m for _, m in curve])
    assert np.all(np.abs(np.diff(mus)) < 0.2)
    assert np.any((mus > 1.0) & (OMEGAS < 1.0))
    with pytest.raises(TypeError):
        omega_sweep(TwoGridSpec(LAP1, 4, 1, Chebyshev(1)), OMEGAS)
    with pytest.raises(ValueError):
        omega_sweep(TwoGridSpec(LAP1, 4, 1, Jacobi(1.0)), [])


def test_convergence_factor_examples():
    assert abs(convergence_factor(TwoGridSpec(LAP1, 4, 2, Jacobi(0.62))).mu - 0.204) <= 0.005
    assert abs(convergence_factor(TwoGridSpec(LAP1, 4, 1, Chebyshev(3))).mu - 0.089) <= 0.005
    spec = TwoGridSpec(laplacian_weakform(2), 2, 1, Chebyshev(2))
    assert abs(convergence_factor(spec).mu - 0.252) <= 0.01
