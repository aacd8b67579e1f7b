"""Two-grid error propagation symbols and LFA convergence factors."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .smoother import (
    Chebyshev,
    Jacobi,
    SmootherSpec,
    chebyshev_coefficients,
    chebyshev_errors_upto,
    chebyshev_scalars_upto,
    estimate_lambda_max,
    jacobi_error,
    preconditioned_symbol,
)
from .symbol import OperatorSymbol, diagonal_symbol, localization, operator_symbol
from .transfer import (
    TransferPair,
    h_transfer,
    macro_element_operator,
    p_transfer,
    prolongation_symbol,
    restriction_symbol,
)
from .weakform import WeakForm, assemble_element

log = logging.getLogger(__name__)

DEFAULT_RESOLUTION = {1: 256, 2: 64, 3: 16}
GRID_KINDS = ("cell", "node")
# bytes of complex workspace allowed per evaluation chunk
CHUNK_BYTES = 64 * 2**20


class AllFrequenciesExcluded(RuntimeError):
    """Every sampled frequency had a singular coarse symbol."""


@dataclass(frozen=True)
class TwoGridSpec:
    """Configuration of a two-grid analysis.

    p-multigrid uses ``coarse_degree``; h-multigrid sets ``macro`` to the
    number of sub-elements per direction and coarsens a macro-element of
    degree-``fine_degree`` sub-elements to one degree-``fine_degree`` element.
    """

    weakform: WeakForm
    fine_degree: int
    coarse_degree: int | None = None
    smoother: SmootherSpec = Jacobi(1.0)
    macro: int | None = None
    resolution: int | None = None
    cutoff: float = 1e-10
    grid: str = "cell"

    def __post_init__(self):
        if (self.coarse_degree is None) == (self.macro is None):
            raise ValueError("set exactly one of coarse_degree (p-mode) or macro (h-mode)")
        if self.coarse_degree is not None and not 1 <= self.coarse_degree <= self.fine_degree:
            raise ValueError(
                f"coarse degree must lie in [1, {self.fine_degree}], got {self.coarse_degree}"
            )
        if self.macro is not None and self.macro < 2:
            raise ValueError(f"macro-element needs at least 2 sub-elements, got {self.macro}")
        if self.resolution is not None and self.resolution < 8:
            raise ValueError(f"theta resolution must be >= 8, got {self.resolution}")
        if self.cutoff <= 0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")
        if self.grid not in GRID_KINDS:
            raise ValueError(f"grid must be one of {GRID_KINDS}, got {self.grid!r}")

    @property
    def dim(self) -> int:
        return self.weakform.dim

    @property
    def components(self) -> int:
        return self.weakform.components

    @property
    def grid_resolution(self) -> int:
        return self.resolution or DEFAULT_RESOLUTION[self.dim]

    def with_smoother(self, smoother: SmootherSpec) -> "TwoGridSpec":
        return replace(self, smoother=smoother)


@dataclass
class SweepResult:
    """Spectral radii over the frequency grid and their maximum."""

    thetas: np.ndarray
    radii: np.ndarray
    excluded: np.ndarray = field(default_factory=lambda: np.zeros((0, 1)))

    @property
    def mu(self) -> float:
        return float(np.max(self.radii))

    @property
    def theta_max(self) -> np.ndarray:
        return self.thetas[int(np.argmax(self.radii))]

    def summary(self) -> dict:
        return {
            "mu": self.mu,
            "theta_max": [float(t) for t in self.theta_max],
            "num_frequencies": int(len(self.radii)),
            "excluded": int(len(self.excluded)),
        }


def theta_grid_1d(resolution: int, kind: str = "cell") -> np.ndarray:
    """Uniform samples of [-pi/2, 3pi/2).

    ``"cell"`` puts samples at cell centers, so zero is never hit for even
    resolution; ``"node"`` starts at -pi/2 and hits zero when 4 divides the
    resolution (that frequency is then dropped as singular).
    """
    if kind not in GRID_KINDS:
        raise ValueError(f"grid must be one of {GRID_KINDS}, got {kind!r}")
    offset = 0.5 if kind == "cell" else 0.0
    step = 2 * np.pi / resolution
    return -np.pi / 2 + (np.arange(resolution) + offset) * step


def theta_grid(dim: int, resolution: int, kind: str = "cell") -> np.ndarray:
    t = theta_grid_1d(resolution, kind)
    mesh = np.meshgrid(*([t] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _conjugate_partner(dim: int, resolution: int, kind: str) -> np.ndarray:
    """Flat index of the grid point equal to ``-theta`` modulo 2 pi."""
    idx = np.indices((resolution,) * dim).reshape(dim, -1)
    shift = 1 if kind == "cell" else 0
    mirror = (resolution // 2 - shift - idx) % resolution
    return np.ravel_multi_index(tuple(mirror), (resolution,) * dim)


class TwoGridAnalysis:
    """Precomputed element operators, transfers and smoother data for one spec."""

    def __init__(self, spec: TwoGridSpec):
        self.spec = spec
        wf, d, n = spec.weakform, spec.dim, spec.components
        if spec.macro is None:
            fine = assemble_element(wf, spec.fine_degree)
            coarse = assemble_element(wf, spec.coarse_degree)
            self.transfer: TransferPair = p_transfer(spec.coarse_degree, spec.fine_degree, d, n, allow_equal=True)
        else:
            fine = macro_element_operator(wf, spec.fine_degree, spec.macro)
            coarse = assemble_element(wf, spec.fine_degree)
            self.transfer = h_transfer(spec.fine_degree, spec.macro, d, n)
        self.fine: OperatorSymbol = operator_symbol(fine, localization(fine.degree, d, n))
        self.coarse: OperatorSymbol = operator_symbol(coarse, localization(coarse.degree, d, n))
        self.diag = diagonal_symbol(self.fine.operator, self.fine.loc)
        # frequency-independent scale for the singular coarse symbol test
        self.coarse_scale = float(np.linalg.norm(coarse.matrix, 2))
        self._lambda_max: float | None = None
        self.galerkin = self._check_galerkin()

    def _check_galerkin(self, tol: float = 1e-9) -> bool:
        """Whether ``A_f`` is symmetric and ``A_c = R A_f P`` at generic frequencies."""
        mat = self.fine.operator.matrix
        if not np.allclose(mat, mat.T, rtol=0.0, atol=tol * np.abs(mat).max()):
            return False
        rng = np.random.default_rng(0)
        thetas = rng.uniform(-np.pi / 2, 3 * np.pi / 2, size=(3, self.spec.dim))
        p = prolongation_symbol(self.transfer, thetas)
        galerkin = np.swapaxes(p.conj(), -1, -2) @ self.fine(thetas) @ p
        return bool(np.allclose(galerkin, self.coarse(thetas), rtol=0.0, atol=tol * self.coarse_scale))

    @property
    def lambda_max(self) -> float:
        """Sampled estimate of the largest eigenvalue of the Jacobi-preconditioned fine symbol."""
        if self._lambda_max is None:
            self._lambda_max = estimate_lambda_max(self.fine)
        return self._lambda_max

    def chebyshev_interval(self, smoother: Chebyshev) -> tuple[float, float]:
        lam = smoother.lambda_max if smoother.lambda_max is not None else self.lambda_max
        return smoother.lower * lam, smoother.upper * lam

    # -- symbols -----------------------------------------------------------

    def coarse_correction(self, thetas):
        """``I - P A_c^{-1} R A_f`` and the mask of frequencies with invertible ``A_c``."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        a_f = self.fine(thetas)
        a_c = self.coarse(thetas)
        valid = self._nonsingular(a_c)
        p = prolongation_symbol(self.transfer, thetas)
        r = restriction_symbol(self.transfer, thetas)
        eye = np.eye(a_f.shape[-1])
        corr = np.broadcast_to(eye, a_f.shape).astype(complex)
        if np.any(valid):
            rhs = r[valid] @ a_f[valid]
            corr[valid] = eye - p[valid] @ np.linalg.solve(a_c[valid], rhs)
        return corr, valid, a_f

    def _nonsingular(self, a_c: np.ndarray) -> np.ndarray:
        sv = np.linalg.svd(a_c, compute_uv=False)
        return sv[:, -1] > self.spec.cutoff * self.coarse_scale

    def smoother_symbols(self, precond: np.ndarray, smoothers: Sequence[SmootherSpec]):
        """Error symbols for several smoothers sharing one preconditioned fine symbol."""
        out = []
        cheb_cache: dict = {}
        for sm in smoothers:
            if isinstance(sm, Jacobi):
                out.append(jacobi_error(precond, sm.omega, sm.passes))
                continue
            if sm.order == 0:
                out.append(np.broadcast_to(np.eye(precond.shape[-1]), precond.shape).astype(complex))
                continue
            interval = self.chebyshev_interval(sm)
            key = interval
            if key not in cheb_cache or len(cheb_cache[key]) < sm.order:
                coeffs = chebyshev_coefficients(max(sm.order, 1), *interval)
                cheb_cache[key] = list(chebyshev_errors_upto(precond, coeffs, sm.order))
            out.append(np.linalg.matrix_power(cheb_cache[key][sm.order - 1], sm.passes))
        return out

    def symbol(self, thetas, smoother: SmootherSpec | None = None):
        """Two-grid error symbol ``S (I - P A_c^{-1} R A_f) S`` and validity mask."""
        smoother = smoother or self.spec.smoother
        corr, valid, a_f = self.coarse_correction(thetas)
        precond = (1.0 / np.diag(self.diag))[:, None] * a_f
        (s,) = self.smoother_symbols(precond, [smoother])
        return s @ corr @ s, valid

    def radii(self, thetas, smoothers: Sequence[SmootherSpec]) -> tuple[np.ndarray, np.ndarray]:
        """Spectral radii, shape ``(len(smoothers), len(thetas))``, and validity mask.

        Uses :meth:`radii_hermitian` when the coarse operator is Galerkin,
        otherwise :meth:`radii_dense`.
        """
        if self.galerkin:
            return self.radii_hermitian(thetas, smoothers)
        return self.radii_dense(thetas, smoothers)

    def radii_hermitian(self, thetas, smoothers: Sequence[SmootherSpec]) -> tuple[np.ndarray, np.ndarray]:
        """Spectral radii via the energy-inner-product form of the two-grid operator.

        With ``A_f = L L^H`` where ``L = D^{1/2} V Lambda^{1/2}`` and
        ``D^{-1/2} A_f D^{-1/2} = V Lambda V^H``, any polynomial smoother in
        ``D^{-1} A_f`` is ``diag(g(Lambda))`` and a Galerkin coarse correction
        is the orthogonal projector ``U U^H`` onto the complement of
        ``L^H P``.  Hence ``rho = lambda_max(U^H diag(g^2) U)``.
        """
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        out = np.full((len(smoothers), len(thetas)), np.nan)
        valid = self._nonsingular(self.coarse(thetas))
        if not np.any(valid):
            return out, valid
        thetas = thetas[valid]
        dhalf = np.sqrt(np.diag(self.diag))
        a_f = self.fine(thetas)
        lam, vec = np.linalg.eigh(a_f / np.outer(dhalf, dhalf))
        lam = np.clip(lam, 0.0, None)
        x = np.sqrt(lam)[..., :, None] * (np.swapaxes(vec.conj(), -1, -2) @ (dhalf[:, None] * prolongation_symbol(self.transfer, thetas)))
        q, _ = np.linalg.qr(x, mode="complete")
        u = q[..., :, x.shape[-1]:]
        if u.shape[-1] == 0:
            # coarse space spans the fine space: exact coarse solve
            out[:, valid] = 0.0
            return out, valid
        uh = np.swapaxes(u.conj(), -1, -2)
        for i, g in enumerate(self.smoother_polynomials(lam, smoothers)):
            m = (uh * (np.abs(g) ** 2)[..., None, :]) @ u
            out[i, valid] = np.linalg.eigvalsh(m)[..., -1]
        return out, valid

    def smoother_polynomials(self, lam: np.ndarray, smoothers: Sequence[SmootherSpec]) -> list[np.ndarray]:
        """Scalar error polynomials of each smoother at eigenvalues of ``D^{-1} A_f``."""
        out = []
        cheb_cache: dict = {}
        for sm in smoothers:
            if isinstance(sm, Jacobi):
                out.append((1.0 - sm.omega * lam) ** sm.passes)
                continue
            if sm.order == 0:
                out.append(np.ones_like(lam))
                continue
            interval = self.chebyshev_interval(sm)
            if interval not in cheb_cache or len(cheb_cache[interval]) < sm.order:
                coeffs = chebyshev_coefficients(sm.order, *interval)
                cheb_cache[interval] = list(chebyshev_scalars_upto(lam, coeffs, sm.order))
            out.append(cheb_cache[interval][sm.order - 1] ** sm.passes)
        return out

    def radii_dense(self, thetas, smoothers: Sequence[SmootherSpec]) -> tuple[np.ndarray, np.ndarray]:
        """Spectral radii from dense nonsymmetric eigenvalues of ``S C S``."""
        corr, valid, a_f = self.coarse_correction(thetas)
        precond = (1.0 / np.diag(self.diag))[:, None] * a_f
        out = np.full((len(smoothers), len(valid)), np.nan)
        if not np.any(valid):
            return out, valid
        corr = corr[valid]
        for i, s in enumerate(self.smoother_symbols(precond[valid], smoothers)):
            out[i, valid] = np.max(np.abs(np.linalg.eigvals(s @ corr @ s)), axis=-1)
        return out, valid

    # -- sweeps ------------------------------------------------------------

    def _chunk(self) -> int:
        size = self.fine.operator.size
        return max(1, CHUNK_BYTES // (16 * 8 * size * size))

    def sweep(self, smoothers: Sequence[SmootherSpec], resolution: int | None = None,
              threads: int = 1, grid: str | None = None) -> list[SweepResult]:
        """Sweep the frequency grid for each smoother.

        Element operators here are real, so ``rho(-theta) = rho(theta)``; only
        one of each conjugate pair is evaluated when the resolution is even.
        """
        d = self.spec.dim
        res = resolution or self.spec.grid_resolution
        kind = grid or self.spec.grid
        thetas = theta_grid(d, res, kind)
        total = len(thetas)
        if res % 2 == 0:
            partner = _conjugate_partner(d, res, kind)
            reps = np.flatnonzero(np.arange(total) <= partner)
        else:
            partner, reps = None, np.arange(total)

        chunk = self._chunk()
        pieces = [reps[i:i + chunk] for i in range(0, len(reps), chunk)]

        def work(idx):
            return self.radii(thetas[idx], smoothers)

        if threads > 1 and len(pieces) > 1:
            with ThreadPoolExecutor(threads) as pool:
                results = list(pool.map(work, pieces))
        else:
            results = [work(idx) for idx in pieces]

        radii = np.full((len(smoothers), total), np.nan)
        valid = np.zeros(total, dtype=bool)
        for idx, (r, v) in zip(pieces, results):
            radii[:, idx] = r
            valid[idx] = v
        if partner is not None:
            radii[:, partner[reps]] = radii[:, reps]
            valid[partner[reps]] = valid[reps]
        if not np.any(valid):
            raise AllFrequenciesExcluded("coarse symbol is singular at every sampled frequency")
        excluded = thetas[~valid]
        if len(excluded):
            log.info("excluded %d singular frequencies", len(excluded))
        return [SweepResult(thetas[valid], r[valid], excluded) for r in radii]


def two_grid_symbol(spec: TwoGridSpec, theta) -> np.ndarray:
    """Two-grid error symbol at ``theta``; raises if the coarse symbol is singular there."""
    theta = np.asarray(theta, dtype=float)
    single = theta.ndim == 1
    e, valid = TwoGridAnalysis(spec).symbol(np.atleast_2d(theta))
    if not np.all(valid):
        raise np.linalg.LinAlgError("coarse symbol is singular at the requested frequency")
    return e[0] if single else e


def convergence_factor(spec: TwoGridSpec, threads: int = 1) -> SweepResult:
    return TwoGridAnalysis(spec).sweep([spec.smoother], threads=threads)[0]


def omega_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid of weights rounded to the step's decimals."""
    if step <= 0:
        raise ValueError(f"omega step must be positive, got {step}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError(f"empty omega grid [{start}, {stop}]")
    return np.round(start + step * np.arange(count), 10)


def omega_sweep(spec: TwoGridSpec, omegas, threads: int = 1) -> list[tuple[float, float]]:
    """Convergence factor as a function of the Jacobi weight."""
    if not isinstance(spec.smoother, Jacobi):
        raise TypeError("omega sweeps need a Jacobi smoother")
    omegas = np.asarray(omegas, dtype=float)
    if omegas.size == 0:
        raise ValueError("empty omega grid")
    smoothers = [Jacobi(float(w), spec.smoother.passes) for w in omegas]
    results = TwoGridAnalysis(spec).sweep(smoothers, threads=threads)
    return [(float(w), r.mu) for w, r in zip(omegas, results)]


def optimal_omega(spec: TwoGridSpec, omegas, threads: int = 1) -> tuple[float, float]:
    """Weight minimizing the convergence factor; ties go to the smaller weight."""
    curve = omega_sweep(spec, omegas, threads)
    mus = np.array([mu for _, mu in curve])
    best = int(np.argmin(mus))
    return curve[best]


def optimal_omegas(spec: TwoGridSpec, omegas, passes: Sequence[int], resolution: int | None = None,
                   threads: int = 1) -> list[tuple[float, float]]:
    """:func:`optimal_omega` for several pass counts from one frequency sweep."""
    omegas = np.asarray(omegas, dtype=float)
    if omegas.size == 0:
        raise ValueError("empty omega grid")
    smoothers = [Jacobi(float(w), nu) for nu in passes for w in omegas]
    results = TwoGridAnalysis(spec).sweep(smoothers, resolution=resolution, threads=threads)
    mus = np.array([r.mu for r in results]).reshape(len(passes), omegas.size)
    best = np.argmin(mus, axis=1)
    return [(float(omegas[b]), float(mus[i, b])) for i, b in enumerate(best)]


def chebyshev_sweep(spec: TwoGridSpec, orders, threads: int = 1) -> list[tuple[int, float]]:
    """Convergence factor for each Chebyshev order, sharing one frequency sweep."""
    base = spec.smoother
    if not isinstance(base, Chebyshev):
        raise TypeError("order sweeps need a Chebyshev smoother")
    orders = [int(k) for k in orders]
    if not orders:
        raise ValueError("empty Chebyshev order list")
    smoothers = [Chebyshev(k, base.passes, base.lower, base.upper, base.lambda_max) for k in orders]
    results = TwoGridAnalysis(spec).sweep(smoothers, threads=threads)
    return [(k, r.mu) for k, r in zip(orders, results)]
