"""Layouts of the standard convergence-factor tables and their computation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .smoother import Chebyshev, Jacobi
from .twogrid import TwoGridAnalysis, TwoGridSpec, omega_grid, optimal_omegas
from .weakform import ElasticityModel, WeakForm, elasticity_weakform, laplacian_weakform

log = logging.getLogger(__name__)

ROWS_1D = ((2, 1), (4, 2), (4, 1), (8, 4), (8, 2), (8, 1), (16, 8), (16, 4), (16, 2), (16, 1))
ROWS_3D = ((2, 1), (4, 2), (4, 1), (8, 4), (8, 2), (8, 1))
ROWS_LOWER = ((4, 2), (4, 1), (8, 4), (8, 1), (16, 8), (16, 1))
DEFAULT_OMEGAS = (0.3, 1.2, 0.01)
# fine degree above which 3D rows are skipped unless requested
DEFAULT_MAX_DEGREE_3D = 4


@dataclass(frozen=True)
class TableLayout:
    """One convergence-factor table.

    ``kind`` is ``"jacobi-opt"`` (best weight per pass count in ``columns``),
    ``"jacobi"`` (fixed weight ``omega``, one pass) or ``"chebyshev"``
    (orders in ``columns``, one block per entry of ``lower``).
    """

    table_id: str
    title: str
    pde: str
    dim: int
    kind: str
    rows: tuple[tuple[int, int], ...]
    columns: tuple[int, ...]
    lower: tuple[float, ...] = (0.1,)
    omega: float = 1.0
    grid: str = "cell"
    resolution: int | None = None
    row_resolution: dict = field(default_factory=dict)

    def header(self) -> list[str]:
        base = ["p_fine", "p_coarse"]
        if self.kind == "jacobi-opt":
            return base + [f"{name}_nu{nu}" for nu in self.columns for name in ("rho", "omega")]
        if self.kind == "jacobi":
            return base + ["omega", "rho"]
        return base + ["lower"] + [f"k{k}" for k in self.columns]


TABLES: dict[str, TableLayout] = {
    "t1": TableLayout("t1", "1D Laplacian, Jacobi: convergence factor and optimal weight",
                      "laplacian", 1, "jacobi-opt", ROWS_1D, (1, 2, 3)),
    # sampled on the coarse node-aligned grid; see README
    "t2": TableLayout("t2", "1D Laplacian, Chebyshev (lower factor 0.1)",
                      "laplacian", 1, "chebyshev", ROWS_1D, (1, 2, 3, 4), grid="node", resolution=8),
    "t3": TableLayout("t3", "1D Laplacian, Chebyshev (lower factors 0.2 and 0.3)",
                      "laplacian", 1, "chebyshev", ROWS_LOWER, (1, 2, 3, 4), lower=(0.2, 0.3)),
    "t4": TableLayout("t4", "2D Laplacian, Jacobi: convergence factor and optimal weight",
                      "laplacian", 2, "jacobi-opt", ROWS_3D, (1, 2, 3)),
    "t5": TableLayout("t5", "2D Laplacian, Chebyshev (lower factor 0.1)",
                      "laplacian", 2, "chebyshev", ROWS_1D, (1, 2, 3, 4), row_resolution={16: 32}),
    "t6": TableLayout("t6", "2D Laplacian, Chebyshev (lower factors 0.2 and 0.3)",
                      "laplacian", 2, "chebyshev", ROWS_LOWER[:4], (1, 2, 3, 4), lower=(0.2, 0.3)),
    "t7": TableLayout("t7", "3D Laplacian, Jacobi with weight 1",
                      "laplacian", 3, "jacobi", ROWS_3D, (1,)),
    "t8": TableLayout("t8", "3D Laplacian, Chebyshev (lower factor 0.1)",
                      "laplacian", 3, "chebyshev", ROWS_3D, (2, 3, 4)),
    "t9": TableLayout("t9", "3D linear elasticity, Chebyshev (lower factor 0.1)",
                      "elasticity", 3, "chebyshev", ROWS_3D, (1, 2, 3, 4)),
}


def table_weakform(layout: TableLayout, model: ElasticityModel | None = None) -> WeakForm:
    if layout.pde == "elasticity":
        return elasticity_weakform(model or ElasticityModel(), dim=layout.dim)
    return laplacian_weakform(layout.dim)


def compute_table(
    layout: TableLayout,
    resolution: int | None = None,
    threads: int = 1,
    omegas=None,
    max_degree: int | None = None,
    model: ElasticityModel | None = None,
    rows=None,
) -> list[dict]:
    """Compute every row of ``layout``.

    ``resolution`` overrides the layout's resolutions (all rows); 3D rows
    with fine degree above ``max_degree`` (default 4 in 3D) are skipped.
    """
    wf = table_weakform(layout, model)
    if max_degree is None and layout.dim == 3:
        max_degree = DEFAULT_MAX_DEGREE_3D
    if omegas is None:
        omegas = omega_grid(*DEFAULT_OMEGAS)
    selected = [r for r in (rows or layout.rows) if max_degree is None or r[0] <= max_degree]
    skipped = [r for r in layout.rows if r not in selected]
    if skipped:
        log.warning("table %s: skipping rows %s (raise max_degree to include them)", layout.table_id, skipped)
    if layout.dim == 3:
        log.warning("table %s: 3D sweeps are slow; expect minutes per row at resolution 16", layout.table_id)

    out = []
    for pf, pc in selected:
        res = resolution or layout.row_resolution.get(pf, layout.resolution)
        base = TwoGridSpec(wf, pf, pc, Jacobi(1.0), resolution=res, grid=layout.grid)
        log.info("table %s: row %d -> %d", layout.table_id, pf, pc)
        if layout.kind == "jacobi-opt":
            row = {"p_fine": pf, "p_coarse": pc}
            for nu, (w, mu) in zip(layout.columns, optimal_omegas(base, omegas, layout.columns, threads=threads)):
                row[f"rho_nu{nu}"] = mu
                row[f"omega_nu{nu}"] = w
            out.append(row)
        elif layout.kind == "jacobi":
            (res_,) = TwoGridAnalysis(base).sweep([Jacobi(layout.omega)], threads=threads)
            out.append({"p_fine": pf, "p_coarse": pc, "omega": layout.omega, "rho": res_.mu})
        else:
            analysis = TwoGridAnalysis(base)
            smoothers = [Chebyshev(k, lower=lo) for lo in layout.lower for k in layout.columns]
            results = analysis.sweep(smoothers, threads=threads)
            width = len(layout.columns)
            for i, lo in enumerate(layout.lower):
                row = {"p_fine": pf, "p_coarse": pc, "lower": lo}
                for k, r in zip(layout.columns, results[i * width:(i + 1) * width]):
                    row[f"k{k}"] = r.mu
                out.append(row)
    if len(layout.lower) > 1:
        out.sort(key=lambda r: r["lower"])
    return out
