"""Command-line interface: symbols, smoother spectra, two-grid factors, sweeps, tables and oracle checks."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .oracle import OracleSizeError, comparison_report
from .smoother import Chebyshev, Jacobi, SmootherSpec, smoother_spectrum_sweep
from .symbol import localization, operator_symbol
from .tables import TABLES, compute_table
from .transfer import macro_element_operator
from .twogrid import (
    AllFrequenciesExcluded,
    GRID_KINDS,
    TwoGridAnalysis,
    TwoGridSpec,
    omega_grid,
    theta_grid,
)
from .weakform import ElasticityModel, WeakForm, assemble_element, elasticity_weakform, laplacian_weakform

log = logging.getLogger("pmglfa")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(",", " ").split())


def _optional(conv):
    def parse(text: str):
        return None if text.strip().lower() in ("", "none", "auto") else conv(text)

    return parse


@dataclass
class AnalysisConfig:
    """Settings shared by all subcommands; every field has a default.

    Read from a flat ``key = value`` file; ``#`` starts a comment.
    """

    pde: str = "laplacian"
    dim: int = 1
    components: int | None = None
    young: float = 1.0
    poisson: float = 0.3
    fine_degree: int = 2
    coarse_degree: int | None = 1
    macro: int | None = None
    smoother: str = "jacobi"
    omega: float = 1.0
    passes: int = 1
    order: int = 1
    lower: float = 0.1
    upper: float = 1.0
    lambda_max: float | None = None
    resolution: int | None = None
    grid: str = "cell"
    cutoff: float = 1e-10
    omega_start: float = 0.3
    omega_stop: float = 1.2
    omega_step: float = 0.01
    orders: tuple[int, ...] = (1, 2, 3, 4)
    table: str = "t1"
    max_degree: int | None = None
    elements: int = 32
    iterations: int = 60
    trials: int = 3
    seed: int = 0

    # -- construction -----------------------------------------------------

    @classmethod
    def parse(cls, text: str) -> "AnalysisConfig":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
        return cls.from_strings(values)

    @classmethod
    def from_strings(cls, values: dict[str, str]) -> "AnalysisConfig":
        cfg = cls()
        cfg.update(values)
        return cfg

    def update(self, values: dict[str, str]) -> None:
        known = {f.name for f in fields(self)}
        for key, text in values.items():
            name = key.replace("-", "_")
            if name not in known:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                setattr(self, name, _CONVERTERS[name](text))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key!r}: {text!r} ({exc})") from None
        self.validate()

    def validate(self) -> None:
        if self.pde not in ("laplacian", "elasticity"):
            raise ConfigError(f"bad value for 'pde': {self.pde!r} (laplacian or elasticity)")
        if self.dim not in (1, 2, 3):
            raise ConfigError(f"bad value for 'dim': {self.dim} (1, 2 or 3)")
        expected = 1 if self.pde == "laplacian" else self.dim
        if self.components is not None and self.components != expected:
            raise ConfigError(f"bad value for 'components': {self.pde} in {self.dim}D has {expected}")
        if self.smoother not in ("jacobi", "chebyshev"):
            raise ConfigError(f"bad value for 'smoother': {self.smoother!r} (jacobi or chebyshev)")
        if self.grid not in GRID_KINDS:
            raise ConfigError(f"bad value for 'grid': {self.grid!r} (one of {GRID_KINDS})")
        if self.table not in TABLES:
            raise ConfigError(f"bad value for 'table': {self.table!r} (one of {sorted(TABLES)})")
        if self.fine_degree < 1:
            raise ConfigError(f"bad value for 'fine_degree': {self.fine_degree}")

    # -- derived objects --------------------------------------------------

    def weakform(self) -> WeakForm:
        try:
            if self.pde == "elasticity":
                return elasticity_weakform(ElasticityModel(self.young, self.poisson), dim=self.dim)
            return laplacian_weakform(self.dim)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def smoother_spec(self) -> SmootherSpec:
        try:
            if self.smoother == "jacobi":
                return Jacobi(self.omega, self.passes)
            return Chebyshev(self.order, self.passes, self.lower, self.upper, self.lambda_max)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def two_grid_spec(self) -> TwoGridSpec:
        coarse = None if self.macro is not None else self.coarse_degree
        try:
            return TwoGridSpec(
                self.weakform(), self.fine_degree, coarse, self.smoother_spec(), macro=self.macro,
                resolution=self.resolution, cutoff=self.cutoff, grid=self.grid,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


_CONVERTERS = {
    "pde": str.lower,
    "dim": int,
    "components": _optional(int),
    "young": float,
    "poisson": float,
    "fine_degree": int,
    "coarse_degree": _optional(int),
    "macro": _optional(int),
    "smoother": str.lower,
    "omega": float,
    "passes": int,
    "order": int,
    "lower": float,
    "upper": float,
    "lambda_max": _optional(float),
    "resolution": _optional(int),
    "grid": str.lower,
    "cutoff": float,
    "omega_start": float,
    "omega_stop": float,
    "omega_step": float,
    "orders": _int_list,
    "table": str.lower,
    "max_degree": _optional(int),
    "elements": int,
    "iterations": int,
    "trials": int,
    "seed": int,
}


# -- output -----------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    return str(value)


def to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _records_output(records: list[dict], header: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        return to_json(records)
    return to_csv(header, [[r[h] for h in header] for r in records])


def _theta_names(dim: int) -> list[str]:
    return [f"theta{i + 1}" for i in range(dim)]


# -- commands -----------------------------------------------------------------


def _grid(cfg: AnalysisConfig, spec: TwoGridSpec) -> np.ndarray:
    return theta_grid(spec.dim, spec.grid_resolution, cfg.grid)


def cmd_symbol(cfg: AnalysisConfig, fmt: str, threads: int) -> str:
    """Eigenvalues of the fine operator symbol over the frequency grid."""
    spec = cfg.two_grid_spec()
    wf = spec.weakform
    if cfg.macro is None:
        ae = assemble_element(wf, cfg.fine_degree)
    else:
        ae = macro_element_operator(wf, cfg.fine_degree, cfg.macro)
    sym = operator_symbol(ae, localization(ae.degree, wf.dim, wf.components))
    thetas = _grid(cfg, spec)
    eigs = np.linalg.eigvalsh(sym(thetas))
    records = [
        {**dict(zip(_theta_names(wf.dim), t)), "index": i, "value": v}
        for t, row in zip(thetas, eigs) for i, v in enumerate(row)
    ]
    return _records_output(records, _theta_names(wf.dim) + ["index", "value"], fmt)


def cmd_smoother_spectrum(cfg: AnalysisConfig, fmt: str, threads: int) -> str:
    """Eigenvalues of the smoother's preconditioned operator symbol."""
    spec = cfg.two_grid_spec()
    analysis = TwoGridAnalysis(spec)
    sm = spec.smoother
    if isinstance(sm, Chebyshev) and sm.lambda_max is None:
        sm = Chebyshev(sm.order, sm.passes, sm.lower, sm.upper, analysis.lambda_max)
    thetas = _grid(cfg, spec)
    eigs = smoother_spectrum_sweep(analysis.fine, sm, thetas)
    names = _theta_names(spec.dim)
    records = [
        {**dict(zip(names, t)), "index": i, "real": v.real, "imag": v.imag}
        for t, row in zip(thetas, eigs) for i, v in enumerate(row)
    ]
    return _records_output(records, names + ["index", "real", "imag"], fmt)


def cmd_two_grid(cfg: AnalysisConfig, fmt: str, threads: int) -> str:
    """Per-frequency two-grid spectral radii (CSV) or their summary (JSON)."""
    spec = cfg.two_grid_spec()
    (result,) = TwoGridAnalysis(spec).sweep([spec.smoother], threads=threads)
    if fmt == "json":
        return to_json({**result.summary(), "resolution": spec.grid_resolution, "grid": spec.grid})
    names = _theta_names(spec.dim)
    return to_csv(names + ["rho"], [list(t) + [r] for t, r in zip(result.thetas, result.radii)])


def cmd_sweep(cfg: AnalysisConfig, fmt: str, threads: int) -> str:
    """Convergence factor against the Jacobi weight or the Chebyshev order."""
    spec = cfg.two_grid_spec()
    base = spec.smoother
    if isinstance(base, Jacobi):
        try:
            values = omega_grid(cfg.omega_start, cfg.omega_stop, cfg.omega_step)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        smoothers = [Jacobi(float(w), base.passes) for w in values]
        key = "omega"
    else:
        if not cfg.orders:
            raise ConfigError("bad value for 'orders': empty list")
        values = list(cfg.orders)
        smoothers = [Chebyshev(k, base.passes, base.lower, base.upper, base.lambda_max) for k in values]
        key = "k"
    results = TwoGridAnalysis(spec).sweep(smoothers, threads=threads)
    records = [{key: v, "mu": r.mu} for v, r in zip(values, results)]
    return _records_output(records, [key, "mu"], fmt)


def cmd_table(cfg: AnalysisConfig, fmt: str, threads: int) -> str:
    """One of the standard convergence-factor tables."""
    layout = TABLES[cfg.table]
    try:
        omegas = omega_grid(cfg.omega_start, cfg.omega_stop, cfg.omega_step)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    model = ElasticityModel(cfg.young, cfg.poisson) if layout.pde == "elasticity" else None
    records = compute_table(layout, cfg.resolution, threads, omegas, cfg.max_degree, model)
    return _records_output(records, layout.header(), fmt)


def cmd_validate(cfg: AnalysisConfig, fmt: str, threads: int) -> str:
    """Compare the LFA factor with the periodic-grid oracle."""
    spec = cfg.two_grid_spec()
    config = asdict(cfg)
    try:
        report = comparison_report(spec, config, cfg.elements, cfg.iterations, cfg.trials, cfg.seed)
    except OracleSizeError as exc:
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if fmt == "csv":
        keys = ["lfa_factor", "measured_factor", "N", "iterations", "tolerance", "agrees"]
        return to_csv(keys, [[report[k] for k in keys]])
    return to_json(report)


COMMANDS = {
    "symbol": cmd_symbol,
    "smoother-spectrum": cmd_smoother_spectrum,
    "two-grid": cmd_two_grid,
    "sweep": cmd_sweep,
    "table": cmd_table,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmglfa", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=func.__doc__)
        p.add_argument("--config", metavar="PATH", help="key = value config file")
        p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                       help="override one config key (repeatable)")
        p.add_argument("--output", metavar="PATH", help="write here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default="json" if name == "validate" else "csv")
        p.add_argument("--resolution", type=int, help="frequency samples per dimension")
        p.add_argument("--threads", type=int, default=1, help="worker threads for frequency sweeps")
        if name == "table":
            p.add_argument("table_id", nargs="?", help="table id, t1 .. t9")
    return parser


def load_config(args) -> AnalysisConfig:
    cfg = AnalysisConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = AnalysisConfig.parse(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc.strerror}") from None
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if getattr(args, "table_id", None):
        overrides["table"] = args.table_id
    if args.resolution is not None:
        overrides["resolution"] = str(args.resolution)
    cfg.update(overrides)
    if cfg.resolution is not None and cfg.resolution < 8:
        raise ConfigError(f"bad value for 'resolution': {cfg.resolution} (must be >= 8)")
    if args.threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {args.threads}")
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args)
        text = COMMANDS[args.command](cfg, args.format, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AllFrequenciesExcluded, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
