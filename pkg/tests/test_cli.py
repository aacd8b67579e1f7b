import csv
import io
import json

import numpy as np
import pytest

from pmglfa.cli import AnalysisConfig, ConfigError, main
from reference_values import TABLE_1, TABLE_2


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_config_defaults_and_parsing():
    cfg = AnalysisConfig()
    assert cfg.pde == "laplacian" and cfg.fine_degree == 2 and cfg.coarse_degree == 1
    cfg = AnalysisConfig.parse("""
        # comment line
        pde = elasticity   # trailing comment
        dim = 2
        orders = 1, 3
        macro = none
        lambda_max = auto
    """)
    assert cfg.pde == "elasticity" and cfg.dim == 2 and cfg.orders == (1, 3)
    assert cfg.macro is None and cfg.lambda_max is None
    assert cfg.two_grid_spec().components == 2


@pytest.mark.parametrize("text,key", [
    ("frobnicate = 3", "frobnicate"),
    ("dim = three", "dim"),
    ("pde = navier", "pde"),
    ("grid = hex", "grid"),
    ("components = 3\npde = elasticity\ndim = 2", "components"),
])
def test_bad_config_names_key(text, key):
    with pytest.raises(ConfigError, match=key):
        AnalysisConfig.parse(text)


def test_malformed_config_file_exits_with_diagnostic(capsys, tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("fine_degree = 2\nsmoothr = jacobi\n")
    code, out, err = run(capsys, "symbol", "--config", str(path))
    assert code == 2 and out == ""
    assert "smoothr" in err
    code, _, err = run(capsys, "symbol", "--config", str(tmp_path / "missing.cfg"))
    assert code == 2 and "missing.cfg" in err


def test_symbol_linear_curve_and_row_count(capsys):
    code, out, _ = run(capsys, "symbol", "--set", "fine_degree=1", "--resolution", "32")
    assert code == 0
    data = rows(out)
    assert len(data) == 32
    theta = np.array([float(r["theta1"]) for r in data])
    value = np.array([float(r["value"]) for r in data])
    np.testing.assert_allclose(value, 2 - 2 * np.cos(theta), rtol=1e-5, atol=1e-6)


@pytest.mark.parametrize("pde,dim,p,n", [("laplacian", 2, 3, 1), ("elasticity", 2, 2, 2)])
def test_symbol_row_count(capsys, pde, dim, p, n):
    code, out, _ = run(capsys, "symbol", "--set", f"pde={pde}", "--set", f"dim={dim}",
                       "--set", f"fine_degree={p}", "--resolution", "8")
    assert code == 0
    assert len(rows(out)) == 8**dim * n * p**dim


def test_smoother_spectrum(capsys):
    code, out, _ = run(capsys, "smoother-spectrum", "--set", "fine_degree=1", "--set", "omega=0.5",
                       "--resolution", "16")
    assert code == 0
    data = rows(out)
    assert len(data) == 16
    theta = np.array([float(r["theta1"]) for r in data])
    real = np.array([float(r["real"]) for r in data])
    # weighted Jacobi-preconditioned eigenvalue omega (1 - cos theta)
    np.testing.assert_allclose(real, 0.5 * (1 - np.cos(theta)), rtol=1e-5, atol=1e-6)


def test_two_grid_csv_and_json(capsys):
    code, out, _ = run(capsys, "two-grid", "--set", "omega=0.63")
    assert code == 0
    data = rows(out)
    assert len(data) == 256 and list(data[0]) == ["theta1", "rho"]
    code, out, _ = run(capsys, "two-grid", "--set", "omega=0.63", "--format", "json")
    summary = json.loads(out)
    assert abs(summary["mu"] - 0.137) <= 0.005
    assert summary["excluded"] == 0 and summary["resolution"] == 256


def test_sweep_jacobi_exceeds_one_below_unit_weight(capsys):
    code, out, _ = run(capsys, "sweep", "--set", "fine_degree=4")
    assert code == 0
    data = rows(out)
    omega = np.array([float(r["omega"]) for r in data])
    mu = np.array([float(r["mu"]) for r in data])
    assert len(data) == 91
    assert np.any((mu > 1.0) & (omega < 1.0))


def test_sweep_chebyshev_nonincreasing_in_order(capsys):
    code, out, _ = run(capsys, "sweep", "--set", "smoother=chebyshev", "--set", "fine_degree=4",
                       "--set", "coarse_degree=2", "--set", "orders=1 2 3 4 5 6")
    assert code == 0
    mu = [float(r["mu"]) for r in rows(out)]
    assert [int(r["k"]) for r in rows(out)] == [1, 2, 3, 4, 5, 6]
    assert all(b <= a for a, b in zip(mu, mu[1:]))


def test_sweep_empty_omega_grid_is_error(capsys):
    code, out, err = run(capsys, "sweep", "--set", "omega_start=1.0", "--set", "omega_stop=0.5")
    assert code == 2 and out == "" and "omega" in err


def test_numerical_failure_exit_code(capsys):
    code, _, err = run(capsys, "two-grid", "--set", "cutoff=1e6", "--resolution", "8")
    assert code == 3 and "singular" in err


def test_output_file_and_determinism(capsys, tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (first, second):
        code, out, _ = run(capsys, "sweep", "--set", "smoother=chebyshev", "--output", str(path), "--threads", "2")
        assert code == 0 and out == ""
    assert first.read_bytes() == second.read_bytes()
    json_a = run(capsys, "validate", "--set", "elements=8")[1]
    json_b = run(capsys, "validate", "--set", "elements=8")[1]
    assert json_a == json_b


def test_table_t1(capsys):
    code, out, _ = run(capsys, "table", "t1")
    assert code == 0
    first = rows(out)[0]
    rho, omega = TABLE_1[(2, 1)][0]
    assert (first["p_fine"], first["p_coarse"]) == ("2", "1")
    assert abs(float(first["rho_nu1"]) - rho) <= 0.005
    assert abs(float(first["omega_nu1"]) - omega) <= 0.01 + 1e-9


def test_table_t2(capsys):
    code, out, _ = run(capsys, "table", "t2")
    assert code == 0
    first = rows(out)[0]
    for k, expected in zip((1, 2, 3, 4), TABLE_2[(2, 1)]):
        assert abs(float(first[f"k{k}"]) - expected) <= 0.005


def test_table_unknown_id(capsys):
    code, _, err = run(capsys, "table", "t42")
    assert code == 2 and "t42" in err


def test_validate_report(capsys):
    code, out, _ = run(capsys, "validate", "--set", "fine_degree=4", "--set", "coarse_degree=2",
                       "--set", "omega=0.62")
    assert code == 0
    report = json.loads(out)
    for key in ("config", "lfa_factor", "measured_factor", "N", "iterations"):
        assert key in report
    assert report["N"] == 32 and report["agrees"]
    assert report["config"]["fine_degree"] == 4


def test_validate_over_cap_names_cap(capsys):
    code, _, err = run(capsys, "validate", "--set", "dim=2", "--set", "elements=200")
    assert code == 2 and "20000" in err
