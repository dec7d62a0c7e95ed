import csv
import io
import json
import math
import subprocess
import sys

import pytest

from gaussmetro import cli
from gaussmetro.cli import EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE, UsageError, load_config, main


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_qfi_coherent(tmp_path):
    out = tmp_path / "q.csv"
    assert main(["qfi", "--out", str(out)]) == EXIT_OK
    (row,) = read_csv(out)
    assert float(row["qfi"]) == pytest.approx(4.0, rel=1e-10)
    assert row["method"] == "gaussian_formula"
    echo = json.loads((tmp_path / "q.config.json").read_text())
    assert echo["state"] == "coherent" and echo["eta"] == 1.0


def test_qfi_vacuum_in_squeezed_reservoir(tmp_path):
    out = tmp_path / "v.csv"
    code = main(["qfi", "--out", str(out), "--override", "state=vacuum",
                 "--override", "reservoir.n_sq=10", "--override", "eta=0.9"])
    assert code == EXIT_OK
    assert float(read_csv(out)[0]["qfi"]) > 0


def test_empty_grid_is_usage_error(capsys):
    code = main(["qfi", "--override", 'nbar={"start": 10, "stop": 1, "per_decade": 5}'])
    assert code == EXIT_USAGE
    assert "empty" in capsys.readouterr().err


def test_schema_violation(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"eta": 3}))
    assert main(["qfi", "--config", str(bad)]) == EXIT_USAGE
    bad.write_text("{not json")
    assert main(["qfi", "--config", str(bad)]) == EXIT_USAGE
    assert main(["qfi", "--override", "reservoir.n_sq=-1"]) == EXIT_USAGE


def test_unknown_command():
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 2


def test_config_file_and_override_order(tmp_path):
    cfg_path = tmp_path / "c.json"
    cfg_path.write_text(json.dumps({"eta": 0.5, "nbar": {"values": [2.0]}}))
    cfg = load_config("qfi", str(cfg_path), ["eta=0.25"])
    assert cfg["eta"] == 0.25
    assert cfg["nbar"] == {"values": [2.0]}
    assert cfg["reservoir"]["n_sq"] == 0.0


def test_grid_replaced_not_merged(tmp_path):
    cfg_path = tmp_path / "g.json"
    cfg_path.write_text(json.dumps({"nbar": {"start": 1, "stop": 100, "per_decade": 1}}))
    cfg = load_config("qfi", str(cfg_path))
    assert "values" not in cfg["nbar"]
    assert list(cli.nbar_grid(cfg["nbar"])) == pytest.approx([1, 10, 100])


def test_dict_override_merges():
    cfg = load_config("oracle-check", None, ['oracle={"dim": 6}'])
    assert cfg["oracle"]["dim"] == 6 and cfg["oracle"]["leak_tol"] == 1e-9


def test_override_string_fallback():
    cfg = load_config("qfi", None, ["state=squeezed_vacuum"])
    assert cfg["state"] == "squeezed_vacuum"


def test_csv_format_and_determinism():
    rows = [{"a": 1.0, "b": True, "c": None, "d": "x"}]
    text = cli.format_csv(["a", "b", "c", "d"], rows)
    assert text.splitlines() == ["a,b,c,d", "1.00000000000e+00,true,,x"]
    cfg = load_config("optimize-state", None, ['nbar={"values": [3.0, 1.0]}'])
    first, second = io.StringIO(), io.StringIO()
    cli.run("optimize-state", cfg, stream=first)
    cli.run("optimize-state", cfg, stream=second)
    assert first.getvalue() == second.getvalue()
    lines = first.getvalue().splitlines()
    assert lines[0].startswith("nbar,delta_phi")
    assert float(lines[1].split(",")[0]) == 1.0  # sorted grid


def test_bound_frequency(tmp_path):
    out = tmp_path / "b.csv"
    code = main(["bound", "--out", str(out), "--override", "task=frequency",
                 "--override", 'profile={"gamma": 1.0, "beta": 1}',
                 "--override", 'nbar={"values": [100.0]}', "--override", "reservoir.n_sq=0"])
    assert code == EXIT_OK
    (row,) = read_csv(out)
    assert float(row["var_t_optimal"]) == pytest.approx(2.5e-4, rel=1e-10)


def test_optimize_time_lossless_coherent(tmp_path):
    out = tmp_path / "t.csv"
    code = main(["optimize-time", "--out", str(out), "--override", "state=coherent",
                 "--override", "reservoir.n_sq=0", "--override", 'nbar={"values": [1000.0]}'])
    assert code == EXIT_OK
    (row,) = read_csv(out)
    assert float(row["t_opt"]) == pytest.approx(1.0, rel=1e-2)
    assert float(row["var_t_product"]) == pytest.approx(math.e / 4000, rel=1e-2)


def test_fig2_small_grid(tmp_path):
    out = tmp_path / "f2.csv"
    code = main(["fig2", "--out", str(out), "--override", 'nbar={"values": [1.0, 10.0, 100.0]}'])
    assert code == EXIT_OK
    rows = read_csv(out)
    for r in rows:
        assert float(r["exact_optimal"]) <= float(r["exact_coherent"]) * (1 + 1e-12)
    summary = json.loads((tmp_path / "f2.summary.json").read_text())
    assert {"min_ratio", "argmin_nbar", "vacuum_input_bound"} <= summary.keys()


def test_fig3_small_grid(tmp_path):
    out = tmp_path / "f3.csv"
    code = main(["fig3", "--out", str(out), "--override", 'nbar={"values": [10.0, 100.0]}',
                 "--override", "betas=[0]", "--override", "model=reparametrized"])
    assert code == EXIT_OK
    summary = json.loads((tmp_path / "f3.summary.json").read_text())
    assert summary["coherent_b0"]["asymptote"] == pytest.approx(5.606, abs=1e-3)
    rows = read_csv(out)
    assert all(float(r["ratio_optimal_b0"]) > 1 for r in rows)


def test_cavity_demo(tmp_path):
    out = tmp_path / "cav.csv"
    code = main(["cavity-demo", "--out", str(out), "--override", 'nbar={"values": [100.0]}'])
    assert code == EXIT_OK
    rows = read_csv(out)
    assert len(rows) == 2
    for r in rows:
        assert math.isfinite(float(r["gain"]))
    b0 = [r for r in rows if r["beta"] == "0"][0]
    assert float(b0["var_t_0"]) == pytest.approx(float(b0["lossy_reference"]), rel=1e-2)
    summary = json.loads((tmp_path / "cav.summary.json").read_text())
    assert summary["cavity_gain_formula"] == pytest.approx(summary["beta0"]["gain_asymptote"])


def test_oracle_tiny_dimension(tmp_path):
    out = tmp_path / "oc.csv"
    code = main(["oracle-check", "--out", str(out),
                 "--override", 'oracle={"nbar": [2.0], "n_sq": [2.0], "n_th": [0.0], '
                 '"eta": [0.5], "dim": 6, "max_dim": 6}'])
    assert code == EXIT_TOLERANCE
    rows = read_csv(out)
    assert any(r["error"].startswith("TruncationLeak") for r in rows)
    summary = json.loads((tmp_path / "oc.summary.json").read_text())
    assert summary["truncation_leaks"] >= 1 and not summary["all_passed"]


def test_oracle_max_dim_check():
    with pytest.raises(UsageError):
        cli.cmd_oracle_check(load_config("oracle-check", None,
                                         ['oracle.dim=80', 'oracle.max_dim=40']))


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gaussmetro", "qfi"], capture_output=True,
                         text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "nbar,qfi,method"


def test_oracle_default_grid_passes(tmp_path):
    out = tmp_path / "full.csv"
    assert main(["oracle-check", "--out", str(out)]) == EXIT_OK
    summary = json.loads((tmp_path / "full.summary.json").read_text())
    assert summary["all_passed"] and summary["truncation_leaks"] == 0
    assert summary["max_qfi_dev"] <= 1e-3 and summary["max_moment_dev"] <= 1e-5
    assert summary["no_dissipation_dev"] <= 1e-10
