import csv
import json
import math

import numpy as np
import pytest

from cli.main import EXIT_COMPUTE, EXIT_INVALID, EXIT_OK, EXIT_ORACLE, build_parser, main, run
from schemas.errors import ConvergenceError
from simharness import execute_experiment
from spectra import write_csv_matrix


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def read_rows(path):
    with path.open(newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_parser_requires_config():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["calibrate"])


def test_calibrate_writes_report_and_manifest(tmp_path, capsys):
    config = write_config(tmp_path, {"p": 200, "n": 600})
    out = tmp_path / "out"
    code, result = run(["calibrate", "--config", config, "--out", str(out)])
    assert code == EXIT_OK
    report = read_json(out / "calibration.json")
    w = report["calibrations"]["H0"]["W"]
    assert w["center"] == 200.0
    assert w["sigma"] == pytest.approx(math.sqrt(2.0 / 3.0))
    assert report["calibrations"]["H1"] is None
    manifest = read_json(out / "manifest.json")
    assert manifest["status"] == "ok"
    assert manifest["artifacts"] == {"calibration": "calibration.json"}
    assert manifest["run_id"] == result.summary["run_id"]
    printed = json.loads(capsys.readouterr().out)
    assert printed["exit_code"] == 0


def test_calibrate_without_spikes_matches_the_null(tmp_path):
    config = write_config(tmp_path, {"p": 200, "n": 600, "spikes": []})
    out = tmp_path / "out"
    code, result = run(["calibrate", "--config", config, "--out", str(out)])
    assert code == EXIT_OK
    report = read_json(out / "calibration.json")
    assert report["spikes"]["groups"] == []
    h0, h1 = report["calibrations"]["H0"], report["calibrations"]["H1"]
    assert sorted(h1) == ["U", "V", "W"]
    for kind, alt in h1.items():
        assert alt["hypothesis"] == "H1"
        assert {k: v for k, v in alt.items() if k != "hypothesis"} == {k: v for k, v in h0[kind].items() if k != "hypothesis"}
    assert result.summary["ratios"]["M"] == 0


def test_calibrate_with_model(tmp_path):
    config = write_config(tmp_path, {"p": 200, "n": 600, "model": "M2", "tests": ["W", "R"]})
    out = tmp_path / "out"
    code, result = run(["calibrate", "--config", config, "--out", str(out)])
    assert code == EXIT_OK
    report = result.summary
    assert report["ratios"]["M"] == 2
    assert [t["alpha"] for t in report["spike_terms"]] == [601.0, 481.0]
    assert sorted(report["calibrations"]["H0"]) == ["R", "W"]
    assert sorted(report["calibrations"]["H1"]) == ["W"]


def test_run_id_ignores_threads(tmp_path):
    config = write_config(tmp_path, {"p": 50, "n": 200})
    _, one = run(["calibrate", "--config", config, "--out", str(tmp_path / "a")])
    _, many = run(["calibrate", "--config", config, "--out", str(tmp_path / "b"), "--threads", "3"])
    assert one.summary["run_id"] == many.summary["run_id"]
    _, reseeded = run(["calibrate", "--config", config, "--out", str(tmp_path / "c"), "--seed", "9"])
    assert reseeded.summary["run_id"] != one.summary["run_id"]


def test_p_not_below_n_is_invalid(tmp_path, capsys):
    config = write_config(tmp_path, {"p": 10, "n": 10})
    code, result = run(["calibrate", "--config", config, "--out", str(tmp_path / "out")])
    assert code == EXIT_INVALID
    assert result is None
    assert "validation error: p:" in capsys.readouterr().err


def test_missing_config_is_invalid(tmp_path, capsys):
    code, _ = run(["power", "--config", str(tmp_path / "absent.json")])
    assert code == EXIT_INVALID
    assert "cannot read" in capsys.readouterr().err


def test_malformed_config_names_the_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "p": 10,\n}\n', encoding="utf-8")
    code, _ = run(["calibrate", "--config", str(path)])
    assert code == EXIT_INVALID
    assert "line 3" in capsys.readouterr().err


def test_main_exits_with_code(tmp_path):
    config = write_config(tmp_path, {"p": 10, "n": 5})
    with pytest.raises(SystemExit) as exc:
        main(["calibrate", "--config", config])
    assert exc.value.code == EXIT_INVALID


def test_power_curve(tmp_path):
    config = write_config(tmp_path, {"p": 200, "n": 600, "alphas": [5, 20, 601]})
    out = tmp_path / "out"
    code, result = run(["power", "--config", config, "--out", str(out)])
    assert code == EXIT_OK
    rows = read_rows(out / "power.csv")
    assert rows[0] == ["alpha", "power_U", "power_W", "power_V", "power_R", "kappa_U", "kappa_W", "kappa_V", "kappa_R"]
    assert len(rows) == 5
    null = rows[1]
    assert null[0] == ""
    for value in null[1:5]:
        assert float(value) == pytest.approx(0.05)
    large = rows[-1]
    assert float(large[0]) == 601.0
    assert float(large[2]) >= 0.99
    assert result.summary["points"][1]["ordering"] == ["V", "U", "W", "R"]


def test_power_two_spikes(tmp_path):
    config = write_config(tmp_path, {"p": 200, "n": 600, "alphas": [100], "second_spike_ratio": 0.8, "include_null": False})
    code, result = run(["power", "--config", config, "--out", str(tmp_path / "out")])
    assert code == EXIT_OK
    point = result.summary["points"][0]
    assert point["spikes"]["groups"] == [{"alpha": 100.0, "d": 1}, {"alpha": 80.0, "d": 1}]


def test_power_rejects_subcritical_alpha(tmp_path, capsys):
    config = write_config(tmp_path, {"p": 200, "n": 600, "alphas": [1.2, 5]})
    code, _ = run(["power", "--config", config, "--out", str(tmp_path / "out")])
    assert code == EXIT_INVALID
    assert "alphas[0]" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_decides_a_data_file(tmp_path):
    rng = np.random.default_rng(12)
    write_csv_matrix(tmp_path / "y.csv", rng.standard_normal((10, 50)))
    config = write_config(tmp_path, {"data": "y.csv", "p": 10, "n": 50})
    out = tmp_path / "out"
    code, result = run(["test", "--config", config, "--out", str(out)])
    assert code == EXIT_OK
    report = read_json(out / "test.json")
    assert sorted(report["tests"]) == ["R", "U", "V", "W"]
    for entry in report["tests"].values():
        assert 0.0 <= entry["p_value"] <= 1.0
    rows = read_rows(out / "test.csv")
    assert rows[0] == ["kind", "raw", "z", "p_value", "reject", "level"]
    assert [r[0] for r in rows[1:]] == ["U", "W", "V", "R"]
    assert result.summary["ratios"]["p"] == 10


def test_spiked_data_is_rejected_and_estimated(tmp_path):
    rng = np.random.default_rng(13)
    y = rng.standard_normal((20, 400))
    y[0] *= math.sqrt(30.0)
    write_csv_matrix(tmp_path / "y.csv", y)
    config = write_config(tmp_path, {"data": "y.csv", "tests": ["W", "R"]})
    code, result = run(["test", "--config", config, "--out", str(tmp_path / "out")])
    assert code == EXIT_OK
    assert result.summary["tests"]["R"]["reject"]
    assert result.summary["tests"]["W"]["reject"]
    assert result.summary["spike_estimate"] == pytest.approx(30.0, rel=0.5)


def test_declared_shape_must_match(tmp_path, capsys):
    write_csv_matrix(tmp_path / "y.csv", np.ones((3, 8)) + np.eye(3, 8))
    config = write_config(tmp_path, {"data": "y.csv", "p": 4, "n": 8})
    code, _ = run(["test", "--config", config, "--out", str(tmp_path / "out")])
    assert code == EXIT_INVALID
    assert "p: declared 4" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


@pytest.mark.parametrize("declared", ["ten", 3.5, 0])
def test_declared_shape_must_be_a_positive_integer(tmp_path, capsys, declared):
    write_csv_matrix(tmp_path / "y.csv", np.ones((3, 8)) + np.eye(3, 8))
    config = write_config(tmp_path, {"data": "y.csv", "p": declared})
    code, _ = run(["test", "--config", config, "--out", str(tmp_path / "out")])
    assert code == EXIT_INVALID
    assert "validation error: p:" in capsys.readouterr().err


def test_missing_data_key(tmp_path, capsys):
    config = write_config(tmp_path, {"p": 4, "n": 8})
    code, _ = run(["test", "--config", config, "--out", str(tmp_path / "out")])
    assert code == EXIT_INVALID
    assert "data" in capsys.readouterr().err


SMALL_SIM = {"p": 10, "n": 40, "reps": 30, "seed": 2, "model": "M1"}


@pytest.mark.parametrize("threads", [1, 4, 8])
def test_simulate_is_thread_independent(tmp_path, threads):
    config = write_config(tmp_path, SMALL_SIM)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["simulate", "--config", config, "--out", str(a), "--threads", "1"])[0] == EXIT_OK
    assert run(["simulate", "--config", config, "--out", str(b), "--threads", str(threads)])[0] == EXIT_OK
    for name in ("summary.json", "qq.csv", "histogram.csv", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    summary = read_json(a / "summary.json")
    assert summary["hypothesis"] == "H1"
    assert "threads" not in summary["config"]


def test_simulate_single_replication(tmp_path):
    config = write_config(tmp_path, {"p": 5, "n": 20, "reps": 1})
    out = tmp_path / "out"
    code, _ = run(["simulate", "--config", config, "--out", str(out)])
    assert code == EXIT_OK
    assert read_json(out / "summary.json")["config"]["reps"] == 1


def test_simulate_cells(tmp_path):
    doc = {"p": 10, "n": 40, "reps": 20, "seed": 1, "cells": [{"dist": "gaussian"}, {"model": "custom", "alphas": [20], "dist": "gamma_shifted"}]}
    out = tmp_path / "out"
    code, result = run(["simulate", "--config", write_config(tmp_path, doc), "--out", str(out)])
    assert code == EXIT_OK
    index = read_json(out / "index.json")
    assert [c["cell"] for c in index["cells"]] == ["cell00_H0_gaussian", "cell01_custom_gamma_shifted"]
    assert (out / "cell01_custom_gamma_shifted" / "summary.json").exists()
    assert result.summary["run_id"] == read_json(out / "manifest.json")["run_id"]


def test_simulate_cell_errors_name_the_cell(tmp_path, capsys):
    doc = {"p": 10, "n": 40, "reps": 20, "cells": [{"dist": "gaussian"}, {"model": "M9"}]}
    code, _ = run(["simulate", "--config", write_config(tmp_path, doc), "--out", str(tmp_path / "out")])
    assert code == EXIT_INVALID
    assert "cells[1].model" in capsys.readouterr().err


def test_oracle_check_passes(tmp_path):
    doc = {"c_grid": [0.3], "quantities": ["ct", "v_center", "I2_U", "extra_W", "extra_V"]}
    out = tmp_path / "out"
    code, result = run(["oracle-check", "--config", write_config(tmp_path, doc), "--out", str(out)])
    assert code == EXIT_OK
    assert result.summary["passed"] is True
    assert len(result.summary["checks"]) == 5
    assert read_json(out / "manifest.json")["status"] == "pass"
    assert len(read_rows(out / "oracle_check.csv")) == 6


def test_oracle_check_flags_a_broken_closed_form(tmp_path, monkeypatch):
    monkeypatch.setattr("cli.commands.ct_value", lambda c: 0.0)
    doc = {"c_grid": [0.3], "quantities": ["ct"]}
    out = tmp_path / "out"
    code, result = run(["oracle-check", "--config", write_config(tmp_path, doc), "--out", str(out)])
    assert code == EXIT_ORACLE
    assert result.summary["failures"]
    assert read_json(out / "manifest.json")["status"] == "fail"


def test_oracle_check_rejects_unknown_quantity(tmp_path, capsys):
    doc = {"quantities": ["ct", "kurtosis"]}
    code, _ = run(["oracle-check", "--config", write_config(tmp_path, doc), "--out", str(tmp_path / "out")])
    assert code == EXIT_INVALID
    assert "quantities[1]" in capsys.readouterr().err


def test_series_failure_is_a_computational_error(tmp_path, capsys):
    doc = {"p": 200, "n": 600, "series": {"tol": 1e-14, "k_max": 2}}
    code, _ = run(["calibrate", "--config", write_config(tmp_path, doc), "--out", str(tmp_path / "out")])
    assert code == EXIT_COMPUTE
    assert "computational error" in capsys.readouterr().err


def test_failed_run_leaves_an_error_manifest(tmp_path, monkeypatch, capsys):
    calls = []

    def flaky(config):
        calls.append(config)
        if len(calls) == 2:
            raise ConvergenceError("series did not converge")
        return execute_experiment(config)

    monkeypatch.setattr("cli.commands.execute_experiment", flaky)
    doc = {"p": 10, "n": 40, "reps": 5, "seed": 1, "cells": [{"dist": "gaussian"}, {"dist": "gamma_shifted"}]}
    out = tmp_path / "out"
    code, result = run(["simulate", "--config", write_config(tmp_path, doc), "--out", str(out)])
    assert code == EXIT_COMPUTE
    assert result is None
    manifest = read_json(out / "manifest.json")
    assert manifest["status"] == "error"
    assert manifest["artifacts"] == {}
    assert manifest["diagnostics"] == ["series did not converge"]
    assert (out / "cell00_H0_gaussian" / "summary.json").exists()
    assert "computational error" in capsys.readouterr().err


def test_failure_before_any_artifact_writes_nothing(tmp_path):
    doc = {"p": 200, "n": 600, "series": {"tol": 1e-14, "k_max": 2}}
    out = tmp_path / "out"
    assert run(["calibrate", "--config", write_config(tmp_path, doc), "--out", str(out)])[0] == EXIT_COMPUTE
    assert not out.exists()
