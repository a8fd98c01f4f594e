import csv
import io
import json
import subprocess
import sys

import pytest

from localqfi.harness.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main
from localqfi.harness.sweep import CSV_COLUMNS


@pytest.fixture
def files(tmp_path):
    model = tmp_path / "chain6.json"
    model.write_text(json.dumps({"schema_version": 1, "lattice": {"type": "chain", "n": 6, "h": 0.5}}))
    small = tmp_path / "pair.json"
    small.write_text(json.dumps({"schema_version": 1, "lattice": {"type": "chain", "n": 2, "h": 0.5}}))
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({"schema_version": 1, "model": "chain6.json",
                               "subsystems": {"centered": [2, 4]}, "betaJ": [0.05, 0.1], "seed": 3}))
    return {"model": str(model), "small": str(small), "config": str(cfg), "dir": tmp_path}


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_qfi_json(files, capsys):
    code, out, _ = run(["qfi", "--model", files["model"], "--beta", "0.1", "--subsystem", "2..3"], capsys)
    assert code == EXIT_OK
    row = json.loads(out)
    assert row["size_A"] == 2 and row["F"] > 0 and row["precision"] == pytest.approx(1 / row["F"])


def test_qfi_csv_to_file(files, capsys):
    out_path = files["dir"] / "q.csv"
    code, out, _ = run(["qfi", "--model", files["model"], "--beta", "0.1", "--format", "csv",
                        "--out", str(out_path)], capsys)
    assert code == EXIT_OK and out == ""
    (row,) = csv.DictReader(io.StringIO(out_path.read_text()))
    assert float(row["F"]) == pytest.approx(float(row["var_HA"]), rel=1e-8)


def test_bound_ok_and_csv(files, capsys):
    code, out, _ = run(["bound", "--model", files["model"], "--beta", "0.08", "--subsystem", "1..4",
                        "--format", "csv"], capsys)
    assert code == EXIT_OK
    reader = csv.DictReader(io.StringIO(out))
    assert tuple(reader.fieldnames) == CSV_COLUMNS
    (row,) = reader
    assert row["satisfied"] == "true"


def test_bound_xi_domain_is_numerical_failure(files, capsys):
    code, out, _ = run(["bound", "--model", files["model"], "--beta", "2.0"], capsys)
    assert code == EXIT_NUMERICAL
    assert json.loads(out)["error_code"] == "xi_domain"


def test_bound_fixed_R_and_constant_xi(files, capsys):
    code, out, _ = run(["bound", "--model", files["model"], "--beta", "0.1", "--subsystem", "2,3",
                        "--xi", "0.4", "--R", "3"], capsys)
    assert code == EXIT_OK
    row = json.loads(out)
    assert row["R_star"] == 3 and row["xi"] == 0.4 and row["xi_mode"] == "constant"


def test_bound_with_fitted_xi(files, capsys):
    code, out, _ = run(["bound", "--model", files["model"], "--beta", "0.1", "--xi", "fit"], capsys)
    assert code == EXIT_OK and json.loads(out)["xi_mode"] == "fit"


def test_sweep_stdout_and_file(files, capsys):
    code, out, _ = run(["sweep", "--config", files["config"]], capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4 and all(r["satisfied"] == "true" for r in rows)
    path = files["dir"] / "s.json"
    code, _, _ = run(["sweep", "--config", files["config"], "--format", "json", "--out", str(path)], capsys)
    assert code == EXIT_OK and len(json.loads(path.read_text())["rows"]) == 4


def test_verify_pass_and_violation(files, capsys):
    code, out, _ = run(["verify", "--config", files["config"]], capsys)
    assert code == EXIT_OK and json.loads(out)["ok"]
    # an absurdly short correlation length breaks the clustering bound
    code, out, _ = run(["verify", "--config", files["config"], "--xi", "0.05", "--format", "csv"], capsys)
    assert code == EXIT_VIOLATION
    assert ",fail" in out


def test_fit_xi_commands(files, capsys):
    code, out, _ = run(["fit-xi", "--model", files["model"], "--beta", "0.1"], capsys)
    assert code == EXIT_OK and json.loads(out)["xi_fit"] > 0
    code, _, err = run(["fit-xi", "--model", files["small"], "--beta", "0.1"], capsys)
    assert code == EXIT_NUMERICAL and "rejected" in err


def test_config_errors(files, capsys):
    code, _, err = run(["qfi", "--model", str(files["dir"] / "missing.json"), "--beta", "0.1"], capsys)
    assert code == EXIT_USAGE and "configuration error" in err
    bad = files["dir"] / "bad.json"
    bad.write_text("{not json")
    assert run(["sweep", "--config", str(bad)], capsys)[0] == EXIT_USAGE
    code, _, _ = run(["qfi", "--model", files["model"], "--beta", "0.1", "--subsystem", "4..9"], capsys)
    assert code == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    [],
    ["qfi", "--beta", "0.1"],
    ["bound", "--model", "m.json", "--beta", "0.1", "--xi", "-2"],
    ["bound", "--model", "m.json", "--beta", "0.1", "--format", "xml"],
    ["dance"],
])
def test_usage_errors_exit_one(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == EXIT_USAGE


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "localqfi", "qfi", "--model", files["small"], "--beta", "0.2"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["size_A"] == 2
