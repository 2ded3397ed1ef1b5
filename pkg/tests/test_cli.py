import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from energy_cp import cli
from energy_cp.report import read_report
from energy_cp.signal import GeneratorSpec, generate, save_signal
from energy_cp.spectrum import EigenConvergenceError

FAST = ["--replicates", "99", "--grid", "200"]


@pytest.fixture
def shifted_csv(tmp_path):
    path = tmp_path / "signal.csv"
    save_signal(generate(GeneratorSpec("mean-shift", 120, 0.5, 3.0, seed=2)), path)
    return path


def read_column(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "index"
    return np.array([float(r[1]) for r in rows[1:]])


@pytest.mark.parametrize("method", ["asymptotic", "permutation", "long"])
def test_detect_methods(tmp_path, shifted_csv, method):
    out = tmp_path / "report.json"
    code = cli.main(["detect", "--input", str(shifted_csv), "--method", method, "--seed", "4",
                     "--output", str(out), *FAST])
    assert code == 0
    report = read_report(out)
    assert report.method == method
    assert report.reject and abs(report.k_star - 60) <= 3
    assert report.seed == 4 and report.replicates == 99


def test_detect_stdout_and_dumps(tmp_path, shifted_csv, capsys):
    spec_path, sups_path = tmp_path / "spec.csv", tmp_path / "sups.csv"
    code = cli.main(["detect", "--input", str(shifted_csv), "--eigen", "15", "--beta", "1.5",
                     "--dump-spectrum", str(spec_path), "--dump-sups", str(sups_path), *FAST])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["eigenvaluesUsed"] == 15 and payload["beta"] == 1.5
    eig = read_column(spec_path)
    assert eig.size == 15 and np.all(np.abs(eig[:-1]) >= np.abs(eig[1:]))
    sups = read_column(sups_path)
    assert sups.size == 99 and np.all(sups >= 0)
    assert payload["pValue"] == np.mean(sups >= payload["tStar"])


def test_detect_header_and_max_n(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("a,b\n" + "\n".join(f"{i % 3},{i}" for i in range(30)) + "\n")
    assert cli.main(["detect", "--input", str(path), "--header", *FAST,
                     "--output", str(tmp_path / "r.json")]) == 0
    assert read_report(tmp_path / "r.json").d == 2
    assert cli.main(["detect", "--input", str(path), "--header", "--max-n", "20", *FAST]) == 2


def test_deterministic_reports(tmp_path, shifted_csv):
    outs = []
    for name in ("a.json", "b.json"):
        cli.main(["detect", "--input", str(shifted_csv), "--seed", "123", "--output",
                  str(tmp_path / name), *FAST])
        data = json.loads((tmp_path / name).read_text())
        data.pop("elapsedMillis")
        outs.append(data)
    assert outs[0] == outs[1]


@pytest.mark.parametrize("extra", [
    ["--beta", "2.0"],
    ["--alpha", "1.5"],
    ["--seed", "-1"],
    ["--replicates", "0"],
    ["--method", "magic"],
    ["--beta", "abc"],
    ["--method", "permutation", "--dump-spectrum", "x.csv"],
])
def test_invalid_configuration_exits_2(shifted_csv, extra, capsys):
    with pytest.raises(SystemExit) as info:
        raise SystemExit(cli.main(["detect", "--input", str(shifted_csv), *extra]))
    assert info.value.code == 2
    assert capsys.readouterr().err


def test_bad_input_exits_2(tmp_path, capsys):
    assert cli.main(["detect", "--input", str(tmp_path / "missing.csv")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0\n2.0\nfoo\n")
    assert cli.main(["detect", "--input", str(bad)]) == 2
    assert "row 3" in capsys.readouterr().err
    short = tmp_path / "short.csv"
    short.write_text("1\n2\n3\n")
    assert cli.main(["detect", "--input", str(short)]) == 2
    assert cli.main(["detect", "--input", str(bad), "--output",
                     str(tmp_path / "no" / "dir" / "r.json")]) == 2


def test_numerical_failure_exits_3(shifted_csv, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise EigenConvergenceError("Lanczos did not converge")
    monkeypatch.setattr(cli, "asymptotic_test", boom)
    assert cli.main(["detect", "--input", str(shifted_csv)]) == 3
    assert "numerical" in capsys.readouterr().err


def test_bench(tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"kind": "mean-shift", "n": [40], "parameters": [0.0, 2.0],
                                "trials": 4, "methods": ["asymptotic", "permutation"],
                                "eigen": 10, "replicates": 49, "gridPoints": 200}))
    out = tmp_path / "results.csv"
    assert cli.main(["bench", "--grid", str(grid), "--output", str(out), "--seed", "8"]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert [(r["parameter"], r["method"]) for r in rows] == [
        ("0.0", "asymptotic"), ("0.0", "permutation"),
        ("2.0", "asymptotic"), ("2.0", "permutation")]
    assert all(r["changePoint"] == "20" for r in rows)


def test_bench_bad_grid(tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text("{not json")
    assert cli.main(["bench", "--grid", str(grid), "--output", str(tmp_path / "o.csv")]) == 2
    grid.write_text(json.dumps({"n": [10]}))
    assert cli.main(["bench", "--grid", str(grid), "--output", str(tmp_path / "o.csv")]) == 2


@pytest.mark.skipif(shutil.which("energy-cp") is None, reason="console script not installed")
def test_console_script(tmp_path, shifted_csv):
    proc = subprocess.run(["energy-cp", "detect", "--input", str(shifted_csv), *FAST],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["method"] == "asymptotic"
    proc = subprocess.run(["energy-cp", "detect"], capture_output=True, text=True)
    assert proc.returncode == 2
