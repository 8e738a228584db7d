from __future__ import annotations

import csv
import io
import json
import math

import pytest

from pathtriple.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_measure_table(capsys):
    code, out, _ = run(capsys, "measure", "--k", "1,1,1", "--depth", "6")
    assert code == 0
    rows = json.loads(out)["rows"]
    r = (3 - math.sqrt(5)) / 2
    assert [row["h"] for row in rows] == list(range(7))
    assert all(abs(row["a"] - r ** row["h"]) < 1e-12 for row in rows)


def test_measure_csv(capsys):
    _, out, _ = run(capsys, "measure", "--k", "1", "--depth", "3", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["h"] == "0" and float(rows[1]["a"]) == pytest.approx(0.381966, abs=1e-6)


def test_spectrum_table(capsys):
    code, out, _ = run(capsys, "spectrum", "--k", "1,1,1", "--caps", "2,1,1")
    rep = json.loads(out)
    assert code == 0
    assert rep["rows"][0] == {"eigenvalue": 1, "resolvent": 0.5, "multiplicity": 5}
    assert rep["tail_norm"] == pytest.approx(0.1)


def test_cf_and_kseq(capsys):
    _, out, _ = run(capsys, "cf", "--cf", "0,1,1,1,1")
    rep = json.loads(out)
    assert [r["q"] for r in rep["convergents"]] == ["1", "1", "2", "3", "5"]
    _, out, _ = run(capsys, "kseq", "--cf", "7,2,5,3,4", "--k1", "9", "--depth", "7")
    assert json.loads(out)["k"] == [9, 7, 0, 5, 0, 0, 4]


def test_input_file(capsys, tmp_path):
    f = tmp_path / "in.json"
    f.write_text(json.dumps({"cf": [7, 2, 5, 3, 4], "k1": 9}))
    _, out, _ = run(capsys, "kseq", "--input", str(f), "--depth", "7")
    assert json.loads(out)["k"] == [9, 7, 0, 5, 0, 0, 4]


def test_partitions(capsys):
    _, out, _ = run(capsys, "partitions", "--k", "1", "--depth", "2")
    rep = json.loads(out)
    assert rep["counts"] == [1, 4, 12, 33]
    assert rep["total_measure"] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("argv,field", [
    (["measure", "--k", "1,x"], "--k"),
    (["measure", "--k", "0,0"], "--k"),
    (["spectrum", "--k", "1", "--caps", "1,2"], "--caps"),
    (["measure", "--k", "1", "--tol", "0"], "--tol"),
    (["verify", "--k", "1", "--checks", "nope"], "--checks"),
    (["measure"], "--k"),
])
def test_config_errors(capsys, argv, field):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert field in err


def test_verify_subset_deterministic(capsys, tmp_path):
    argv = ["verify", "--k", "1,1,1,1,1", "--caps", "2,2,3", "--checks", "partitions,measure,effros_shen",
            "--seed", "7"]
    code, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    rep = json.loads(first)
    assert code == 0 and rep["failed"] == 0 and rep["seed"] == 7
    assert [c["name"] for c in rep["checks"]] == ["partitions", "measure", "effros_shen"]
    assert first == second
    out = tmp_path / "v.csv"
    run(capsys, *argv, "--format", "csv", "--out", str(out))
    assert out.read_text().startswith("check,passed,metric,value")


def test_figures(capsys, tmp_path):
    pytest.importorskip("matplotlib")
    code, out, _ = run(capsys, "spectrum", "--k", "1", "--caps", "2,1,1", "--figures", str(tmp_path))
    assert code == 0
    assert (tmp_path / "spectrum.png").stat().st_size > 0
    assert json.loads(out)["figures"] == [str(tmp_path / "spectrum.png")]


def test_verify_exit_counts_failures(capsys, monkeypatch):
    from pathtriple import checks

    monkeypatch.setattr(checks, "check_measure", lambda k, tol=1e-9: checks.CheckResult("measure", False))
    monkeypatch.setattr(checks, "check_effros_shen", lambda cf=None: checks.CheckResult("effros_shen", False))
    code, out, _ = run(capsys, "verify", "--k", "1", "--checks", "measure,effros_shen")
    assert code == 2
    assert json.loads(out)["failed"] == 2
