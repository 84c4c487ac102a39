import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from weyllab.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
A1 = str(CONFIGS / "a1.yaml")


@pytest.fixture
def small(tmp_path):
    p = tmp_path / "small.yaml"
    p.write_text("dimension: 2\neta: 0.5\ntruncation: 16\nlambda_grid: {min: 2, max: 4, count: 4}\n")
    return str(p)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_count_stdout_and_csv(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["count", "--dim", "2", "--radius", "10", "--out", str(out)]) == 0
    assert capsys.readouterr().out.strip() == "317"
    rows = _rows(out)
    assert rows == [{"dim": "2", "radius": "10", "count": "317", "remainder": "%.17g" % (317 - 100 * math.pi)}]
    meta = json.loads(Path(str(out) + ".meta.json").read_text())
    assert meta["command"] == "count" and "written_at" in meta


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "weyllab.cli", "count", "--dim", "3", "--radius", "1"],
                       capture_output=True, text=True, check=True)
    assert r.stdout.strip() == "7"


def test_shells_and_caps(tmp_path, capsys):
    assert main(["shells", "--dim", "2", "--max-norm-sq", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "norm_sq,multiplicity,cumulative"
    assert lines[-1] == "5,8,21"
    assert main(["caps", "--dim", "2", "--lambda-sq", "25", "--cap-radius", "0", "2"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert rows[0]["max_count"] == "1"


def test_annulus_small(capsys):
    assert main(["annulus", "--dim", "2", "--lam", "6"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert rows and all(int(r["S"]) <= int(r["J"]) * int(r["max_K"]) for r in rows)


def test_duhamel_check_exit_codes(capsys, tmp_path):
    assert main(["duhamel-check", "--config", A1, "--cache-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("res1 ") and "res2 " in out
    assert main(["duhamel-check", "--config", A1, "--tol", "0", "--cache-dir", str(tmp_path)]) == 3


def test_config_error_json(capsys):
    code = main(["duhamel-check", "--config", A1, "--set", "eta=1.2", "--error-json"])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError" and err["rule"] == "eta in (0,1)"


def test_other_errors_exit_one(capsys, tmp_path):
    bad = tmp_path / "x.csv"
    bad.write_text("lambda,value\n1,1\n")
    assert main(["fit", "--input", str(bad), "--error-json"]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "ValueError"
    assert main(["assemble"]) == 2


def test_weyl_deterministic_and_cached(small, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cache = str(tmp_path / "cache")
    assert main(["weyl", "--config", small, "--cache-dir", cache, "--out", str(a)]) == 0
    assert main(["weyl", "--config", small, "--cache-dir", cache, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(Path(str(a) + ".meta.json").read_text())["cache_hit"] is False
    assert json.loads(Path(str(b) + ".meta.json").read_text())["cache_hit"] is True
    header = a.read_text().splitlines()[0]
    assert header == "lambda,x_index,value,mode,warning_flags"
    # a cold run without the cache gives the same bytes
    c = tmp_path / "c.csv"
    assert main(["weyl", "--config", small, "--out", str(c)]) == 0
    assert c.read_bytes() == a.read_bytes()


def test_corrupt_cache_is_ignored(small, tmp_path):
    cache = tmp_path / "cache"
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["eigs", "--config", small, "--cache-dir", str(cache), "--count", "10", "--out", str(a)]) == 0
    for f in cache.glob("*.weyl"):
        f.write_bytes(b"XXXX" + f.read_bytes()[4:])
    with pytest.warns(UserWarning, match="cache"):
        assert main(["eigs", "--config", small, "--cache-dir", str(cache), "--count", "10", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_report_then_fit(small, tmp_path):
    rep = tmp_path / "rep.json"
    assert main(["report", "--config", small, "--out", str(rep)]) == 0
    data = json.loads(rep.read_text())
    assert len(data["points"]) == 4 and "slope" in data["fit"]
    fit = tmp_path / "fit.json"
    assert main(["fit", "--input", str(rep.with_suffix(".csv")), "--eta", "0.5", "--dim", "2", "--out", str(fit)]) == 0
    rec = json.loads(fit.read_text())
    assert rec["slope"] == pytest.approx(data["fit"]["slope"], rel=1e-12)
    assert rec["expected_exponent"] == 1.5


def test_sum_commands(small, tmp_path, capsys):
    for cmd in ("r1", "r2"):
        assert main([cmd, "--config", small, "--set", "lambda_grid.max=3", "--set", "lambda_grid.min=3",
                     "--set", "lambda_grid.count=1", "--cache-dir", str(tmp_path)]) == 0
        rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
        assert len(rows) == 1 and float(rows[0]["value"]) != 0
    assert main(["r1-lower", "--config", small, "--set", "coefficients=model", "--set", "truncation_factor=4"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert all(float(r["value"]) > 0 for r in rows)


def test_fourier_assemble_diagnose(small, capsys, tmp_path):
    assert main(["fourier", "--config", small, "--xi-max", "3"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert [r["xi_norm_sq"] for r in rows] == ["0", "1", "2", "4", "5", "8", "9"]
    assert main(["fourier", "--config", small, "--xi-max", "10", "--envelope"]) == 0
    assert json.loads(capsys.readouterr().out)["c_min"] > 0
    assert main(["assemble", "--config", small]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["symmetric"] and info["size"] == 797
    out = tmp_path / "d.json"
    assert main(["diagnose", "--config", small, "--out", str(out)]) == 0
    first = out.read_bytes()
    assert main(["diagnose", "--config", small, "--out", str(out)]) == 0
    assert out.read_bytes() == first
    names = {r["name"] for r in json.loads(first)["reports"]}
    assert names == {"band_ratio", "rough_bound_ratio", "heat_bound_ratio"}
