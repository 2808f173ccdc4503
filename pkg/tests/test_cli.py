import csv
import json

import numpy as np
import pytest

from bergball import cli, verify
from bergball.holo import ExtremalMap
from bergball.mapfile import MapParseError, loads


def _run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr()


def _strip_runtime(path):
    d = json.loads(path.read_text())
    d.pop("runtime")
    return d


def test_constants(capsys):
    code, out = _run(capsys, "constants", "--n", "1")
    assert code == 0
    assert "2.5980762" in out.out
    assert f"{1 / np.sqrt(3):.10f}" in out.out
    assert "3.31" in out.out


def test_sharpness_output(capsys, tmp_path):
    code, out = _run(capsys, "sharpness", "--n", "1", "--eps", "0.01", "--out", str(tmp_path / "s.json"))
    assert code == 0
    assert "PASS" in out.out and "2.588076" in out.out
    d = json.loads((tmp_path / "s.json").read_text())
    assert d["pass"] and d["statistics"]["max_ratio"] == pytest.approx(2.588076, abs=1e-6)


def test_report_schema(capsys, tmp_path):
    out = tmp_path / "t.json"
    code, _ = _run(capsys, "thm1", "--n", "1", "--battery", "random:2:deg3", "--pairs", "300",
                   "--seed", "3", "--out", str(out))
    assert code == 0
    d = json.loads(out.read_text())
    for key in ("command", "params", "seed", "version", "statistics", "violations", "pass"):
        assert key in d
    assert set(d["statistics"]) >= {"max_ratio", "bound", "margin", "witness"}
    assert d["seed"] == 3 and d["command"] == "thm1"
    assert len(d["params"]["normalization"]) == 2


def test_identical_runs_match_byte_for_byte(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["thmD", "--n", "1", "--battery", "random:1:deg2", "--lams", "0.5", "--seed", "9"]
    _run(capsys, *args, "--out", str(a))
    _run(capsys, *args, "--out", str(b))
    assert _strip_runtime(a) == _strip_runtime(b)
    text_a = a.read_text().splitlines()
    text_b = b.read_text().splitlines()
    diff = [(x, y) for x, y in zip(text_a, text_b) if x != y]
    assert all('"runtime"' in x for x, _ in diff)


def test_csv_rows_reproduce(capsys, tmp_path):
    path = tmp_path / "rows.csv"
    code, _ = _run(capsys, "thm1", "--n", "2", "--battery", "random:2:deg2", "--pairs", "200",
                   "--csv", str(path))
    assert code == 0
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    for row in rows:
        (f,) = loads(row["spec"])
        z1 = verify.uncplx(json.loads(row["z1"]))
        z2 = verify.uncplx(json.loads(row["z2"]))
        assert float(verify.lipschitz_ratio(f, z1, z2)) == pytest.approx(float(row["computed"]), abs=1e-12)


def test_output_dir_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path))
    code, _ = _run(capsys, "proof", "--n", "2", "--grid", "20")
    assert code == 0
    assert (tmp_path / "proof.json").exists()


def test_exit_code_for_violations(capsys, monkeypatch):
    monkeypatch.setattr(verify, "constant_M", lambda n: 0.5)
    code, out = _run(capsys, "thm1", "--battery", "random:1:deg1", "--pairs", "200")
    assert code == 2 and "FAIL" in out.out


def test_exit_code_inapplicable(capsys):
    code, out = _run(capsys, "thm3", "--phi", "polynomial(exps=[[1]], coef=[[0.5]])",
                     "--battery", "random:1:deg2", "--wgrid", "8")
    assert code == 3 and "INAPPLICABLE" in out.out


def test_thm3_automorphism_passes(capsys, tmp_path):
    phi = tmp_path / "phi.txt"
    phi.write_text("automorphism(a=[(0.3+0j)])\n")
    code, _ = _run(capsys, "thm3", "--phi", f"@{phi}", "--battery", "random:2:deg3", "--wgrid", "8")
    assert code == 0


@pytest.mark.parametrize("argv", [
    ["thm1", "--bogus"],
    ["sharpness", "--eps", "9"],
    ["thm1", "--battery", "/nonexistent/maps.txt"],
    ["thm1", "--battery", "random:x:deg2"],
    ["thm1", "--pairs", "0"],
    ["thm2", "--n", "2"],
    ["thm1", "--sup-tol", "-1"],
    [],
])
def test_usage_errors_exit_one(capsys, argv):
    code, out = _run(capsys, *argv)
    assert code == 1
    assert "bergball:" in out.err


def test_load_battery_random_is_reproducible():
    a, fa = cli.load_battery("random:1:deg1", 2, seed=4)
    b, fb = cli.load_battery("random:1:deg1", 2, seed=4)
    z = np.array([0.1, 0.2j])
    assert np.array_equal(a[0].eval(z), b[0].eval(z))
    assert fa == fb
    assert a[0].degree == 1


def test_load_battery_file(tmp_path):
    path = tmp_path / "maps.txt"
    path.write_text("extremal(m=0.2, n=1)\n")
    maps, factors = cli.load_battery(str(path), 1)
    assert isinstance(maps[0].child, ExtremalMap)
    assert factors[0] == pytest.approx(1.0, abs=1e-9)
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing here\n")
    with pytest.raises(MapParseError):
        cli.load_battery(str(empty), 1)
    with pytest.raises(cli.UsageError):
        cli.load_battery(str(path), 2)
