import json
import subprocess
import sys

import pytest

from wfrob import cli, lg
from wfrob.algebra import AlgebraError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build_json(capsys):
    code, out, _ = run(capsys, "build", "--l", "2", "--k", "1")
    assert code == cli.EXIT_OK
    rep = json.loads(out)
    assert rep["schema"] == 1 and rep["group"] == {"l": 2, "k": 1}
    assert list(rep)[:3] == ["schema", "command", "group"]
    assert rep["potential"]["log_coeff"] == "1/2" and rep["potential"]["log_var"] == "t2"
    assert rep["g_y"][0][0] == "2*y2*E1"


def test_build_text(capsys):
    code, out, _ = run(capsys, "build", "--l", "2", "--k", "1", "--format", "text")
    assert code == 0 and "potential" in out and not out.lstrip().startswith("{")


@pytest.mark.parametrize("argv", [
    ["build", "--l", "1", "--k", "1"],
    ["build", "--l", "3", "--k", "3"],
    ["build", "--l", "3"],
    ["verify", "--l", "2", "--k", "1", "--tol", "bogus=1"],
    ["verify", "--l", "2", "--k", "1", "--tol", "pencil"],
    ["lg-check", "--l", "2", "--k", "1", "--samples", "0"],
    ["example", "a9k9"],
    ["frobnicate"],
])
def test_invalid_input(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == cli.EXIT_INVALID


def test_verify_ok_and_corrupt(capsys):
    code, out, _ = run(capsys, "verify", "--l", "3", "--k", "1")
    assert code == 0
    names = [c["name"] for c in json.loads(out)["checks"]]
    assert names == sorted(names) and "wdvv_exact" in names and any(n.startswith("pencil") for n in names)
    code, out, err = run(capsys, "verify", "--l", "3", "--k", "1", "--corrupt")
    assert code == cli.EXIT_VERIFY and "check failed" in err
    status = {c["name"]: c["passed"] for c in json.loads(out)["checks"]}
    assert status["wdvv_exact"] is False and status["wdvv_numeric"] is False


def test_exactness_failure(capsys, monkeypatch):
    def boom(spec, g):
        raise AlgebraError("remainder in exact division")

    monkeypatch.setattr(cli, "christoffel_y", boom)
    code, _, err = run(capsys, "build", "--l", "2", "--k", "1")
    assert code == cli.EXIT_EXACTNESS and "stage orbit.christoffel" in err


def test_lg_check(capsys):
    code, out, _ = run(capsys, "lg-check", "--l", "2", "--k", "1", "--samples", "4")
    assert code == 0
    rep = json.loads(out)
    assert len(rep["records"]) == 4 and rep["summary"]["passed"] is True
    code, _, _ = run(capsys, "lg-check", "--l", "2", "--k", "1", "--samples", "4", "--tol", "pullback=1e-30")
    assert code == cli.EXIT_LG


def test_lg_rejections(capsys, monkeypatch):
    monkeypatch.setattr(lg, "sample_check",
                        lambda spec, sym, seed, i: lg.SampleRecord(i, True, "DegenerateCritical: forced"))
    code, _, _ = run(capsys, "lg-check", "--l", "2", "--k", "1", "--samples", "3")
    assert code == cli.EXIT_REJECTIONS


@pytest.mark.parametrize("name", ["a2k1", "a3k1", "a3k2"])
def test_examples_match(capsys, name):
    code, _, _ = run(capsys, "example", name)
    assert code == 0


def test_example_corrupt_diff(capsys):
    code, out, err = run(capsys, "example", "a2k1", "--corrupt")
    assert code == cli.EXIT_GOLDEN
    assert "---" in out + err and "+++" in out + err


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "build", "--l", "3", "--k", "2", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["group"] == {"l": 3, "k": 2}


def test_byte_identical_across_processes():
    cmd = [sys.executable, "-m", "wfrob.cli", "verify", "--l", "2", "--k", "1", "--seed", "7"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a


def test_lg_output_deterministic(capsys):
    _, a, _ = run(capsys, "lg-check", "--l", "3", "--k", "2", "--samples", "3", "--seed", "5")
    _, b, _ = run(capsys, "lg-check", "--l", "3", "--k", "2", "--samples", "3", "--seed", "5")
    assert a == b
