import json
import subprocess
import sys

import pytest

from motion_spherical.cli import RunConfig, ConfigError, main


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eigs_example(capsys):
    code, out, _ = _run(capsys, "eigs", "--n", "4", "--nu", "0.5", "--mu", "0.5")
    assert code == 0
    assert out == "s,lambda,weight\n0,1,3\n1,-3,1\n"


def test_spectrum_example(capsys):
    code, out, _ = _run(capsys, "spectrum", "--n", "3", "--mu", "1", "--rho", "2")
    assert out.splitlines() == ["xi1,xi2", "4.0,-2.0", "4.0,0.0", "4.0,2.0"]


def test_config_violation_exit_code(capsys):
    code, _, err = _run(capsys, "eigs", "--n", "3", "--mu", "0.5")
    assert code == 2 and "InvalidTau" not in err and "half-integer" in err
    code, _, err = _run(capsys, "phi", "--n", "3", "--mu", "1", "--s", "5")
    assert code == 2 and "out of range" in err


def test_run_config_validates_tau():
    with pytest.raises(ConfigError):
        RunConfig("eigs", n=4, mu=1).validate()


def test_phi_json(capsys):
    code, out, _ = _run(capsys, "phi", "--n", "3", "--mu", "1", "--rho", "1", "--format", "json", "--quad-degree", "20")
    doc = json.loads(out)
    assert doc["schema"] == 1 and doc["columns"] == ["row", "col", "re", "im"]
    diag = [r[2] for r in doc["rows"] if r[0] == r[1]]
    assert diag == pytest.approx([1.0, 1.0, 1.0])


def test_outputs_are_deterministic(tmp_path):
    for d in ("a", "b"):
        assert main(["extend", "--n", "3", "--mu", "1", "--rho-max", "2", "--out", str(tmp_path / d)]) == 0
        assert main(["transform", "--n", "4", "--nu", "0.5", "--mu", "0.5", "--rho-steps", "6", "--out", str(tmp_path / d)]) == 0
    for name in ("extend.csv", "extend_cutoff.svg", "transform.csv", "transform.svg", "transform.meta.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_transform_then_decompose_from_csv(tmp_path):
    assert main(["transform", "--n", "3", "--mu", "1", "--rho-steps", "16", "--out", str(tmp_path)]) == 0
    assert main(["decompose", "--n", "3", "--mu", "1", "--input", str(tmp_path / "transform.csv"), "--out", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "decompose.meta.json").read_text())
    assert meta["residual"] < 1e-12


def test_profile_and_polynomial_inputs(tmp_path, capsys):
    prof = tmp_path / "p.json"
    prof.write_text(json.dumps({"schema": 1, "coeffs": [[1.0], [0.5]], "width2": 1.0}))
    code, out, _ = _run(capsys, "transform", "--n", "3", "--mu", "1", "--input", str(prof), "--rho", "0,1")
    assert code == 0 and out.splitlines()[1].startswith("0.0,0,1.0")
    poly = tmp_path / "u.json"
    poly.write_text(json.dumps({"schema": 1, "terms": [[0, 0, "1"], [1, 0, "1/2"], [0, 1, "-3"]]}))
    code, out, _ = _run(capsys, "jet", "--n", "3", "--mu", "1", "--input", str(poly), "--order", "2")
    rows = [l.split(",") for l in out.splitlines()[1:]]
    assert ["1", "0", "1", "-3", "-3", "true", "0.0"] in rows
    code, out, _ = _run(capsys, "extend", "--builder", "borel", "--n", "3", "--mu", "1", "--input", str(poly))
    assert code == 0


def test_oracle_and_verify(tmp_path, capsys):
    code, out, _ = _run(capsys, "oracle", "--n", "4", "--nu", "1", "--mu", "1")
    assert code == 0 and "model_eigenvalue,2,-8,-8" in out
    code = main(["verify", "--criteria", "1,2,11", "--out", str(tmp_path)])
    assert code == 0
    text = (tmp_path / "verify.csv").read_text()
    assert text.startswith("criterion,title,pass,measured,tolerance,detail")
    assert (tmp_path / "verify.svg").exists()
    assert main(["verify", "--criteria", "99"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "motion_spherical", "eigs", "--n", "3", "--mu", "1"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[0] == "s,lambda,weight"
