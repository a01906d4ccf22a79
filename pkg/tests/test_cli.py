import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from qsnet.cli import format_number, main, to_json
from qsnet.model import build_blocks, dump_network
from qsnet.performance import finite_cost, load_weights
from qsnet.spectral import read_spectrum_csv, steady_spectrum

from conftest import THETA, decoupled_spec, rotation_spec


@pytest.fixture
def rotation_file(tmp_path):
    path = tmp_path / "rot.json"
    dump_network(rotation_spec(0.25, N=16), path)
    return path


@pytest.fixture
def weights_file(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"k_max": 0, "sigma": [[[1, 0], [0, 1]]]}))
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_format_number():
    assert format_number(-2.0) == "-2.0"
    assert format_number(0.1) == "0.10000000000000001"
    assert float(format_number(np.pi)) == np.pi
    assert format_number(float("nan")) == "null"
    assert to_json({"a": [1, 2.5], "b": None, "c": True}) == '{\n  "a": [1, 2.5],\n  "b": null,\n  "c": true\n}'


def test_validate_ok(rotation_file, capsys):
    code, out, _ = run(["validate", rotation_file], capsys)
    assert code == 0
    assert json.loads(out)["valid"] is True


def test_validate_symmetric_theta(tmp_path, capsys):
    data = decoupled_spec().to_dict()
    data["theta"] = [[0, 1], [1, 0]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, _, err = run(["validate", path], capsys)
    assert code == 1
    assert "ThetaNotAntisymmetric" in err


def test_parse_error_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 1}')
    code, _, err = run(["validate", path], capsys)
    assert code == 2 and "ParseError" in err
    code, _, _ = run(["validate", tmp_path / "missing.json"], capsys)
    assert code == 2


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == 2


def test_stability_rotation(rotation_file, capsys):
    code, out, _ = run(["stability", rotation_file, "--K", 256], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["stable"] is True
    assert data["worst_abscissa"] == pytest.approx(-2.0, abs=1e-12)


def test_stability_unstable_reports_without_failing(tmp_path, capsys):
    path = tmp_path / "u.json"
    dump_network(decoupled_spec().replace(M=np.zeros((2, 2))), path)
    code, out, _ = run(["stability", "--network", path], capsys)
    assert code == 0
    assert json.loads(out)["stable"] is False


def test_lmi_check(rotation_file, tmp_path, capsys):
    code, out, _ = run(["lmi-check", rotation_file, "--epsilon", 0.1], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["feasible"] is True
    np.testing.assert_allclose(data["S"], (2 - np.sqrt(4 - 1 - 0.1)) * np.eye(2), atol=1e-8)
    assert set(data) == {"feasible", "S", "Q", "slack", "iterations"}
    path = tmp_path / "r6.json"
    dump_network(rotation_spec(0.6, N=16), path)
    code, out, _ = run(["lmi-check", path, "--epsilon", 0.1], capsys)
    assert code == 0
    assert json.loads(out)["feasible"] is False


def test_spectrum_requires_stability(tmp_path, capsys):
    path = tmp_path / "u.json"
    dump_network(decoupled_spec().replace(M=np.zeros((2, 2))), path)
    code, _, err = run(["spectrum", path], capsys)
    assert code == 1 and "NotStable" in err


def test_spectrum_round_trip_and_manifest(rotation_file, weights_file, tmp_path, capsys):
    out = tmp_path / "s.csv"
    before = hashlib.sha256(rotation_file.read_bytes()).hexdigest()
    code, _, _ = run(["spectrum", rotation_file, "--out", out], capsys)
    assert code == 0
    assert hashlib.sha256(rotation_file.read_bytes()).hexdigest() == before
    manifest = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    assert manifest["command"] == "spectrum"
    assert manifest["inputs"][str(rotation_file)] == before
    assert manifest["output_sha256"] == hashlib.sha256(out.read_bytes()).hexdigest()
    assert {"version", "wall_time", "seed", "config"} <= set(manifest)
    back = read_spectrum_csv(out, THETA)
    spec = steady_spectrum(build_blocks(rotation_spec(0.25, N=16)), 16)
    w = load_weights(weights_file)
    assert abs(finite_cost(back, w, 16) - finite_cost(spec, w, 16)) <= 1e-12


def test_performance(rotation_file, weights_file, capsys):
    code, out, _ = run(["performance", "--network", rotation_file, "--weights", weights_file, "--N", 16,
                        "--limit"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["E_N"] == pytest.approx(2.0, abs=1e-10)
    assert data["E_inf"] == pytest.approx(2.0, abs=1e-12)
    assert data["err"] <= 1e-12
    code, out, _ = run(["performance", rotation_file, "--weights", weights_file], capsys)
    assert json.loads(out)["E_inf"] is None


def test_entangle_pairs_and_profile(rotation_file, capsys):
    code, out, _ = run(["entangle", rotation_file, "--pairs", "0,1;3,5", "--infinite"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "a,detLambda,logNeg,separable,source"
    assert len(lines) == 5
    assert lines[1].split(",")[0] == "-1" and lines[1].endswith("true,finite")
    assert lines[2].endswith("infinite")
    code, out, _ = run(["entangle", rotation_file, "--profile", "-2..2"], capsys)
    assert [line.split(",")[0] for line in out.splitlines()[1:]] == ["-2", "-1", "1", "2"]


@pytest.mark.parametrize("args", [["--pairs", "0,x"], ["--profile", "3..1"], ["--pairs", "1,1"]])
def test_entangle_bad_arguments(rotation_file, capsys, args):
    code, _, _ = run(["entangle", rotation_file, *args], capsys)
    assert code in (1, 2)


def test_ensemble_byte_identical(tmp_path, capsys):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"{tag}.csv"
        code, _, _ = run(["ensemble", "--count", 2, "--seed", 7, "--N", 64, "--d", 3, "--jobs", 1,
                          "--out", out, "--svg", tmp_path / f"{tag}.svg"], capsys)
        assert code == 0
        outs.append(out.read_bytes())
        assert (tmp_path / f"{tag}.csv.manifest.json").exists()
        assert (tmp_path / f"{tag}.svg.manifest.json").exists()
    assert outs[0] == outs[1]
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_module_entry_point(rotation_file):
    proc = subprocess.run([sys.executable, "-m", "qsnet", "validate", str(rotation_file)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["valid"] is True
