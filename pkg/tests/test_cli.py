import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from surface_forge import cli
from surface_forge.quatgeo import ComplexGrid

SC = Path(__file__).resolve().parents[1] / "demos" / "scenarios"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    return code, capsys.readouterr().out


@pytest.mark.parametrize("name", ["vacuum", "enneper", "cylinder_pair", "finitegap", "family_B", "family_C"])
def test_generate_passes(capsys, tmp_path, name):
    code, out = run(capsys, "generate", "--scenario", SC / f"{name}.json", "--out", tmp_path)
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert json.loads((tmp_path / f"{name}.json").read_text()) == rep
    assert list(tmp_path.glob("*.obj"))
    assert "runtime_s" not in rep


def test_vacuum_residuals_small(capsys, tmp_path):
    _, out = run(capsys, "generate", "--scenario", SC / "vacuum.json", "--out", tmp_path)
    rep = json.loads(out)
    assert max(r["max"] for r in rep["residuals"].values()) < 1e-8


def test_invalid_inputs(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "cmc-vacuum", "grid": {"nx": 0, "ny": 4, "h": 0.1}}))
    assert run(capsys, "generate", "--scenario", bad, "--out", tmp_path)[0] == 2
    assert run(capsys, "generate", "--scenario", tmp_path / "missing.json", "--out", tmp_path)[0] == 2
    bad.write_text("{not json")
    assert run(capsys, "generate", "--scenario", bad, "--out", tmp_path)[0] == 2
    bad.write_text(json.dumps({"kind": "nonsense"}))
    assert run(capsys, "generate", "--scenario", bad, "--out", tmp_path)[0] == 2


def test_numeric_failure_names_module(capsys, tmp_path):
    code, out = run(capsys, "generate", "--scenario", SC / "vacuum.json", "--out", tmp_path, "--tol", "1e-30")
    rep = json.loads(out)
    assert code == 3 and not rep["pass"] and rep["failing_module"] == "frameflow"


def test_obj_roundtrip_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, "generate", "--scenario", SC / "vacuum.json", "--out", a)
    run(capsys, "generate", "--scenario", SC / "vacuum.json", "--out", b)
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()
    F, grid = cli.read_obj(a / "vacuum.obj")
    cli.write_obj(tmp_path / "c.obj", F, grid)
    assert (tmp_path / "c.obj").read_bytes() == (a / "vacuum.obj").read_bytes()
    code, out = run(capsys, "verify", a / "vacuum.obj")
    assert code == 0
    assert json.loads(out)["mesh"] == json.loads((a / "vacuum.json").read_text())["mesh"]["main"]


def test_plane_mesh(capsys, tmp_path):
    g = ComplexGrid.centered(21, 21, 0.1, 0.3)
    F = np.stack([g.z.real, g.z.imag, 0 * g.z.real], -1)
    cli.write_obj(tmp_path / "plane.obj", F, g)
    code, out = run(capsys, "verify", tmp_path / "plane.obj")
    mesh = json.loads(out)["mesh"]
    assert code == 0 and mesh["H_max_abs"] < 1e-12 and mesh["Q_max_abs"] < 1e-12


def test_noise_is_seeded(capsys, tmp_path, monkeypatch):
    run(capsys, "generate", "--scenario", SC / "vacuum.json", "--out", tmp_path)
    monkeypatch.setenv(cli.SEED_ENV, "7")
    o1 = run(capsys, "verify", tmp_path / "vacuum.obj", "--noise", "1e-3")[1]
    o2 = run(capsys, "verify", tmp_path / "vacuum.obj", "--noise", "1e-3")[1]
    assert o1 == o2
    assert json.loads(o1)["mesh"]["gauss"] > 1.0


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_t(capsys):
    code, out = run(capsys, "sweep", "--scenario", SC / "vacuum.json", "--param", "t",
                    "--values", "0,0.5235987755982988,1.0471975511965976", "--threads", "3")
    rows = _rows(out)
    assert code == 0 and len(rows) == 3
    assert max(float(r["u_delta"]) for r in rows) < 1e-6


def test_sweep_T(capsys):
    code, out = run(capsys, "sweep", "--scenario", SC / "family_C.json", "--param", "T", "--values", "0,0.3,0.6")
    assert code == 0
    assert max(float(r["H_delta"]) for r in _rows(out)) < 1e-6


def test_sweep_single_matches_generate(capsys, tmp_path):
    _, out = run(capsys, "generate", "--scenario", SC / "vacuum.json", "--out", tmp_path)
    rep = json.loads(out)
    _, out = run(capsys, "sweep", "--scenario", SC / "vacuum.json", "--param", "t", "--values", "0.3")
    row = _rows(out)[0]
    for k, v in rep["residuals"].items():
        assert float(row[k]) == v["max"]


def test_sweep_wrong_kind(capsys):
    assert run(capsys, "sweep", "--scenario", SC / "enneper.json", "--param", "t", "--values", "0")[0] == 2


def test_theta_eval(capsys):
    code, out = run(capsys, "theta-eval", "--B", "[[-6.283185307179586]]")
    rep = json.loads(out)
    assert code == 0 and abs(rep["theta"][0] - 1.0864348112133082) < 1e-14
    code, out = run(capsys, "theta-eval", "--scenario", SC / "finitegap.json", "--u", "[[0.1, 0.2]]")
    assert code == 0 and json.loads(out)["genus"] == 1
    assert run(capsys, "theta-eval", "--B", "[[-1.0]]", "--u", "[1, 2]")[0] == 2


def test_pvi_roundtrip(capsys):
    code, out = run(capsys, "pvi-roundtrip")
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert rep["residuals"]["roundtrip"]["max"] < 1e-8
