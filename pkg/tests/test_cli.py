import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from ballmap.cli import main
from ballmap.polymap import identity_map, load_map, save_map

ROOT = Path(__file__).resolve().parents[1]


def write_cfg(tmp_path, doc, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


ELLIPSE = {"boundary": {"kind": "ellipse", "a": 2.0, "b": 1.0}, "build": {"method": "harmonic", "degree": 1}}
E20 = {"kind": "star_trig", "half_a0": 5.0, "cos": [1.0], "sin": [0.0, 2.0]}


def test_build_ellipse(tmp_path, capsys):
    cfg = write_cfg(tmp_path, ELLIPSE)
    assert main(["build", "--config", str(cfg), "--out", str(tmp_path / "m.json")]) == 0
    rep = json.loads((tmp_path / "m.report.json").read_text())
    assert rep["lambda"] == pytest.approx(1.0, abs=1e-9)
    assert {"det_min", "det_max", "boundary_error", "grid_points"} <= rep.keys()
    assert load_map(tmp_path / "m.json").degree == 1


def test_build_example1(tmp_path):
    cfg = write_cfg(tmp_path, {"boundary": E20, "build": {"method": "harmonic", "degree": 3, "nodes": 10},
                               "output": {"map": "out/m.json"}})
    assert main(["build", "--config", str(cfg)]) == 0
    rep = json.loads((tmp_path / "out" / "m.report.json").read_text())
    assert rep["lambda"] == pytest.approx(100.7, rel=0.05)
    assert rep["build"]["nodes"] == 10


@pytest.mark.parametrize("doc,field", [
    ({**ELLIPSE, "colour": 1}, "colour"),
    ({"boundary": ELLIPSE["boundary"], "build": {"method": "harmonic", "degree": 1, "kapa": 1}}, "build.kapa"),
    ({"boundary": ELLIPSE["boundary"], "build": {"method": "harmonic"}}, "build.degree"),
    ({"boundary": E20, "build": {"method": "blend", "degree": 3, "kappa": -1, "omega": 1}}, "build.kappa"),
    ({"boundary": E20, "build": {"method": "blend", "degree": 3, "kappa": 1, "omega": 3}}, "build.omega"),
    ({"boundary": E20, "build": {"method": "blend", "degree": 3, "kappa": 1, "omega": 1},
      "improve": {"q_n": 8}}, "improve.q_n"),
    ({"boundary": {"kind": "cassini", "a": 0.5}}, "boundary"),
    ({"boundary": E20, "build": {"method": "radial3d", "degree": 3}}, "build.method"),
])
def test_invalid_config_names_field(tmp_path, capsys, doc, field):
    cfg = write_cfg(tmp_path, doc)
    assert main(["build", "--config", str(cfg)]) != 0
    assert f"'{field}'" in capsys.readouterr().err


def test_improve_it1(tmp_path):
    doc = {"boundary": E20, "build": {"method": "blend", "degree": 3, "kappa": 0.5, "omega": 1.0},
           "improve": {"q_n": 7, "schedule": {"stages": 3}}}
    cfg = write_cfg(tmp_path, doc)
    assert main(["build", "--config", str(cfg), "--out", str(tmp_path / "m0.json")]) == 0
    assert main(["improve", "--config", str(cfg), "--in", str(tmp_path / "m0.json"),
                 "--out", str(tmp_path / "m1.json")]) == 0
    rep = json.loads((tmp_path / "m1.report.json").read_text())
    assert rep["after"]["lambda"] <= 10
    assert rep["after"]["boundary_error"] <= 1e-10
    assert rep["trace"][0]["method"] == "initial"
    assert rep["improve"]["schedule"]["stages"] == 3


def test_improve_energy_echoes_lattice(tmp_path):
    doc = {"boundary": E20, "build": {"method": "blend", "degree": 3, "kappa": 0.5, "omega": 1.0},
           "improve": {"objective": "energy", "schedule": {"stages": 1}}}
    cfg = write_cfg(tmp_path, doc)
    main(["build", "--config", str(cfg), "--out", str(tmp_path / "m0.json")])
    assert main(["improve", "--config", str(cfg), "--in", str(tmp_path / "m0.json"),
                 "--out", str(tmp_path / "m1.json")]) == 0
    rep = json.loads((tmp_path / "m1.report.json").read_text())
    assert rep["improve"]["energy"] == {"k1": 3, "K1": 25, "L1": 60, "alpha": 2.0}


def test_improve_needs_input(tmp_path, capsys):
    cfg = write_cfg(tmp_path, ELLIPSE)
    assert main(["improve", "--config", str(cfg)]) != 0
    assert main(["quality", "--config", str(cfg), "--in", str(tmp_path / "missing.json")]) != 0


def test_grid_identity(tmp_path):
    save_map(identity_map(2, 2), tmp_path / "id.json")
    cfg = write_cfg(tmp_path, {"boundary": {"kind": "ellipse", "a": 1, "b": 1},
                               "grid": {"circles": 2, "rays": 4, "samples": 8}})
    assert main(["grid", "--config", str(cfg), "--in", str(tmp_path / "id.json"),
                 "--out", str(tmp_path / "g")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "g.csv")))
    assert {r["curve_id"] for r in rows} == {"circle-1", "circle-2", "ray-1", "ray-2", "ray-3", "ray-4"}
    for r in rows:
        cid, par = r["curve_id"], float(r["param"])
        if cid.startswith("circle"):
            rad = int(cid.split("-")[1]) / 2
            want = (rad * np.cos(par), rad * np.sin(par))
        else:
            a = 2 * np.pi * int(cid.split("-")[1]) / 4
            want = (par * np.cos(a), par * np.sin(a))
        assert abs(float(r["s"]) - want[0]) <= 1e-12 and abs(float(r["t"]) - want[1]) <= 1e-12
    # 17 significant digits
    assert len(rows[3]["s"].lstrip("-").replace(".", "").lstrip("0").split("e")[0]) <= 17
    svg = (tmp_path / "g.svg").read_text()
    for label in (">x<", ">y<", ">s<", ">t<"):
        assert label in svg


def test_grid_3d_shells(tmp_path):
    save_map(identity_map(3, 1), tmp_path / "id.json")
    cfg = write_cfg(tmp_path, {"boundary": {"kind": "star_spherical", "terms": [[1, 0, 0, 0, 0]]},
                               "grid": {"shells": 4, "circles": 4, "rays": 6, "samples": 10}})
    assert main(["grid", "--config", str(cfg), "--in", str(tmp_path / "id.json"),
                 "--out", str(tmp_path / "g")]) == 0
    for i in range(1, 5):
        rows = list(csv.DictReader(open(tmp_path / f"g_shell{i}.csv")))
        r = np.array([[float(x["s"]), float(x["t"]), float(x["u"])] for x in rows])
        assert np.allclose(np.linalg.norm(r, axis=1), i / 4)


def test_quality_3d_identity(tmp_path):
    save_map(identity_map(3, 2), tmp_path / "id.json")
    cfg = write_cfg(tmp_path, {"boundary": {"kind": "star_spherical", "terms": [[1, 0, 0, 0, 0]]},
                               "quality": {"K": 8, "L": 4}})
    assert main(["quality", "--config", str(cfg), "--in", str(tmp_path / "id.json"),
                 "--out", str(tmp_path / "q.json")]) == 0
    rep = json.loads((tmp_path / "q.json").read_text())
    assert rep["E1"] == pytest.approx(1.0) and rep["E2"] == pytest.approx(1.0)
    assert (rep["K"], rep["L"]) == (8, 4)


def test_quality_dimension_mismatch(tmp_path, capsys):
    save_map(identity_map(3, 1), tmp_path / "id.json")
    cfg = write_cfg(tmp_path, ELLIPSE)
    assert main(["quality", "--config", str(cfg), "--in", str(tmp_path / "id.json")]) != 0
    assert "3D" in capsys.readouterr().err


@pytest.mark.parametrize("cfg", sorted((ROOT / "configs").glob("*.json")))
def test_shipped_configs_validate(cfg):
    from ballmap.cli import load_config

    load_config(cfg)


def test_console_script(tmp_path):
    cfg = write_cfg(tmp_path, ELLIPSE)
    out = subprocess.run([sys.executable, "-m", "ballmap.cli", "build", "--config", str(cfg),
                          "--out", str(tmp_path / "m.json")], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["lambda"] == pytest.approx(1.0)
