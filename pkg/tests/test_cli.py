# tests/test_cli.py
import json

import pytest

from src.cli.commands import EXIT_ERROR, EXIT_NOT_LIP, EXIT_OK, main, parse_config
from src.utils.errors import ConfigError, InvalidInputError


def test_classify_lip_domain(capsys):
    assert main(["classify", "--builtin", "double_prism"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["lip"]["is_lip"] is True
    assert payload["command"] == "classify"


def test_classify_octahedron(capsys):
    code = main(["classify", "--builtin", "octahedron", "--a", "2", "--b", "2", "--height", "1"])
    assert code == EXIT_NOT_LIP
    payload = json.loads(capsys.readouterr().out)
    assert payload["symmetry_planes"] == [1, 2, 3]
    assert payload["note"] == "lip orthant exists: yes"


def test_errors_exit_one(out_dir, capsys):
    broken = out_dir / "broken.dom"
    broken.write_text("dim 2\nvertex 0\n")
    assert main(["classify", "--file", str(broken)]) == EXIT_ERROR
    assert main(["classify", "--builtin", "disk", "--file", str(broken)]) == EXIT_ERROR
    assert main(["classify", "--builtin", "disk", "--bogus"]) == EXIT_ERROR
    assert main(["verify", "--builtin", "disk", "--h", "-1"]) == EXIT_ERROR
    assert main(["verify", "--builtin", "rectangle", "--dirichlet", "f9"]) == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_parse_config():
    config = parse_config(["verify", "--builtin", "rectangle", "--a", "2", "--centered", "--dirichlet", "f1", "--h", "0.2"])
    assert config.params == {"a": 2.0, "centered": True}
    assert config.dirichlet == ["f1"]
    assert config.h == 0.2
    assert config.load_domain().dirichlet_faces() == ["f1"]
    two_faces = parse_config(["verify", "--builtin", "rectangle", "--dirichlet", "f0, f1"])
    assert two_faces.dirichlet == ["f0", "f1"]
    with pytest.raises(InvalidInputError):
        two_faces.load_domain()
    with pytest.raises(ConfigError):
        parse_config(["study", "--builtin", "rectangle", "--levels", "2"])


def test_verify_is_reproducible(out_dir):
    args = ["verify", "--builtin", "rectangle", "--suite", "hotspots", "--h", "0.25", "--no-timestamp"]
    assert main(args + ["--out", "a.json"]) == EXIT_OK
    assert main(args + ["--out", "b.json"]) == EXIT_OK
    assert (out_dir / "a.json").read_bytes() == (out_dir / "b.json").read_bytes()
    assert (out_dir / "a_psi.csv").exists()


def test_verify_default_output_path(out_dir):
    assert main(["verify", "--builtin", "rectangle", "--suite", "hotspots", "--h", "0.25"]) == EXIT_OK
    report = json.loads((out_dir / "data" / "reports" / "verify_rectangle_hotspots.json").read_text())
    assert report["summary"]["status"] == "pass"


def test_study_writes_table(out_dir, capsys):
    code = main(["study", "--builtin", "rectangle", "--h", "0.25", "--levels", "3", "--out", "study.json"])
    assert code == EXIT_OK
    assert (out_dir / "study.csv").read_text().startswith("level,h,vertices,cells,value,error,order")
    assert "observed order" in capsys.readouterr().out


def test_solve_exports(out_dir):
    code = main([
        "solve", "--builtin", "rectangle", "--h", "0.25", "--k", "4",
        "--csv", "fields", "--matrices", "mats", "--mesh-out", "square.mesh",
    ])
    assert code == EXIT_OK
    assert (out_dir / "fields" / "psi_1.csv").exists()
    assert (out_dir / "fields" / "u_4.csv").exists()
    assert (out_dir / "mats" / "scalar_stiffness.coo").read_text().startswith("0 0 ")
    assert (out_dir / "square.mesh").read_text().startswith("mesh 2 25 32 16")
