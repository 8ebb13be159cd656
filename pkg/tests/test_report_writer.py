# tests/test_report_writer.py
import json

import numpy as np
import scipy.sparse as sp

from src.export.report_writer import (
    atomic_write_text,
    coo_text,
    eigenfield_frame,
    to_json,
    write_eigenfield_csv,
    write_report,
)


class _Record:
    def to_dict(self):
        return {"kind": "gradient", "mismatch": 0.5}


def test_floats_keep_seventeen_digits():
    assert to_json(0.1) == "0.10000000000000001"
    assert to_json(2.0) == "2.0"
    assert to_json(np.float64(0.5)) == "0.5"
    assert to_json(1e22) == "1e+22"
    assert to_json(float("nan")) == "null"
    assert to_json(float("inf")) == "null"


def test_scalars_and_containers():
    assert to_json(3) == "3"
    assert to_json(np.int64(7)) == "7"
    assert to_json(True) == "true"
    assert to_json(np.bool_(False)) == "false"
    assert to_json(None) == "null"
    assert to_json([]) == "[]"
    assert to_json({}) == "{}"
    text = to_json({"b": [1, 2.5], "a": "μ₂", "arr": np.array([1.0, 0.5]), "rec": _Record()})
    parsed = json.loads(text)
    assert list(parsed) == ["b", "a", "arr", "rec"]
    assert parsed["a"] == "μ₂"
    assert parsed["arr"] == [1.0, 0.5]
    assert parsed["rec"]["kind"] == "gradient"


def test_atomic_write_leaves_no_temporaries(tmp_path):
    target = tmp_path / "nested" / "report.json"
    write_report({"status": "pass", "value": 0.25}, target)
    assert json.loads(target.read_text()) == {"status": "pass", "value": 0.25}
    atomic_write_text(target, "replaced\n")
    assert target.read_text() == "replaced\n"
    assert [p.name for p in target.parent.iterdir()] == ["report.json"]


def test_eigenfield_csv(tmp_path):
    vertices = np.array([[0.0, 0.0], [1.0, 0.0]])
    frame = eigenfield_frame(vertices, np.array([[0.1, 0.2], [0.3, 0.4]]))
    assert list(frame.columns) == ["vx", "vy", "u1", "u2"]
    path = write_eigenfield_csv(vertices, np.array([0.5, -0.5]), tmp_path / "psi.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "vx,vy,psi"
    assert lines[2] == "1,0,-0.5"


def test_coo_text_is_sorted():
    m = sp.csr_matrix(np.array([[2.0, 0.0], [-1.0, 0.5]]))
    assert coo_text(m) == "0 0 2.0\n1 0 -1.0\n1 1 0.5\n"
    assert coo_text(sp.csr_matrix((2, 2))) == ""
