# tests/test_lip.py
import math

import numpy as np
import pytest

from src.geometry.builtins import builtin_domain
from src.geometry.domain import PolytopeKind, make_domain
from src.geometry.lip import AXIS, OPPOSITE_PAIR, VIOLATING, classify_normal, is_lip, normal_sublattice_ok
from src.utils.errors import InvalidInputError

S2 = 1.0 / math.sqrt(2.0)
S3 = 1.0 / math.sqrt(3.0)


@pytest.mark.parametrize("normal, ok", [
    ((1.0, 0.0, 0.0), True),
    ((0.0, -1.0), True),
    ((S2, -S2, 0.0), True),
    ((-S2, S2), True),
    ((S2, S2, 0.0), False),
    ((S3, -S3, S3), False),
])
def test_normal_sublattice(normal, ok):
    assert normal_sublattice_ok(normal) is ok


def test_non_unit_normal_rejected():
    with pytest.raises(InvalidInputError):
        normal_sublattice_ok((1.0, 1.0))


def test_classify_normal_reports_axes():
    assert classify_normal("f", (0.0, 0.0, -1.0)).klass == AXIS
    pair = classify_normal("g", (-S2, 0.0, S2))
    assert pair.klass == OPPOSITE_PAIR
    assert pair.axes == (1, 3)
    assert pair.signs == (-1, 1)
    assert classify_normal("h", (S2, S2)).klass == VIOLATING


@pytest.mark.parametrize("name", ["rectangle", "box", "double_triangle", "double_prism", "l_shape"])
def test_lip_builtins(name):
    verdict = is_lip(builtin_domain(name, {}))
    assert verdict.is_lip
    assert verdict.violating() == []


def test_double_prism_slant_faces_are_opposite_pairs():
    verdict = is_lip(builtin_domain("double_prism", {}))
    classes = [f.klass for f in verdict.witness_faces]
    assert classes.count(OPPOSITE_PAIR) == 2


def test_octahedron_is_not_lip():
    verdict = is_lip(builtin_domain("octahedron", {}), search_orientations=True)
    assert not verdict.is_lip
    assert verdict.violating()
    assert verdict.note


def test_full_disk_is_not_lip():
    assert not is_lip(builtin_domain("disk", {}), search_orientations=True).is_lip


def test_product_rule():
    prod = builtin_domain("product", {"left": "double_triangle", "right": "interval"})
    assert is_lip(prod).is_lip


def test_signed_permutation_search():
    # hypotenuse normal (1,1)/√2 is fixed by flipping one axis
    tri = make_domain(2, PolytopeKind(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)), ((0, 1), (1, 2), (2, 0))))
    assert not is_lip(tri).is_lip
    verdict = is_lip(tri, search_orientations=True)
    assert verdict.is_lip
    assert verdict.rotation_applied is not None
    assert verdict.to_dict()["rotation_applied"]["type"] == "permutation_reflection"
    normals = np.array([[S2, S2]])
    assert classify_normal("hyp", verdict.rotation_applied.apply(normals)[0]).klass == OPPOSITE_PAIR


def test_verdict_serializes_faces():
    out = is_lip(builtin_domain("rectangle", {})).to_dict()
    assert out["is_lip"] is True
    assert out["rotation_applied"] == {"type": "none"}
    assert len(out["faces"]) == 4
