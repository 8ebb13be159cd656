# tests/test_geometry.py
import math

import numpy as np
import pytest

from src.geometry.builtins import builtin_domain
from src.geometry.domain import (
    DIRICHLET,
    NEUMANN,
    PolytopeKind,
    boundary_measure,
    domain_volume,
    orient_faces,
    polytope_measure,
)
from src.utils.errors import InvalidInputError


def test_rectangle_defaults_to_neumann(unit_square):
    info = unit_square.describe()
    assert info["dim"] == 2
    assert info["faces"] == 4
    assert set(unit_square.bc.values()) == {NEUMANN}
    assert unit_square.exterior_ball_declared


def test_rectangle_measures():
    rect = builtin_domain("rectangle", {"a": 1.0, "b": 2.0})
    assert domain_volume(rect) == pytest.approx(2.0)
    assert boundary_measure(rect) == pytest.approx(6.0)


def test_disk_measures():
    disk = builtin_domain("disk", {"radius": 2.0})
    assert domain_volume(disk) == pytest.approx(4 * math.pi)
    assert boundary_measure(disk) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("name, volume", [
    ("box", 1.0),
    ("double_prism", 1.0),
    ("double_triangle", 1.0),
])
def test_builtin_volumes(name, volume):
    assert domain_volume(builtin_domain(name, {})) == pytest.approx(volume)


def test_octahedron_volume():
    octa = builtin_domain("octahedron", {"a": 2.0, "b": 2.0, "height": 1.0})
    assert domain_volume(octa) == pytest.approx(8.0 / 3.0)


def test_shifted_prism_inserts_slab():
    shifted = builtin_domain("double_prism_shifted", {"c": 0.5})
    assert domain_volume(shifted) == pytest.approx(1.5)


def test_truncated_prism_adds_cut_face():
    cut = builtin_domain("double_prism_truncated", {"cut": 0.5})
    assert "cut" in cut.face_ids
    assert domain_volume(cut) < 1.0


def test_truncation_level_out_of_range():
    with pytest.raises(InvalidInputError):
        builtin_domain("double_prism_truncated", {"cut": 1.5})


def test_with_labels_marks_dirichlet(unit_square):
    mixed = unit_square.with_labels({"f3": DIRICHLET})
    assert mixed.dirichlet_faces() == ["f3"]
    assert unit_square.dirichlet_faces() == []


def test_with_labels_rejects_unknown_face(unit_square):
    with pytest.raises(InvalidInputError):
        unit_square.with_labels({"f9": DIRICHLET})


def test_all_neumann_clears_labels(unit_square):
    mixed = unit_square.with_labels({"f0": DIRICHLET})
    assert mixed.all_neumann().dirichlet_faces() == []


def test_unknown_builtin():
    with pytest.raises(InvalidInputError):
        builtin_domain("heptagon", {})


def test_nonpositive_parameter():
    with pytest.raises(InvalidInputError):
        builtin_domain("rectangle", {"a": -1.0})


def test_l_shape_declares_no_exterior_ball():
    assert not builtin_domain("l_shape", {}).exterior_ball_declared


def test_product_is_three_dimensional():
    prod = builtin_domain("product", {"left": "double_triangle", "right": "interval"})
    assert prod.dim == 3
    assert domain_volume(prod) == pytest.approx(1.0)


def test_centered_box_is_symmetric():
    box = builtin_domain("box", {"centered": True})
    assert box.symmetry_planes == (1, 2, 3)
    assert builtin_domain("box", {}).symmetry_planes == ()


def test_clockwise_polygon_is_reoriented():
    square = np.array([[0.0, 0.0], [0.0, 2.0], [2.0, 2.0], [2.0, 0.0]])
    clockwise = [(0, 1), (1, 2), (2, 3), (3, 0)]
    oriented = orient_faces(square, clockwise)
    assert oriented == [(1, 0), (2, 1), (3, 2), (0, 3)]
    assert polytope_measure(PolytopeKind(tuple(map(tuple, square)), tuple(oriented))) == pytest.approx(4.0)
