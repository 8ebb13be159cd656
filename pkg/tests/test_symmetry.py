# tests/test_symmetry.py
import pytest

from src.geometry.builtins import builtin_domain
from src.geometry.domain import DIRICHLET, NEUMANN, domain_volume
from src.geometry.lip import is_lip
from src.geometry.symmetry import clip_halfspace, detect_symmetries, find_lip_orthants, orthant_restriction
from src.utils.errors import InvalidInputError, PreconditionError


def test_detect_symmetries(centered_square, unit_square):
    assert detect_symmetries(centered_square) == (1, 2)
    assert detect_symmetries(unit_square) == ()
    assert detect_symmetries(builtin_domain("disk", {})) == (1, 2)
    assert detect_symmetries(builtin_domain("octahedron", {})) == (1, 2, 3)


def test_orthant_of_square(centered_square):
    quarter = orthant_restriction(centered_square, (1, 1), 1)
    assert domain_volume(quarter) == pytest.approx(1.0)
    assert quarter.bc["cut_x1"] == DIRICHLET
    assert quarter.bc["cut_x2"] == NEUMANN
    assert is_lip(quarter).is_lip


def test_half_domain_of_square(centered_square):
    half = orthant_restriction(centered_square, (1, 1), 1, half_only=True)
    assert domain_volume(half) == pytest.approx(2.0)
    assert half.dirichlet_faces() == ["cut_x1"]
    assert half.symmetry_planes == (2,)


def test_quarter_disk_is_lip_after_flip():
    quarter = orthant_restriction(builtin_domain("disk", {}), (1, 1), 2)
    assert not is_lip(quarter).is_lip
    assert is_lip(quarter, search_orientations=True).is_lip
    assert quarter.bc["cut_x2"] == DIRICHLET


def test_every_disk_quadrant_is_lip():
    assert len(find_lip_orthants(builtin_domain("disk", {}), 2)) == 4


def test_octahedron_has_lip_orthants():
    octa = builtin_domain("octahedron", {"a": 2.0, "b": 2.0, "height": 1.0})
    found = find_lip_orthants(octa, 3)
    assert (1, 1, 1) in found
    piece = orthant_restriction(octa, (1, 1, 1), 3)
    assert domain_volume(piece) == pytest.approx(1.0 / 3.0)


def test_restriction_requires_full_symmetry(unit_square):
    with pytest.raises(PreconditionError):
        orthant_restriction(unit_square, (1, 1), 1)


def test_restriction_validates_orthant(centered_square):
    with pytest.raises(InvalidInputError):
        orthant_restriction(centered_square, (1, 0), 1)
    with pytest.raises(InvalidInputError):
        orthant_restriction(centered_square, (1, 1), 3)


def test_clip_box_in_half():
    box = builtin_domain("box", {})
    half = clip_halfspace(box, (1.0, 0.0, 0.0), 0.5, "cut")
    assert domain_volume(half) == pytest.approx(0.5)
    assert "cut" in half.face_ids
