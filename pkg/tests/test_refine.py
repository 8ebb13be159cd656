# tests/test_refine.py
import numpy as np
import pytest

from src.geometry.builtins import builtin_domain
from src.mesh.generators import generate_mesh
from src.mesh.refine import refine, refine_times


def test_red_refinement_2d(square_mesh):
    fine = refine(square_mesh)
    fine.validate()
    assert fine.n_cells == 4 * square_mesh.n_cells
    assert fine.volume() == pytest.approx(1.0)
    assert fine.h == pytest.approx(square_mesh.h / 2)
    assert len(fine.facets) == 2 * len(square_mesh.facets)


def test_red_refinement_3d():
    mesh = generate_mesh(builtin_domain("box", {}), 0.5)
    fine = refine(mesh)
    assert fine.n_cells == 8 * mesh.n_cells
    assert fine.volume() == pytest.approx(1.0)
    assert fine.h < mesh.h
    assert set(fine.facet_ids) == set(mesh.facet_ids)


def test_curved_midpoints_snap_to_arc():
    mesh = generate_mesh(builtin_domain("disk", {"radius": 2.0}), 0.8)
    fine = refine(mesh)
    radii = np.linalg.norm(fine.vertices[fine.boundary_vertices], axis=1)
    assert np.allclose(radii, 2.0)
    assert fine.volume() > mesh.volume()


def test_refine_times_zero_is_identity(square_mesh):
    assert refine_times(square_mesh, 0) is square_mesh
    assert refine_times(square_mesh, 2).n_cells == 16 * square_mesh.n_cells
