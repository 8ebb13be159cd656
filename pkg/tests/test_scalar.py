# tests/test_scalar.py
import numpy as np
import pytest

from src.fem.scalar import (
    GradientProjector,
    assemble_scalar,
    gradient_field,
    mass_matrix,
    reference_index,
    solve_scalar_spectrum,
    stiffness_matrix,
)
from src.geometry.builtins import builtin_domain
from src.mesh.generators import generate_mesh
from src.utils.errors import InvalidInputError, MeshValidationError

PI2 = np.pi ** 2


def test_mass_and_stiffness_structure(square_mesh):
    M = mass_matrix(square_mesh)
    K = stiffness_matrix(square_mesh)
    assert M.sum() == pytest.approx(1.0)
    assert np.allclose(np.asarray(K.sum(axis=1)).ravel(), 0.0, atol=1e-12)
    assert abs(K - K.T).max() < 1e-14
    ones = np.ones(square_mesh.n_vertices)
    assert ones @ (K @ ones) == pytest.approx(0.0, abs=1e-12)


def test_unit_square_neumann(unit_square, fine_square_mesh):
    system = assemble_scalar(fine_square_mesh, unit_square.bc)
    assert not system.has_dirichlet
    assert reference_index(system) == 1
    spectrum = solve_scalar_spectrum(system, 4)
    assert abs(spectrum[0].eigenvalue) < 1e-8
    assert spectrum[1].eigenvalue == pytest.approx(PI2, rel=0.03)
    assert spectrum[2].eigenvalue == pytest.approx(spectrum[1].eigenvalue, rel=1e-8)
    assert spectrum[3].eigenvalue == pytest.approx(2 * PI2, rel=0.08)
    M = system.mass
    for psi in spectrum:
        assert psi.values @ (M @ psi.values) == pytest.approx(1.0)
        assert psi.gradients.shape == (fine_square_mesh.n_cells, 2)


def test_rectangle_second_eigenvalue():
    rect = builtin_domain("rectangle", {"a": 1.0, "b": 2.0})
    system = assemble_scalar(generate_mesh(rect, 0.1), rect.bc)
    spectrum = solve_scalar_spectrum(system, 2)
    assert spectrum[1].eigenvalue == pytest.approx(PI2 / 4, rel=0.03)


def test_mixed_conditions_fix_one_side(unit_square, fine_square_mesh):
    domain = unit_square.with_labels({"f3": "dirichlet"})
    system = assemble_scalar(fine_square_mesh, domain.bc)
    assert system.has_dirichlet
    assert reference_index(system) == 0
    assert np.allclose(fine_square_mesh.vertices[system.dirichlet_vertices, 0], 0.0)
    spectrum = solve_scalar_spectrum(system, 2)
    assert spectrum[0].eigenvalue == pytest.approx(PI2 / 4, rel=0.03)
    assert np.all(spectrum[0].values[system.dirichlet_vertices] == 0.0)


def test_dirichlet_everywhere(unit_square, fine_square_mesh):
    system = assemble_scalar(fine_square_mesh, unit_square.bc, dirichlet_everywhere=True)
    spectrum = solve_scalar_spectrum(system, 1)
    assert spectrum[0].eigenvalue == pytest.approx(2 * PI2, rel=0.05)


def test_labels_must_cover_the_boundary(square_mesh):
    with pytest.raises(MeshValidationError, match="without a label"):
        assemble_scalar(square_mesh, {"f0": "neumann"})
    labels = {f: "neumann" for f in square_mesh.facet_ids}
    labels["f1"] = "robin"
    with pytest.raises(MeshValidationError, match="unknown boundary condition"):
        assemble_scalar(square_mesh, labels)


def test_too_many_eigenpairs(unit_square, square_mesh):
    system = assemble_scalar(square_mesh, unit_square.bc)
    with pytest.raises(InvalidInputError):
        solve_scalar_spectrum(system, system.n_dofs + 1)


def test_gradient_of_linear_function(square_mesh):
    x = square_mesh.vertices[:, 0]
    grads = gradient_field(square_mesh, 2.0 * x - square_mesh.vertices[:, 1])
    assert np.allclose(grads, [2.0, -1.0])
    with pytest.raises(InvalidInputError):
        gradient_field(square_mesh, x[:-1])


def test_projected_gradient_exact_on_linear_functions(square_mesh):
    projector = GradientProjector(square_mesh)
    g = projector.project(3.0 * square_mesh.vertices[:, 1])
    assert np.allclose(g, [0.0, 3.0])
