# tests/test_vector.py
import numpy as np
import pytest

from src.fem.scalar import GradientProjector, assemble_scalar, solve_scalar_spectrum
from src.fem.vector import (
    DIVFREE,
    GRADIENT,
    VectorEigenfield,
    admissible_projection,
    assemble_vector_A,
    classify_eigenfield,
    classify_spectrum,
    constraint_violation,
    eigen_clusters,
    gradient_trial_field,
    random_admissible_fields,
    rayleigh_quotient,
    solve_A_spectrum,
    split_cluster,
)
from src.geometry.builtins import builtin_domain
from src.mesh.generators import generate_mesh
from src.utils.errors import PreconditionError

PI2 = np.pi ** 2


@pytest.fixture(scope="module")
def square_problem():
    domain = builtin_domain("rectangle", {})
    mesh = generate_mesh(domain, 0.1)
    scalar = assemble_scalar(mesh, domain.bc)
    neumann = solve_scalar_spectrum(scalar, 6)
    system = assemble_vector_A(mesh, domain.bc, scalar)
    fields = solve_A_spectrum(system, 4)
    return domain, system, neumann, fields


def test_flat_boundary_has_no_curvature_term(square_problem):
    _, system, _, _ = square_problem
    assert not system.boundary_term_active
    # the four corners are fully clamped
    assert len(system.clamped_vertices) == 4


def test_first_eigenvalue_matches_neumann(square_problem):
    _, _, neumann, fields = square_problem
    assert fields[0].eigenvalue == pytest.approx(PI2, rel=0.05)
    assert fields[0].eigenvalue == pytest.approx(neumann[1].eigenvalue, rel=0.05)
    assert fields[1].eigenvalue == pytest.approx(fields[0].eigenvalue, rel=1e-6)


def test_eigenfields_are_admissible(square_problem):
    _, system, _, fields = square_problem
    for f in fields:
        assert constraint_violation(system, f.values) < 1e-12
        assert rayleigh_quotient(system, f.values) == pytest.approx(f.eigenvalue, rel=1e-8)


def test_first_field_is_a_gradient(square_problem):
    domain, system, neumann, fields = square_problem
    labelled = classify_spectrum(system, fields[:1], neumann, domain.bc, tol_eig=0.1, class_tol=0.2)
    cls = labelled[0].classification
    assert cls.kind == GRADIENT
    assert set(cls.matched) == {2, 3}
    assert cls.mismatch < 0.2


def test_gradient_trial_field_is_admissible(square_problem):
    _, system, neumann, _ = square_problem
    g = gradient_trial_field(system, neumann[1])
    assert constraint_violation(system, g) < 1e-12
    assert rayleigh_quotient(system, g) == pytest.approx(neumann[1].eigenvalue, rel=0.15)


def test_admissible_projection_is_idempotent(square_problem, rng):
    _, system, _, _ = square_problem
    raw = rng.standard_normal((system.mesh.n_vertices, 2))
    once = admissible_projection(system, raw)
    assert constraint_violation(system, once) < 1e-12
    assert np.allclose(admissible_projection(system, once), once)
    for f in random_admissible_fields(system, 2, seed=3):
        assert constraint_violation(system, f) < 1e-12


def test_inadmissible_field_rejected(square_problem):
    domain, system, neumann, _ = square_problem
    constant = np.ones((system.mesh.n_vertices, 2))
    with pytest.raises(PreconditionError):
        classify_eigenfield(system, VectorEigenfield(1, 1.0, constant, 0.0), neumann, domain.bc)


def test_disk_boundary_term_is_active():
    disk = builtin_domain("disk", {})
    mesh = generate_mesh(disk, 0.4)
    system = assemble_vector_A(mesh, disk.bc)
    assert system.boundary_term_active
    assert not system.corner_flag


def test_eigen_clusters_chain_within_window():
    assert eigen_clusters([1.0, 1.02, 1.05, 2.0], 0.03) == [[0, 1, 2], [3]]
    assert eigen_clusters([1.0, 2.0], 0.03) == [[0], [1]]
    assert eigen_clusters([], 0.03) == []


def test_split_ignores_how_the_group_is_mixed(square_problem):
    _, system, neumann, fields = square_problem
    pair = fields[2:4]
    c, s = np.cos(0.7), np.sin(0.7)
    mixed = [
        VectorEigenfield(pair[0].index, pair[0].eigenvalue, c * pair[0].values + s * pair[1].values, 0.0),
        VectorEigenfield(pair[1].index, pair[1].eigenvalue, -s * pair[0].values + c * pair[1].values, 0.0),
    ]
    gradients = GradientProjector(system.mesh, system.scalar.mass).project_many([neumann[3].values])
    a = split_cluster(system, pair, gradients, class_tol=0.3)
    b = split_cluster(system, mixed, gradients, class_tol=0.3)
    assert [f.index for f in b] == [3, 4]
    for fa, fb in zip(a, b):
        assert fb.eigenvalue == pytest.approx(fa.eigenvalue, rel=1e-8)
        assert np.allclose(fb.values, fa.values, atol=1e-8 * np.abs(fa.values).max())
        assert constraint_violation(system, fb.values) < 1e-10


def test_double_eigenvalue_splits_into_gradient_and_divergence_free(square_problem):
    domain, system, neumann, fields = square_problem
    labelled = classify_spectrum(system, fields, neumann, domain.bc, tol_eig=0.1, class_tol=0.3)
    assert [f.classification.kind for f in labelled[:2]] == [GRADIENT, GRADIENT]
    pair = labelled[2:4]
    assert {f.classification.kind for f in pair} == {GRADIENT, DIVFREE}
    for f in pair:
        assert f.eigenvalue == pytest.approx(2 * PI2, rel=0.1)
    assert next(f for f in pair if f.classification.kind == GRADIENT).classification.matched == (4,)
