# tests/test_checks.py
import numpy as np
import pytest

from src.fem.scalar import ScalarEigenfunction, assemble_scalar, gradient_field, solve_scalar_spectrum
from src.fem.vector import DIVFREE, GRADIENT, FieldClass, VectorEigenfield
from src.verify.checks import (
    FAIL,
    INCONCLUSIVE,
    INFO,
    MIXED,
    NEGATIVE,
    PASS,
    POSITIVE,
    ZERO,
    check_hot_spots,
    check_spectral_inclusion,
    check_step1_signs,
    check_trichotomy,
    compare_eta1_mu2,
    discretization_floor,
    reference_eigenvalue,
    status_counts,
    worst_status,
)
from src.mesh.generators import generate_mesh
from src.utils.errors import PreconditionError


def _psi(index, mu, values=None):
    values = np.zeros(3) if values is None else values
    return ScalarEigenfunction(index, mu, values, 0.0, np.zeros((1, 2)))


def _field(index, eta, kind, matched=(), mismatch=0.01):
    return VectorEigenfield(index, eta, np.zeros((3, 2)), 0.0, FieldClass(kind, matched, mismatch, 0.5))


# ---------------------------
# trichotomy
# ---------------------------

def test_trichotomy_positive(square_mesh):
    grads = np.tile([1.0, 0.5], (square_mesh.n_cells, 1))
    verdict = check_trichotomy(square_mesh, grads)
    assert verdict.pattern == (POSITIVE, POSITIVE)
    assert not verdict.has_mixed
    assert verdict.to_dict()["status"] == PASS


def test_trichotomy_flips_to_the_strongest_sign(square_mesh):
    grads = np.tile([-2.0, 0.0], (square_mesh.n_cells, 1))
    verdict = check_trichotomy(square_mesh, grads)
    assert verdict.pattern == (POSITIVE, ZERO)
    assert verdict.flipped
    assert check_trichotomy(square_mesh, grads, normalize=False).pattern == (NEGATIVE, ZERO)


def test_trichotomy_mixed(square_mesh):
    grads = np.zeros((square_mesh.n_cells, 2))
    grads[:, 0] = 1.0
    grads[::2, 1] = 0.5
    grads[1::2, 1] = -0.5
    verdict = check_trichotomy(square_mesh, grads)
    assert verdict.pattern == (POSITIVE, MIXED)
    assert verdict.to_dict()["status"] == FAIL


def test_floor_absorbs_leakage(square_mesh):
    grads = np.zeros((square_mesh.n_cells, 2))
    grads[:, 0] = 1.0
    grads[::2, 1] = 1e-3
    grads[1::2, 1] = -1e-3
    assert check_trichotomy(square_mesh, grads).pattern == (POSITIVE, MIXED)
    floor = discretization_floor(4.0, 0.1)
    assert floor == pytest.approx(5e-2)
    assert discretization_floor(16.0, 0.05) == pytest.approx(floor)
    verdict = check_trichotomy(square_mesh, grads, floor=floor)
    assert verdict.pattern == (POSITIVE, ZERO)
    assert verdict.zero_threshold == pytest.approx(5e-2)


def test_trichotomy_of_the_square_eigenfunction(unit_square, square_mesh):
    system = assemble_scalar(square_mesh, unit_square.with_labels({"f3": "dirichlet"}).bc)
    psi = solve_scalar_spectrum(system, 1)[0]
    verdict = check_trichotomy(square_mesh, psi.gradients, floor=discretization_floor(psi.eigenvalue, square_mesh.h))
    assert verdict.pattern == (POSITIVE, ZERO)


def test_bad_gradient_shape(square_mesh):
    with pytest.raises(PreconditionError):
        check_trichotomy(square_mesh, np.zeros((4, 3)))


# ---------------------------
# hot spots
# ---------------------------

def test_hot_spots_hold_on_the_square(unit_square, square_mesh):
    system = assemble_scalar(square_mesh, unit_square.bc)
    psi = solve_scalar_spectrum(system, 3)[1]
    verdict = check_hot_spots(square_mesh, psi)
    assert verdict.status == PASS
    assert verdict.argmax_on_boundary and verdict.argmin_on_boundary
    assert verdict.max_faces


def test_interior_bump_fails(square_mesh):
    centre = np.array([0.5, 0.5])
    values = -np.linalg.norm(square_mesh.vertices - centre, axis=1) ** 2
    psi = ScalarEigenfunction(2, 5.0, values, 0.0, gradient_field(square_mesh, values))
    verdict = check_hot_spots(square_mesh, psi)
    assert verdict.status == FAIL
    assert not verdict.argmax_on_boundary
    assert verdict.max_distance_to_boundary == pytest.approx(0.5)
    assert verdict.max_margin < 0


def test_constant_mode_is_a_precondition(square_mesh):
    psi = ScalarEigenfunction(1, 0.0, np.ones(square_mesh.n_vertices), 0.0, np.zeros((square_mesh.n_cells, 2)))
    with pytest.raises(PreconditionError):
        check_hot_spots(square_mesh, psi)


# ---------------------------
# spectral comparison
# ---------------------------

def test_reference_skips_the_constant():
    spec = [_psi(1, 1e-13), _psi(2, 10.0), _psi(3, 10.0)]
    assert reference_eigenvalue(spec).index == 2
    with pytest.raises(PreconditionError):
        reference_eigenvalue([_psi(1, 0.0)])


def test_compare_pass_and_fail():
    spec = [_psi(1, 0.0), _psi(2, 10.0)]
    fields = [_field(1, 10.1, GRADIENT, (2,)), _field(2, 20.0, DIVFREE)]
    record = compare_eta1_mu2(spec, fields)
    assert record.status == PASS
    assert record.gap == pytest.approx(0.01)
    assert record.tau1 == 20.0
    assert record.margin == pytest.approx(1.0)

    below = [_field(1, 9.0, DIVFREE), _field(2, 10.1, GRADIENT, (2,))]
    assert compare_eta1_mu2(spec, below).status == FAIL


def test_compare_without_divergence_free_field():
    spec = [_psi(1, 0.0), _psi(2, 10.0)]
    record = compare_eta1_mu2(spec, [_field(1, 10.0, GRADIENT, (2,))])
    assert record.status == INCONCLUSIVE
    assert record.tau1 is None
    assert "raise k" in record.note


def test_compare_needs_classified_fields():
    spec = [_psi(1, 0.0), _psi(2, 10.0)]
    raw = VectorEigenfield(1, 10.0, np.zeros((3, 2)), 0.0)
    with pytest.raises(PreconditionError):
        compare_eta1_mu2(spec, [raw])
    with pytest.raises(PreconditionError):
        compare_eta1_mu2(spec, [])


def test_spectral_inclusion():
    spec = [_psi(1, 0.0), _psi(2, 10.0), _psi(3, 10.0), _psi(4, 20.0), _psi(5, 50.0)]
    fields = [
        _field(1, 10.05, GRADIENT, (2, 3)),
        _field(2, 10.05, GRADIENT, (2, 3)),
        _field(3, 20.1, GRADIENT, (4,)),
        _field(4, 30.0, DIVFREE),
    ]
    record = check_spectral_inclusion(spec, fields)
    assert record.status == PASS
    assert [m["index"] for m in record.matches] == [2, 3, 4]

    missing = check_spectral_inclusion(spec, fields[:2] + fields[3:])
    assert missing.status == FAIL


def test_spectral_inclusion_beyond_computed_fields():
    spec = [_psi(1, 0.0), _psi(2, 10.0), _psi(3, 35.0)]
    record = check_spectral_inclusion(spec, [_field(1, 10.0, GRADIENT, (2,))])
    assert record.status == INCONCLUSIVE


# ---------------------------
# first eigenfield signs
# ---------------------------

def test_step1_signs():
    values = np.array([[1.0, 0.0], [0.5, 1e-9], [0.2, -1e-9]])
    record = check_step1_signs(VectorEigenfield(1, 1.0, values, 0.0))
    assert record.status == PASS
    assert [c["verdict"] for c in record.components] == [POSITIVE, ZERO]

    values = np.array([[1.0, 0.3], [-0.5, -0.3], [0.2, 0.0]])
    record = check_step1_signs(VectorEigenfield(1, 1.0, values, 0.0))
    assert record.status == FAIL
    assert record.components[0]["verdict"] == MIXED


# ---------------------------
# aggregation
# ---------------------------

def test_worst_status():
    assert worst_status([PASS, INFO, PASS]) == PASS
    assert worst_status([PASS, INCONCLUSIVE]) == INCONCLUSIVE
    assert worst_status([INCONCLUSIVE, FAIL, PASS]) == FAIL
    assert worst_status([INFO]) == PASS


def test_status_counts():
    counts = status_counts([PASS, PASS, INFO, FAIL])
    assert counts == {PASS: 2, FAIL: 1, INCONCLUSIVE: 0, INFO: 1}


def test_zero_direction_of_the_mixed_square_at_h16(unit_square):
    domain = unit_square.with_labels({"f3": "dirichlet"})
    mesh = generate_mesh(domain, 1 / 16)
    psi = solve_scalar_spectrum(assemble_scalar(mesh, domain.bc), 1)[0]
    floor = discretization_floor(psi.eigenvalue, mesh.h)
    verdict = check_trichotomy(mesh, psi.gradients, floor=floor)
    assert verdict.pattern == (POSITIVE, ZERO)
    assert verdict.zero_threshold >= floor
