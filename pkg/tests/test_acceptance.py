# tests/test_acceptance.py
"""Oracle and property cases at production mesh sizes."""

import numpy as np
import pytest

from src.fem.eigensolve import cluster_eigenvalues
from src.fem.scalar import assemble_scalar, solve_scalar_spectrum
from src.fem.vector import assemble_vector_A
from src.geometry.builtins import builtin_domain
from src.geometry.lip import is_lip
from src.mesh.generators import generate_mesh
from src.pipeline.pipeline_runner import SuiteSettings, run_verification
from src.verify.checks import (
    FAIL,
    INCONCLUSIVE,
    MIXED,
    PASS,
    POSITIVE,
    ZERO,
    check_hot_spots,
    check_trichotomy,
    discretization_floor,
)
from src.verify.convergence import convergence_study
from src.verify.symmetric import symmetric_pipeline

pytestmark = pytest.mark.slow

PI2 = np.pi ** 2


def _checks(outcome):
    return {c["name"]: c for c in outcome.report["checks"]}


def test_square_oracle(unit_square):
    mesh = generate_mesh(unit_square, 1 / 64)
    spectrum = solve_scalar_spectrum(assemble_scalar(mesh, unit_square.bc), 4)
    assert spectrum[1].eigenvalue == pytest.approx(PI2, rel=0.01)
    clusters = cluster_eigenvalues([e.eigenvalue for e in spectrum])
    assert [1, 2] in clusters


@pytest.mark.parametrize("h", [1 / 32, 1 / 64])
def test_mixed_square_oracle(unit_square, h):
    domain = unit_square.with_labels({"f3": "dirichlet"})
    mesh = generate_mesh(domain, h)
    psi = solve_scalar_spectrum(assemble_scalar(mesh, domain.bc), 2)[0]
    assert psi.eigenvalue == pytest.approx(PI2 / 4, rel=0.02)
    verdict = check_trichotomy(mesh, psi.gradients, floor=discretization_floor(psi.eigenvalue, mesh.h))
    assert verdict.pattern == (POSITIVE, ZERO)
    assert mesh.vertices[int(np.argmax(psi.values)), 0] == pytest.approx(1.0)


def test_disk_oracle():
    disk = builtin_domain("disk", {"radius": 1.0})
    mesh = generate_mesh(disk, 0.05)
    spectrum = solve_scalar_spectrum(assemble_scalar(mesh, disk.bc), 3)
    assert spectrum[1].eigenvalue == pytest.approx(1.841183781 ** 2, rel=0.02)
    assert assemble_vector_A(mesh, disk.bc).boundary_term_active


def test_double_prism():
    prism = builtin_domain("double_prism", {})
    assert is_lip(prism, search_orientations=True).is_lip
    outcome = run_verification(prism, "hotspots", SuiteSettings(h=0.08), timestamp=False)
    assert all(c["status"] == PASS for c in outcome.report["checks"])
    outcome = run_verification(prism, "trichotomy", SuiteSettings(h=0.08), timestamp=False)
    for check in outcome.report["checks"]:
        assert MIXED not in [d["verdict"] for d in check["directions"]]
    checks = _checks(run_verification(prism, "spectral", SuiteSettings(h=0.08), timestamp=False))
    assert checks["eta1_vs_reference"]["gap"] <= 0.02
    assert checks["first_field_gradient_type"]["status"] == PASS
    assert checks["spectral_inclusion"]["status"] != FAIL


def test_octahedron_symmetric_pipeline():
    octa = builtin_domain("octahedron", {"a": 2.0, "b": 2.0, "height": 1.0})
    report = symmetric_pipeline(octa, 3, 0.1)
    assert report.agreement <= 0.01
    assert report.trichotomy["status"] == PASS
    assert report.hot_spots["status"] == PASS


def test_hot_spots_on_mixed_square_edge(unit_square):
    domain = unit_square.with_labels({"f3": "dirichlet"})
    mesh = generate_mesh(domain, 1 / 32)
    psi = solve_scalar_spectrum(assemble_scalar(mesh, domain.bc), 1)[0]
    verdict = check_hot_spots(mesh, psi)
    assert "f1" in verdict.max_faces


def test_cube_gradient_and_curl_spectra():
    cube = builtin_domain("box", {})
    outcome = run_verification(cube, "curlcurl", SuiteSettings(h=1 / 12), timestamp=False)
    report = outcome.report
    scalar_clusters = report["spectra"]["clusters"]["scalar"]
    assert scalar_clusters[1]["dimension"] == 3
    assert scalar_clusters[1]["eigenvalue"] == pytest.approx(PI2, rel=0.03)
    margin = _checks(outcome)["tau1_margin"]
    assert margin["status"] == PASS
    assert margin["eta1"] == pytest.approx(PI2, rel=0.03)
    assert margin["tau1"] == pytest.approx(2 * PI2, rel=0.07)
    assert margin["margin"] > 0


def test_disk_divergence_free_eigenvalue():
    disk = builtin_domain("disk", {"radius": 1.0})
    outcome = run_verification(disk, "curlcurl", SuiteSettings(h=0.05), timestamp=False)
    oracle = _checks(outcome)["curlcurl_oracle"]
    assert oracle["divfree_oracle"] == pytest.approx(2.404825558 ** 2)
    assert oracle["tau1"] == pytest.approx(5.783185962, rel=0.03)


def test_cube_converges_at_second_order():
    study = convergence_study(builtin_domain("box", {}), 3, 0.25)
    assert study.reference == pytest.approx(PI2)
    assert 1.6 <= study.observed_order <= 2.4
    assert study.monotone


@pytest.mark.parametrize(
    "name, params, h",
    [("rectangle", {}, 1 / 32), ("disk", {"radius": 1.0}, 0.05), ("box", {}, 1 / 12)],
)
def test_spectral_inclusion_on_computed_spectra(name, params, h):
    domain = builtin_domain(name, params)
    outcome = run_verification(domain, "spectral", SuiteSettings(h=h, k=16), timestamp=False)
    inclusion = _checks(outcome)["spectral_inclusion"]
    assert inclusion["status"] in (PASS, INCONCLUSIVE)
    statuses = [m["status"] for m in inclusion["matches"]]
    assert FAIL not in statuses
    assert statuses.count(PASS) >= 2
    if name != "box":
        assert inclusion["status"] == PASS
