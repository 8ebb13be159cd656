# src/pipeline/pipeline_runner.py
"""
Verification suite runner.

Stages:
--------------------------------
1. Classify the domain (lip predicate, symmetry planes, exterior-ball flag)
2. Mesh it once at the requested size
3. Solve the spectra the selected suite needs (scalar mixed, scalar Neumann,
   vector operator A with classified eigenfields)
4. Run the independent checks on a thread pool capped by HOTSPOTS_THREADS
5. Assemble the report in declaration order

Checks that rest on a hypothesis the domain does not meet (not lip, no
exterior ball declared) still run; their verdicts are recorded as info.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.fem.eigensolve import cluster_summary
from src.fem.scalar import GradientProjector, ScalarEigenfunction, assemble_scalar, solve_scalar_spectrum
from src.fem.vector import DIVFREE, GRADIENT, VectorEigenfield, assemble_vector_A, classify_spectrum, solve_A_spectrum
from src.geometry.domain import DomainSpec
from src.geometry.lip import LipVerdict, is_lip
from src.geometry.symmetry import detect_symmetries
from src.mesh.generators import generate_mesh
from src.mesh.mesh import Mesh
from src.utils.config import (
    CLASS_TOL,
    CLUSTER_GAP,
    COMPARE_TOL,
    EIG_TOL,
    EIG_WINDOW,
    REPORT_SCHEMA,
    SEED,
    SIGN_TOL,
    THREADS,
    ZERO_TOL,
)
from src.utils.errors import InvalidInputError, PreconditionError
from src.utils.logger import get_logger
from src.verify.checks import (
    FAIL,
    INFO,
    PASS,
    check_hot_spots,
    check_rayleigh_bounds,
    check_spectral_inclusion,
    check_step1_signs,
    check_trichotomy,
    cluster_members,
    compare_eta1_mu2,
    discretization_floor,
    reference_eigenvalue,
    status_counts,
    worst_status,
)
from src.verify.oracles import divfree_oracle, reference_oracle
from src.verify.symmetric import symmetric_pipeline

logger = get_logger("pipeline_runner")

SUITES = ("hotspots", "trichotomy", "spectral", "symmetric", "curlcurl", "all")

# which solves each suite needs
_NEEDS = {
    "hotspots": {"neumann"},
    "trichotomy": {"scalar"},
    "spectral": {"scalar", "vector"},
    "curlcurl": {"scalar", "vector"},
    "symmetric": set(),
}


# --------------------------------------
# SETTINGS / RESULTS
# --------------------------------------
@dataclass(frozen=True)
class SuiteSettings:
    h: float
    k: int = 8
    j: int = 1
    seed: int = SEED
    tol: float = EIG_TOL
    sign_tol: float = SIGN_TOL
    zero_tol: float = ZERO_TOL
    compare_tol: float = COMPARE_TOL
    class_tol: float = CLASS_TOL
    eig_window: float = EIG_WINDOW
    threads: int = THREADS

    def tolerances(self) -> dict:
        return {
            "eig_tol": self.tol,
            "sign_tol": self.sign_tol,
            "zero_tol": self.zero_tol,
            "compare_tol": self.compare_tol,
            "class_tol": self.class_tol,
            "eig_window": self.eig_window,
            "cluster_gap": CLUSTER_GAP,
        }


@dataclass
class CheckResult:
    name: str
    status: str
    detail: dict
    note: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "status": self.status}
        out.update((k, v) for k, v in self.detail.items() if k != "status")
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class VerificationOutcome:
    report: dict
    status: str
    fields: Dict[str, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)


@dataclass
class _Solved:
    mesh: Mesh
    scalar: List[ScalarEigenfunction] = field(default_factory=list)
    neumann: List[ScalarEigenfunction] = field(default_factory=list)
    vector_system: object = None
    fields: List[VectorEigenfield] = field(default_factory=list)
    dirichlet_lambda1: Optional[float] = None


# --------------------------------------
# HYPOTHESES
# --------------------------------------
def hypotheses(domain: DomainSpec, lip: LipVerdict) -> dict:
    notes = []
    if not lip.is_lip:
        notes.append("domain is not lip under any signed axis permutation")
    if not domain.exterior_ball_declared:
        notes.append("exterior ball condition declared unsatisfied")
    return {
        "lip": lip.is_lip,
        "exterior_ball": domain.exterior_ball_declared,
        "satisfied": not notes,
        "note": "; ".join(notes),
    }


def _gated(result: CheckResult, satisfied: bool) -> CheckResult:
    if satisfied or result.status == INFO:
        return result
    note = f"hypothesis unsatisfied, outcome would be {result.status}"
    return CheckResult(result.name, INFO, result.detail, "; ".join(n for n in (result.note, note) if n))


def _oriented(lip: LipVerdict, vectors: np.ndarray) -> np.ndarray:
    """Express vectors in the frame where the domain is lip."""
    return lip.rotation_applied.apply(vectors) if lip.rotation_applied is not None else vectors


# --------------------------------------
# SOLVES
# --------------------------------------
def _solve(domain: DomainSpec, suites: List[str], settings: SuiteSettings, timings: Dict[str, float]) -> _Solved:
    needs = set().union(*(_NEEDS[s] for s in suites))
    t0 = time.perf_counter()
    mesh = generate_mesh(domain, settings.h)
    timings["mesh"] = time.perf_counter() - t0
    logger.info(f"🧱 mesh: {mesh.n_vertices} vertices, {mesh.n_cells} cells, h={mesh.h:.4g}")
    solved = _Solved(mesh)
    if not needs:
        return solved

    t0 = time.perf_counter()
    k_vector = max(settings.k, 4 * mesh.dim)
    k_scalar = min(k_vector + 2, mesh.n_vertices - 1)
    scalar_system = None
    if needs & {"scalar", "vector"}:
        scalar_system = assemble_scalar(mesh, domain.bc)
        solved.scalar = solve_scalar_spectrum(scalar_system, min(k_scalar, scalar_system.n_dofs), settings.tol, settings.seed)
    if "neumann" in needs:
        if domain.dirichlet_faces() or scalar_system is None:
            neumann_system = assemble_scalar(mesh, domain.all_neumann().bc)
            solved.neumann = solve_scalar_spectrum(neumann_system, k_scalar, settings.tol, settings.seed)
        else:
            solved.neumann = solved.scalar
    timings["scalar_solve"] = time.perf_counter() - t0

    if "vector" in needs:
        t0 = time.perf_counter()
        system = assemble_vector_A(mesh, domain.bc, scalar_system)
        k_vector = min(k_vector, system.basis.shape[1] - 1)
        fields = solve_A_spectrum(system, k_vector, settings.tol, settings.seed)
        solved.fields = classify_spectrum(system, fields, solved.scalar, domain.bc, settings.eig_window, settings.class_tol)
        solved.vector_system = system
        dirichlet = assemble_scalar(mesh, domain.bc, dirichlet_everywhere=True)
        solved.dirichlet_lambda1 = solve_scalar_spectrum(dirichlet, 1, settings.tol, settings.seed)[0].eigenvalue
        timings["vector_solve"] = time.perf_counter() - t0
    return solved


# --------------------------------------
# CHECK BUILDERS
# --------------------------------------
def _hot_spot_checks(solved: _Solved) -> List[Callable[[], CheckResult]]:
    ref = reference_eigenvalue(solved.neumann)
    cluster = cluster_members(solved.neumann, ref, CLUSTER_GAP)

    def run(psi: ScalarEigenfunction) -> CheckResult:
        verdict = check_hot_spots(solved.mesh, psi)
        return CheckResult(f"hot_spots[{psi.index}]", verdict.status, {"mu": psi.eigenvalue, **verdict.to_dict()}, verdict.note)

    return [lambda psi=psi: run(psi) for psi in cluster]


def _trichotomy_checks(solved: _Solved, lip: LipVerdict, settings: SuiteSettings) -> List[Callable[[], CheckResult]]:
    ref = reference_eigenvalue(solved.scalar)
    cluster = cluster_members(solved.scalar, ref, CLUSTER_GAP)
    floor = discretization_floor(ref.eigenvalue, solved.mesh.h)

    def run(psi: ScalarEigenfunction) -> CheckResult:
        verdict = check_trichotomy(solved.mesh, _oriented(lip, psi.gradients), settings.sign_tol, settings.zero_tol, floor)
        detail = {"eigenvalue": psi.eigenvalue, **verdict.to_dict()}
        return CheckResult(f"trichotomy[{psi.index}]", detail.pop("status"), detail)

    return [lambda psi=psi: run(psi) for psi in cluster]


def _spectral_checks(solved: _Solved, lip: LipVerdict, settings: SuiteSettings):
    mesh, fields, scalar = solved.mesh, solved.fields, solved.scalar
    system = solved.vector_system
    first = fields[0]
    ref = reference_eigenvalue(scalar)

    def comparison() -> CheckResult:
        rec = compare_eta1_mu2(scalar, fields, settings.compare_tol)
        return CheckResult("eta1_vs_reference", rec.status, rec.to_dict(), rec.note)

    def inclusion() -> CheckResult:
        rec = check_spectral_inclusion(scalar, fields, tolerance=settings.eig_window)
        return CheckResult("spectral_inclusion", rec.status, rec.to_dict())

    def rayleigh() -> CheckResult:
        projector = GradientProjector(mesh, system.scalar.mass)
        rec = check_rayleigh_bounds(system, first, ref, seed=settings.seed, projector=projector)
        return CheckResult("rayleigh_bounds", rec.status, rec.to_dict())

    def step1() -> CheckResult:
        oriented = VectorEigenfield(first.index, first.eigenvalue, _oriented(lip, first.values), first.residual, first.classification)
        rec = check_step1_signs(oriented, settings.sign_tol, settings.zero_tol, discretization_floor(first.eigenvalue, mesh.h))
        return CheckResult("first_field_signs", rec.status, rec.to_dict())

    def minimizer() -> CheckResult:
        kind = first.classification.kind
        return CheckResult(
            "first_field_gradient_type",
            PASS if kind == GRADIENT else FAIL,
            {"kind": kind, "classification": first.classification.to_dict()},
        )

    def flags() -> CheckResult:
        detail = {
            "boundary_term_active": system.boundary_term_active,
            "corner_flag": system.corner_flag,
            "clamped_vertices": int(len(system.clamped_vertices)),
            "clamped_fraction": system.clamped_fraction,
        }
        return CheckResult("vector_assembly_flags", INFO, detail)

    def dirichlet_identification() -> CheckResult:
        divfree = [f.eigenvalue for f in fields if f.classification.kind == DIVFREE]
        lam = solved.dirichlet_lambda1
        if mesh.dim == 2:
            tau1 = min(divfree) if divfree else None
            gap = abs(tau1 - lam) / lam if tau1 is not None else None
            return CheckResult("tau1_vs_dirichlet", INFO, {"tau1": tau1, "dirichlet_lambda1": lam, "relative_gap": gap})
        below = sum(1 for t in divfree if t < lam)
        return CheckResult("divfree_below_dirichlet", INFO, {"count": below, "dirichlet_lambda1": lam, "divfree": divfree})

    return [comparison, inclusion, rayleigh, step1, minimizer], [flags, dirichlet_identification]


def _curlcurl_checks(solved: _Solved, domain: DomainSpec, settings: SuiteSettings):
    fields, scalar = solved.fields, solved.scalar

    def margin() -> CheckResult:
        rec = compare_eta1_mu2(scalar, fields, settings.compare_tol)
        detail = rec.to_dict()
        status = rec.status
        if rec.margin is not None:
            status = PASS if rec.margin > 0 else FAIL
        return CheckResult("tau1_margin", status, detail, rec.note)

    def oracle() -> CheckResult:
        expected_ref, expected_tau = reference_oracle(domain), divfree_oracle(domain)
        divfree = [f.eigenvalue for f in fields if f.classification.kind == DIVFREE]
        detail = {
            "reference_oracle": expected_ref,
            "divfree_oracle": expected_tau,
            "tau1": min(divfree) if divfree else None,
            "reference": reference_eigenvalue(scalar).eigenvalue,
        }
        if expected_ref and expected_tau:
            detail["oracle_margin"] = (expected_tau - expected_ref) / expected_ref
        return CheckResult("curlcurl_oracle", INFO, detail)

    return [margin], [oracle]


def _symmetric_check(domain: DomainSpec, settings: SuiteSettings, required: bool) -> Callable[[], CheckResult]:
    def run() -> CheckResult:
        try:
            rep = symmetric_pipeline(
                domain, settings.j, settings.h, k=4, tol=settings.tol, seed=settings.seed,
                sign_tol=settings.sign_tol, zero_tol=settings.zero_tol,
            )
        except PreconditionError as e:
            if required:
                raise
            return CheckResult("symmetric", INFO, {}, f"skipped: {e}")
        detail = rep.to_dict()
        return CheckResult("symmetric", detail.pop("status"), detail)

    return run


# --------------------------------------
# EXECUTION
# --------------------------------------
def _run_parallel(tasks: List[Callable[[], CheckResult]], threads: int) -> List[CheckResult]:
    if threads <= 1 or len(tasks) <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=min(threads, len(tasks))) as pool:
        futures = [pool.submit(t) for t in tasks]
        return [f.result() for f in futures]


def _expand(suite: str) -> List[str]:
    if suite not in SUITES:
        raise InvalidInputError(f"unknown suite '{suite}'; choose one of {list(SUITES)}")
    return [s for s in SUITES if s != "all"] if suite == "all" else [suite]


def run_verification(
    domain: DomainSpec,
    suite: str,
    settings: SuiteSettings,
    timestamp: bool = True,
) -> VerificationOutcome:
    suites = _expand(suite)
    name = domain.name or "domain"
    logger.info("===================================================")
    logger.info(f"🚀 verify {name}: suite={suite}, h={settings.h}, k={settings.k}")
    logger.info("===================================================")

    timings: Dict[str, float] = {}
    t_start = time.perf_counter()
    lip = is_lip(domain, search_orientations=True)
    hyp = hypotheses(domain, lip)
    if not hyp["satisfied"]:
        logger.warning(f"⚠️ {name}: {hyp['note']}; theorem-backed verdicts are informational")

    solved = _solve(domain, suites, settings, timings)
    satisfied = hyp["satisfied"]

    gated: List[Callable[[], CheckResult]] = []
    plain: List[Callable[[], CheckResult]] = []
    if "hotspots" in suites:
        gated += _hot_spot_checks(solved)
    if "trichotomy" in suites:
        gated += _trichotomy_checks(solved, lip, settings)
    if "spectral" in suites:
        g, p = _spectral_checks(solved, lip, settings)
        gated += g
        plain += p
    if "curlcurl" in suites:
        g, p = _curlcurl_checks(solved, domain, settings)
        gated += g
        plain += p
    if "symmetric" in suites:
        plain.append(_symmetric_check(domain, settings, required=suite == "symmetric"))

    t0 = time.perf_counter()
    results = _run_parallel(gated + plain, settings.threads)
    timings["checks"] = time.perf_counter() - t0
    results = [_gated(r, satisfied) for r in results[: len(gated)]] + results[len(gated):]
    timings["total"] = time.perf_counter() - t_start

    statuses = [r.status for r in results]
    status = worst_status(statuses)
    for r in results:
        icon = {PASS: "✅", FAIL: "❌", INFO: "📄"}.get(r.status, "⚠️")
        logger.info(f"{icon} {r.name}: {r.status}")
    logger.info(f"🏁 {name}: {status} {status_counts(statuses)}")

    report = {"schema": REPORT_SCHEMA}
    if timestamp:
        report["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    report.update({
        "command": "verify",
        "suite": suite,
        "domain": domain.describe(),
        "symmetry_planes": list(detect_symmetries(domain)),
        "lip": lip.to_dict(),
        "hypotheses": hyp,
        "mesh": solved.mesh.stats(),
        "settings": {"h": settings.h, "k": settings.k, "j": settings.j, "seed": settings.seed},
        "tolerances": settings.tolerances(),
        "spectra": {
            "scalar": [e.to_dict() for e in solved.scalar],
            "neumann": [e.to_dict() for e in solved.neumann] if solved.neumann is not solved.scalar else "same as scalar",
            "A": [f.to_dict() for f in solved.fields],
            "clusters": {
                "scalar": cluster_summary([e.eigenvalue for e in solved.scalar], CLUSTER_GAP),
                "neumann": cluster_summary([e.eigenvalue for e in solved.neumann], CLUSTER_GAP),
                "A": cluster_summary([f.eigenvalue for f in solved.fields], CLUSTER_GAP),
            },
        },
        "checks": [_without_timings(r.to_dict(), timestamp) for r in results],
        "summary": {"status": status, "counts": status_counts(statuses)},
    })
    if timestamp:
        report["timings"] = timings

    exported = {}
    reference_spectrum = solved.scalar or solved.neumann
    if reference_spectrum:
        exported["psi"] = (solved.mesh.vertices, reference_eigenvalue(reference_spectrum).values)
    if solved.fields:
        exported["u1"] = (solved.mesh.vertices, solved.fields[0].values)
    return VerificationOutcome(report, status, exported)


def _without_timings(entry: dict, keep: bool) -> dict:
    if not keep:
        entry.pop("timings", None)
    return entry
