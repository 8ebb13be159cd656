# src/verify/symmetric.py
"""
Antisymmetric eigenfunctions of reflection-symmetric domains.

For a domain symmetric in every coordinate plane and an axis j, the first
eigenfunction that is odd in x_j and even in the other coordinates is
computed three ways:

  orthant  Ω ∩ {x ≥ 0}, Dirichlet on {x_j = 0}, Neumann elsewhere
  half     Ω ∩ {x_j ≥ 0}, Dirichlet on {x_j = 0}, Neumann elsewhere
  full     the orthant eigenfunction unfolded onto Ω by reflection

The half and full meshes are mirror images of the orthant mesh, so the
orthant and half problems share their first eigenvalue up to solver error.
"""

import time
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from src.fem.scalar import ScalarEigenfunction, assemble_scalar, gradient_field, solve_scalar_spectrum
from src.geometry.domain import DomainSpec
from src.geometry.lip import is_lip
from src.geometry.symmetry import all_orthants, detect_symmetries, find_lip_orthants, orthant_restriction
from src.mesh.generators import generate_mesh, unfold_mesh
from src.utils.config import EIG_TOL, SEED, SIGN_TOL, ZERO_TOL
from src.utils.errors import InvalidInputError, PreconditionError
from src.utils.logger import get_logger
from src.verify.checks import (
    FAIL,
    NEGATIVE,
    PASS,
    POSITIVE,
    ZERO,
    check_hot_spots,
    check_trichotomy,
    discretization_floor,
    worst_status,
)

logger = get_logger("symmetric")

AGREEMENT_TOL = 0.01
RECONSTRUCTION_FACTOR = 100.0


@dataclass
class SymmetricReport:
    axis: int
    lip_orthants: List[Tuple[int, ...]]
    orthant_rotation: dict
    mesh_sizes: Dict[str, dict]
    orthant_eigenvalues: List[float]
    half_eigenvalues: List[float]
    agreement: float
    agreement_tol: float
    simplicity_gap: float
    trichotomy: dict
    hot_spots: dict
    reconstruction_residual: float
    reconstruction_tol: float
    reconstruction_status: str
    zero_set: dict
    orthant_patterns: Dict[str, List[str]]
    pattern_consistent: bool
    status: str
    timings: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "lip_orthants": [list(o) for o in self.lip_orthants],
            "orthant_rotation": self.orthant_rotation,
            "mesh": self.mesh_sizes,
            "orthant_eigenvalues": self.orthant_eigenvalues,
            "half_eigenvalues": self.half_eigenvalues,
            "agreement": {"relative": self.agreement, "tolerance": self.agreement_tol},
            "simplicity_gap": self.simplicity_gap,
            "trichotomy": self.trichotomy,
            "hot_spots": self.hot_spots,
            "reconstruction": {
                "residual": self.reconstruction_residual,
                "tolerance": self.reconstruction_tol,
                "status": self.reconstruction_status,
            },
            "zero_set": self.zero_set,
            "orthant_patterns": self.orthant_patterns,
            "pattern_consistent": self.pattern_consistent,
            "status": self.status,
            "timings": self.timings,
        }


def reconstruct(
    psi: ScalarEigenfunction,
    full_mesh,
    provenance,
    axis: int,
    full_bc,
) -> ScalarEigenfunction:
    """Odd extension in x_axis, even in every other coordinate, M-normalized on the full mesh."""
    values = psi.values[provenance.source] * provenance.sign([axis])
    system = assemble_scalar(full_mesh, full_bc)
    M, K = system.mass, system.stiffness
    values = values / np.sqrt(values @ (M @ values))
    Mv = M @ values
    residual = float(np.linalg.norm(K @ values - psi.eigenvalue * Mv) / np.linalg.norm(Mv))
    return ScalarEigenfunction(psi.index, psi.eigenvalue, values, residual, gradient_field(full_mesh, values))


def _zero_set(mesh, values: np.ndarray, axis: int, sign_tol: float) -> dict:
    """The reconstruction must keep one sign on {x_axis > 0}."""
    coord = mesh.vertices[:, axis - 1]
    scale = max(1.0, float(np.max(np.abs(mesh.vertices))))
    side = values[coord > 1e-9 * scale]
    peak = float(np.max(np.abs(side))) if len(side) else 0.0
    if peak == 0.0:
        return {"status": FAIL, "margin": 0.0, "sign_tol": sign_tol}
    margin = max(float(np.min(side)), float(np.min(-side))) / peak
    return {"status": PASS if margin >= -sign_tol else FAIL, "margin": margin, "sign_tol": sign_tol}


def _orthant_patterns(mesh, gradients: np.ndarray, sign_tol: float, zero_tol: float, floor: float):
    centroids = mesh.vertices[mesh.cells].mean(axis=1)
    out = {}
    for orthant in all_orthants(mesh.dim):
        mask = np.all(centroids * np.array(orthant) > 0, axis=1)
        if not mask.any():
            continue
        verdict = check_trichotomy(mesh, gradients[mask], sign_tol, zero_tol, floor, normalize=False)
        out[tuple(orthant)] = list(verdict.pattern)
    return out


def _pattern_consistent(patterns, axis: int) -> bool:
    """∂_iψ on orthant o carries the sign o_i·o_axis relative to the positive orthant."""
    dim = len(next(iter(patterns)))
    base = patterns.get(tuple([1] * dim))
    if base is None:
        return False
    flip = {POSITIVE: NEGATIVE, NEGATIVE: POSITIVE}
    for orthant, pattern in patterns.items():
        for i, (got, ref) in enumerate(zip(pattern, base)):
            if ref not in (POSITIVE, NEGATIVE, ZERO):
                return False
            s = orthant[i] * orthant[axis - 1]
            want = ref if (s > 0 or ref == ZERO) else flip[ref]
            if got != want:
                return False
    return True


def symmetric_pipeline(
    domain: DomainSpec,
    j: int,
    h: float,
    k: int = 4,
    tol: float = EIG_TOL,
    seed: int = SEED,
    sign_tol: float = SIGN_TOL,
    zero_tol: float = ZERO_TOL,
    agreement_tol: float = AGREEMENT_TOL,
) -> SymmetricReport:
    dim = domain.dim
    if not 1 <= j <= dim:
        raise InvalidInputError(f"axis j={j} out of range 1..{dim}")
    planes = detect_symmetries(domain)
    if set(planes) != set(range(1, dim + 1)):
        raise PreconditionError(
            f"{domain.name or 'domain'} must be symmetric in every coordinate plane "
            f"(found {list(planes)}) and meet a lip domain in some orthant"
        )
    lip_orthants = find_lip_orthants(domain, j)
    if not lip_orthants:
        raise PreconditionError(
            f"no orthant O makes Ω ∩ O a lip domain for {domain.name or 'domain'}; "
            "the antisymmetric eigenfunction statement needs one"
        )

    timings: Dict[str, float] = {}
    t0 = time.perf_counter()
    positive = tuple([1] * dim)
    orthant = orthant_restriction(domain, positive, j)
    half = orthant_restriction(domain, positive, j, half_only=True)
    others = [a for a in range(1, dim + 1) if a != j]

    orth_mesh = generate_mesh(orthant, h)
    half_mesh, _ = unfold_mesh(orth_mesh, half, others) if others else (orth_mesh, None)
    full_mesh, provenance = unfold_mesh(orth_mesh, domain, others + [j])
    timings["mesh"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    k = min(k, orth_mesh.n_vertices - 1)
    orth_spec = solve_scalar_spectrum(assemble_scalar(orth_mesh, orthant.bc), k, tol, seed)
    half_spec = solve_scalar_spectrum(assemble_scalar(half_mesh, half.bc), min(k, half_mesh.n_vertices - 1), tol, seed)
    timings["solve"] = time.perf_counter() - t0

    lam = orth_spec[0].eigenvalue
    agreement = abs(half_spec[0].eigenvalue - lam) / lam
    gap = (orth_spec[1].eigenvalue - lam) / lam if len(orth_spec) > 1 else float("nan")

    floor = discretization_floor(lam, orth_mesh.h)
    trich = check_trichotomy(orth_mesh, orth_spec[0].gradients, sign_tol, zero_tol, floor)

    psi_full = reconstruct(orth_spec[0], full_mesh, provenance, j, domain.all_neumann().bc)
    hot = check_hot_spots(full_mesh, psi_full)
    zero_set = _zero_set(full_mesh, psi_full.values, j, sign_tol)
    patterns = _orthant_patterns(full_mesh, psi_full.gradients, sign_tol, zero_tol, floor)
    consistent = _pattern_consistent(patterns, j)
    # the mirrored mesh reproduces the orthant equations row for row
    reconstruction_tol = RECONSTRUCTION_FACTOR * tol
    reconstruction_status = PASS if psi_full.residual <= reconstruction_tol else FAIL

    statuses = [
        PASS if agreement <= agreement_tol else FAIL,
        reconstruction_status,
        FAIL if trich.has_mixed else PASS,
        hot.status,
        zero_set["status"],
        PASS if consistent else FAIL,
    ]
    status = worst_status(statuses)
    rotation = is_lip(orthant, search_orientations=True).rotation_applied
    logger.info(
        f"🪞 symmetric j={j} on {domain.name or 'domain'}: orthant {lam:.6g}, half {half_spec[0].eigenvalue:.6g}, "
        f"agreement {agreement:.2e} → {status}"
    )
    return SymmetricReport(
        axis=j,
        lip_orthants=lip_orthants,
        orthant_rotation=rotation.to_dict() if rotation is not None else {},
        mesh_sizes={"orthant": orth_mesh.stats(), "half": half_mesh.stats(), "full": full_mesh.stats()},
        orthant_eigenvalues=[e.eigenvalue for e in orth_spec],
        half_eigenvalues=[e.eigenvalue for e in half_spec],
        agreement=agreement,
        agreement_tol=agreement_tol,
        simplicity_gap=gap,
        trichotomy=trich.to_dict(),
        hot_spots=hot.to_dict(),
        reconstruction_residual=psi_full.residual,
        reconstruction_tol=reconstruction_tol,
        reconstruction_status=reconstruction_status,
        zero_set=zero_set,
        orthant_patterns={",".join(f"{s:+d}" for s in o): p for o, p in patterns.items()},
        pattern_consistent=consistent,
        status=status,
        timings=timings,
    )
