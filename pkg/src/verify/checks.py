# src/verify/checks.py
"""
Numerical checks behind the hot-spots statements.

Every check returns a verdict record carrying the tolerances it was judged
against; failures are verdicts, never exceptions. Only violated
preconditions (a constant eigenfunction handed to the hot-spots check, an
inadmissible field) raise.
"""

from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.fem.scalar import GradientProjector, ScalarEigenfunction
from src.fem.vector import (
    DIVFREE,
    GRADIENT,
    VectorEigenfield,
    VectorSystem,
    gradient_trial_field,
    random_admissible_fields,
    rayleigh_quotient,
)
from src.mesh.mesh import Mesh
from src.utils.config import COMPARE_TOL, EIG_WINDOW, SEED, SIGN_TOL, ZERO_TOL
from src.utils.errors import PreconditionError
from src.utils.logger import get_logger

logger = get_logger("checks")

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"
INFO = "info"

POSITIVE = "positive"
NEGATIVE = "negative"
ZERO = "zero"
MIXED = "mixed"

HOT_SPOT_MARGIN = 1e-10
INCLUSION_MISMATCH = 0.05
MINMAX_SAMPLES = 10
FLOOR_FACTOR = 0.25


def discretization_floor(eigenvalue: float, h: float) -> float:
    """Relative size of the derivative leakage P1 produces in a direction the
    continuum eigenfunction does not depend on.

    Cellwise P1 gradients are first order: the error is about h·|D²ψ| against
    |∇ψ|, and |D²ψ| / |∇ψ| scales like √λ.
    """
    return float(FLOOR_FACTOR * np.sqrt(abs(eigenvalue)) * h)


# ============================================================
# TRICHOTOMY
# ============================================================

@dataclass(frozen=True)
class DirectionVerdict:
    axis: int            # 1-based
    verdict: str
    margin: float        # min signed value / max |value| for the better sign
    magnitude: float     # max |∂_i| / max |∇|


@dataclass(frozen=True)
class TrichotomyVerdict:
    directions: Tuple[DirectionVerdict, ...]
    sign_tol: float
    zero_tol: float
    zero_threshold: float
    flipped: bool = False

    @property
    def has_mixed(self) -> bool:
        return any(d.verdict == MIXED for d in self.directions)

    @property
    def pattern(self) -> Tuple[str, ...]:
        return tuple(d.verdict for d in self.directions)

    def to_dict(self) -> dict:
        return {
            "directions": [asdict(d) for d in self.directions],
            "sign_tol": self.sign_tol,
            "zero_tol": self.zero_tol,
            "zero_threshold": self.zero_threshold,
            "flipped": self.flipped,
            "status": FAIL if self.has_mixed else PASS,
        }


def _direction(axis: int, values: np.ndarray, scale: float, sign_tol: float, zero_threshold: float) -> DirectionVerdict:
    peak = float(np.max(np.abs(values))) if len(values) else 0.0
    magnitude = peak / scale if scale > 0 else 0.0
    if peak == 0.0 or magnitude <= zero_threshold:
        return DirectionVerdict(axis, ZERO, 0.0, magnitude)
    pos = float(np.min(values)) / peak
    neg = float(np.min(-values)) / peak
    if pos >= -sign_tol:
        return DirectionVerdict(axis, POSITIVE, pos, magnitude)
    if neg >= -sign_tol:
        return DirectionVerdict(axis, NEGATIVE, neg, magnitude)
    return DirectionVerdict(axis, MIXED, max(pos, neg), magnitude)


def check_trichotomy(
    mesh: Mesh,
    gradients: np.ndarray,
    sign_tol: float = SIGN_TOL,
    zero_tol: float = ZERO_TOL,
    floor: float = 0.0,
    normalize: bool = True,
) -> TrichotomyVerdict:
    """Classify each partial derivative as positive, negative, zero or mixed.

    `gradients` holds one vector per cell (or per vertex for a nodal field).
    A direction is zero when its peak is within max(zero_tol, floor) of the
    peak gradient norm. With normalize the global sign is flipped so that the
    strongest sign-definite direction comes out positive.
    """
    gradients = np.asarray(gradients, dtype=float)
    if gradients.ndim != 2 or gradients.shape[1] != mesh.dim:
        raise PreconditionError(f"expected (n, {mesh.dim}) gradient array, got {gradients.shape}")
    scale = float(np.max(np.linalg.norm(gradients, axis=1))) if len(gradients) else 0.0
    threshold = max(zero_tol, floor)
    dirs = [_direction(i + 1, gradients[:, i], scale, sign_tol, threshold) for i in range(mesh.dim)]

    definite = [d for d in dirs if d.verdict in (POSITIVE, NEGATIVE)]
    flipped = False
    if definite and normalize:
        strongest = max(definite, key=lambda d: d.magnitude)
        if strongest.verdict == NEGATIVE:
            flipped = True
            swap = {POSITIVE: NEGATIVE, NEGATIVE: POSITIVE}
            dirs = [DirectionVerdict(d.axis, swap.get(d.verdict, d.verdict), d.margin, d.magnitude) for d in dirs]
    return TrichotomyVerdict(tuple(dirs), sign_tol, zero_tol, threshold, flipped)


# ============================================================
# HOT SPOTS
# ============================================================

@dataclass(frozen=True)
class HotSpotVerdict:
    status: str
    argmax: int
    argmin: int
    argmax_on_boundary: bool
    argmin_on_boundary: bool
    max_faces: Tuple[str, ...]
    min_faces: Tuple[str, ...]
    max_distance_to_boundary: float
    min_distance_to_boundary: float
    max_margin: float     # (boundary max − interior max) / oscillation
    min_margin: float     # (interior min − boundary min) / oscillation
    tolerance: float
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _distance_to_boundary(mesh: Mesh, vertex: int) -> float:
    bv = mesh.vertices[mesh.boundary_vertices]
    return float(np.min(np.linalg.norm(bv - mesh.vertices[vertex], axis=1)))


def check_hot_spots(mesh: Mesh, psi: ScalarEigenfunction, tolerance: float = HOT_SPOT_MARGIN) -> HotSpotVerdict:
    if not psi.eigenvalue > 0:
        raise PreconditionError(
            f"hot-spots check needs a non-constant eigenfunction (μ > 0), got μ = {psi.eigenvalue:.3e}"
        )
    values = psi.values
    on_boundary = np.zeros(mesh.n_vertices, dtype=bool)
    on_boundary[mesh.boundary_vertices] = True
    osc = float(values.max() - values.min())
    imax, imin = int(np.argmax(values)), int(np.argmin(values))

    if on_boundary.all():
        max_margin = min_margin = 1.0
    else:
        interior = values[~on_boundary]
        boundary = values[on_boundary]
        max_margin = float(boundary.max() - interior.max()) / osc
        min_margin = float(interior.min() - boundary.min()) / osc

    faces = mesh.vertex_face_ids
    note = ""
    if max_margin >= tolerance and min_margin >= tolerance:
        status = PASS
    elif max_margin >= -tolerance and min_margin >= -tolerance:
        status = PASS
        note = "interior and boundary extrema tie to machine precision"
    else:
        status = FAIL
    return HotSpotVerdict(
        status=status,
        argmax=imax,
        argmin=imin,
        argmax_on_boundary=bool(on_boundary[imax]),
        argmin_on_boundary=bool(on_boundary[imin]),
        max_faces=faces.get(imax, ()),
        min_faces=faces.get(imin, ()),
        max_distance_to_boundary=0.0 if on_boundary[imax] else _distance_to_boundary(mesh, imax),
        min_distance_to_boundary=0.0 if on_boundary[imin] else _distance_to_boundary(mesh, imin),
        max_margin=max_margin,
        min_margin=min_margin,
        tolerance=tolerance,
        note=note,
    )


# ============================================================
# SPECTRAL COMPARISONS
# ============================================================

def reference_eigenvalue(scalar_spec: Sequence[ScalarEigenfunction]) -> ScalarEigenfunction:
    """First eigenfunction with a nonzero eigenvalue: μ₂ for Neumann, λ₁ for mixed problems."""
    top = max((abs(e.eigenvalue) for e in scalar_spec), default=0.0)
    floor = 1e-8 * max(top, 1.0)
    for e in scalar_spec:
        if e.eigenvalue > floor:
            return e
    raise PreconditionError("scalar spectrum holds no nonzero eigenvalue; raise k")


def cluster_members(scalar_spec: Sequence[ScalarEigenfunction], reference: ScalarEigenfunction, rel_gap: float) -> List[ScalarEigenfunction]:
    lam = reference.eigenvalue
    return [e for e in scalar_spec if abs(e.eigenvalue - lam) <= rel_gap * lam]


@dataclass(frozen=True)
class ComparisonRecord:
    status: str
    reference: float            # μ₂ or λ₁
    eta1: float
    gap: float                  # |η₁ − ref| / ref
    tau1: Optional[float]       # smallest divergence-free eigenvalue
    margin: Optional[float]     # (τ₁ − ref) / ref
    tolerance: float
    first_field_kind: str
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def compare_eta1_mu2(
    scalar_spec: Sequence[ScalarEigenfunction],
    fields: Sequence[VectorEigenfield],
    tolerance: float = COMPARE_TOL,
) -> ComparisonRecord:
    """Gap between η₁ and the scalar reference value, and the margin of the
    first divergence-free eigenvalue above it. Fields must be classified."""
    if not fields:
        raise PreconditionError("no eigenfields to compare")
    if any(f.classification is None for f in fields):
        raise PreconditionError("eigenfields must be classified before comparison")
    ref = reference_eigenvalue(scalar_spec).eigenvalue
    eta1 = fields[0].eigenvalue
    gap = abs(eta1 - ref) / ref
    divfree = [f.eigenvalue for f in fields if f.classification.kind == DIVFREE]
    first_kind = fields[0].classification.kind

    if not divfree:
        return ComparisonRecord(
            INCONCLUSIVE, ref, eta1, gap, None, None, tolerance, first_kind,
            note=f"no divergence-free eigenvalue among the {len(fields)} computed; raise k",
        )
    tau1 = min(divfree)
    margin = (tau1 - ref) / ref
    status = PASS if gap <= tolerance and margin > 0 else FAIL
    return ComparisonRecord(status, ref, eta1, gap, tau1, margin, tolerance, first_kind)


@dataclass(frozen=True)
class InclusionRecord:
    status: str
    cutoff: float
    tolerance: float
    mismatch_tol: float
    matches: Tuple[dict, ...]

    def to_dict(self) -> dict:
        return {**asdict(self), "matches": list(self.matches)}


def check_spectral_inclusion(
    scalar_spec: Sequence[ScalarEigenfunction],
    fields: Sequence[VectorEigenfield],
    cutoff_factor: float = 4.0,
    tolerance: float = EIG_WINDOW,
    mismatch_tol: float = INCLUSION_MISMATCH,
) -> InclusionRecord:
    """Each nonzero scalar eigenvalue up to cutoff_factor·(reference) must reappear
    in the vector spectrum with a gradient-type eigenfield."""
    ref = reference_eigenvalue(scalar_spec).eigenvalue
    cutoff = cutoff_factor * ref
    top_eta = max(f.eigenvalue for f in fields)
    matches = []
    status = PASS
    for psi in scalar_spec:
        if psi.eigenvalue < ref * (1 - 1e-8) or psi.eigenvalue > cutoff:
            continue
        if psi.eigenvalue > top_eta * (1 + tolerance):
            matches.append({"index": psi.index, "mu": psi.eigenvalue, "status": INCONCLUSIVE})
            status = INCONCLUSIVE if status == PASS else status
            continue
        near = [
            f for f in fields
            if abs(f.eigenvalue - psi.eigenvalue) <= tolerance * psi.eigenvalue
            and f.classification is not None and f.classification.kind == GRADIENT
            and f.classification.mismatch <= mismatch_tol
            and psi.index in f.classification.matched
        ]
        if near:
            best = min(near, key=lambda f: abs(f.eigenvalue - psi.eigenvalue))
            matches.append({
                "index": psi.index, "mu": psi.eigenvalue, "eta": best.eigenvalue,
                "field": best.index, "mismatch": best.classification.mismatch, "status": PASS,
            })
        else:
            matches.append({"index": psi.index, "mu": psi.eigenvalue, "status": FAIL})
            status = FAIL
    return InclusionRecord(status, cutoff, tolerance, mismatch_tol, tuple(matches))


# ============================================================
# FIRST EIGENFIELD
# ============================================================

@dataclass(frozen=True)
class SignRecord:
    status: str
    components: Tuple[dict, ...]
    sign_tol: float
    zero_threshold: float

    def to_dict(self) -> dict:
        return {**asdict(self), "components": list(self.components)}


def check_step1_signs(
    u: VectorEigenfield,
    sign_tol: float = SIGN_TOL,
    zero_tol: float = ZERO_TOL,
    floor: float = 0.0,
) -> SignRecord:
    """Each nodal component of the first eigenfield is sign-definite or negligible."""
    values = u.values
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    threshold = max(zero_tol, floor)
    comps = []
    status = PASS
    for j in range(values.shape[1]):
        col = values[:, j]
        peak = float(np.max(np.abs(col)))
        if scale == 0.0 or peak <= threshold * scale:
            comps.append({"component": j + 1, "verdict": ZERO, "margin": 0.0})
            continue
        pos = float(np.min(col)) / peak
        neg = float(np.min(-col)) / peak
        if pos >= -sign_tol:
            comps.append({"component": j + 1, "verdict": POSITIVE, "margin": pos})
        elif neg >= -sign_tol:
            comps.append({"component": j + 1, "verdict": NEGATIVE, "margin": neg})
        else:
            comps.append({"component": j + 1, "verdict": MIXED, "margin": max(pos, neg)})
            status = FAIL
    return SignRecord(status, tuple(comps), sign_tol, threshold)


@dataclass(frozen=True)
class RayleighRecord:
    status: str
    eta1: float
    gradient_quotient: float
    random_quotients: Tuple[float, ...]
    tolerance: float

    def to_dict(self) -> dict:
        return {**asdict(self), "random_quotients": list(self.random_quotients)}


def check_rayleigh_bounds(
    system: VectorSystem,
    first: VectorEigenfield,
    reference: ScalarEigenfunction,
    samples: int = MINMAX_SAMPLES,
    seed: int = SEED,
    projector: Optional[GradientProjector] = None,
    tolerance: float = 1e-9,
) -> RayleighRecord:
    """η₁ must not exceed the quotient of the admissible gradient interpolant
    of the reference eigenfunction nor that of any random admissible field."""
    trial = gradient_trial_field(system, reference, projector)
    q_grad = rayleigh_quotient(system, trial)
    q_rand = tuple(rayleigh_quotient(system, f) for f in random_admissible_fields(system, samples, seed))
    slack = tolerance * max(abs(first.eigenvalue), 1.0)
    ok = first.eigenvalue <= q_grad + slack and all(first.eigenvalue <= q + slack for q in q_rand)
    return RayleighRecord(PASS if ok else FAIL, first.eigenvalue, q_grad, q_rand, tolerance)


def worst_status(statuses: Sequence[str]) -> str:
    """fail beats inconclusive beats pass; info never counts."""
    seen = set(s for s in statuses if s != INFO)
    if FAIL in seen:
        return FAIL
    if INCONCLUSIVE in seen:
        return INCONCLUSIVE
    return PASS


def status_counts(statuses: Sequence[str]) -> Dict[str, int]:
    out = {PASS: 0, FAIL: 0, INCONCLUSIVE: 0, INFO: 0}
    for s in statuses:
        out[s] = out.get(s, 0) + 1
    return out
