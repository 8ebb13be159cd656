# src/fem/vector.py
"""
Vector Laplacian on the constrained space of fields tangential on Neumann
faces and normal on the Dirichlet face.

Unknowns are nodal P1 vectors, numbered vertex-major (dof = vertex·d + j).
The form is d copies of the scalar stiffness minus the boundary integral of
⟨L u, v⟩, with L the facet's shape-operator sample (zero on flat faces).
Trace conditions are imposed strongly at boundary vertices: each vertex gets
an orthonormal basis of its admissible directions and the problem is solved
in the span of those bases.
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from src.fem.eigensolve import EigOptions, normalize_signs, smallest_eigs
from src.fem.scalar import (
    GradientProjector,
    ScalarEigenfunction,
    ScalarSystem,
    check_labels,
    assemble_scalar,
    barycentric_gradients,
)
from src.geometry.domain import ArcFace, DIRICHLET
from src.mesh.mesh import Mesh
from src.utils.config import CLASS_TOL, EIG_TOL, EIG_WINDOW, SEED
from src.utils.errors import InvalidInputError, MeshValidationError, PreconditionError
from src.utils.logger import get_logger

logger = get_logger("fem_vector")

PIVOT_TOL = 1e-10
CLAMP_WARN_FRACTION = 0.05
ADMISSIBLE_TOL = 1e-12

GRADIENT = "gradient"
DIVFREE = "divergence_free"
UNCLASSIFIED = "unclassified"


# ============================================================
# SYSTEM
# ============================================================

@dataclass(frozen=True, eq=False)
class VectorSystem:
    mesh: Mesh
    scalar: ScalarSystem
    stiffness: sp.csr_matrix       # block stiffness minus boundary term, (nd, nd)
    mass: sp.csr_matrix            # block mass
    boundary: sp.csr_matrix        # the subtracted boundary term alone
    constraints: sp.csr_matrix     # B, one orthonormal row per fixed vertex direction
    basis: sp.csr_matrix           # Z, orthonormal columns spanning ker B
    clamped_vertices: np.ndarray
    clamped_fraction: float

    @property
    def dim(self) -> int:
        return self.mesh.dim

    @property
    def boundary_term_active(self) -> bool:
        return self.boundary.nnz > 0 and abs(self.boundary).max() > 0

    @property
    def corner_flag(self) -> bool:
        return self.clamped_fraction > CLAMP_WARN_FRACTION

    def reduced(self):
        Z = self.basis
        K = (Z.T @ self.stiffness @ Z).tocsr()
        M = (Z.T @ self.mass @ Z).tocsr()
        return 0.5 * (K + K.T), 0.5 * (M + M.T)

    def flatten(self, field: np.ndarray) -> np.ndarray:
        return np.asarray(field, dtype=float).reshape(-1)

    def unflatten(self, vec: np.ndarray) -> np.ndarray:
        return np.asarray(vec).reshape(self.mesh.n_vertices, self.dim)


def facet_mass(n_vertices_per_facet: int) -> np.ndarray:
    m = n_vertices_per_facet
    return (np.ones((m, m)) + np.eye(m)) / (m * (m + 1))


def boundary_form(mesh: Mesh) -> sp.csr_matrix:
    """Σ_F kron(facet mass, L_F) over facets with a nonzero shape sample."""
    d, nv = mesh.dim, mesh.n_vertices
    curved = np.flatnonzero(np.any(np.abs(mesh.shape_samples) > 0, axis=(1, 2)))
    if len(curved) == 0:
        return sp.csr_matrix((nv * d, nv * d))
    ref = facet_mass(d)
    rows, cols, vals = [], [], []
    for k in curved:
        local = mesh.facet_measures[k] * np.kron(ref, mesh.shape_samples[k])
        dofs = (mesh.facets[k][:, None] * d + np.arange(d)).ravel()
        rows.append(np.repeat(dofs, len(dofs)))
        cols.append(np.tile(dofs, len(dofs)))
        vals.append(0.5 * (local + local.T).ravel())
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(nv * d, nv * d)
    )


def _check_shape_samples(mesh: Mesh) -> None:
    for face_id, face in mesh.faces.items():
        if not isinstance(face, ArcFace):
            continue
        mask = np.array([f == face_id for f in mesh.facet_ids], dtype=bool)
        if mask.any() and not np.all(np.any(np.abs(mesh.shape_samples[mask]) > 0, axis=(1, 2))):
            raise MeshValidationError(f"curved face '{face_id}' has facets without shape-operator samples")


def tangent_basis(normal: np.ndarray) -> np.ndarray:
    """(d-1, d) orthonormal rows spanning the plane orthogonal to `normal`."""
    return scipy.linalg.null_space(normal[None, :]).T


def vertex_constraints(mesh: Mesh, bc, vertex: int) -> np.ndarray:
    """Stacked constraint rows at a boundary vertex, before rank reduction."""
    p = mesh.vertices[vertex]
    rows = []
    for face_id in mesh.vertex_face_ids.get(vertex, ()):
        nu = mesh.faces[face_id].normal_at(p)
        if bc[face_id] == DIRICHLET:
            rows.extend(tangent_basis(nu))
        else:
            rows.append(nu)
    return np.array(rows, dtype=float).reshape(-1, mesh.dim)


def reduce_constraints(rows: np.ndarray, dim: int, tol: float = PIVOT_TOL):
    """Orthonormal constraint directions and the complementary admissible basis."""
    if len(rows) == 0:
        return np.zeros((0, dim)), np.eye(dim)
    Q, R, _ = scipy.linalg.qr(rows.T, pivoting=True)
    diag = np.abs(np.diag(R)) if R.size else np.zeros(0)
    rank = int(np.sum(diag > tol))
    return Q[:, :rank].T, Q[:, rank:]


def assemble_vector_A(mesh: Mesh, bc, scalar: Optional[ScalarSystem] = None) -> VectorSystem:
    bc = dict(bc)
    check_labels(mesh, bc)
    _check_shape_samples(mesh)
    d, nv = mesh.dim, mesh.n_vertices
    scalar = assemble_scalar(mesh, bc) if scalar is None else scalar

    eye = sp.identity(d, format="csr")
    boundary = boundary_form(mesh)
    K = (sp.kron(scalar.stiffness, eye, format="csr") - boundary).tocsr()
    M = sp.kron(scalar.mass, eye, format="csr")

    # per-vertex admissible bases
    b_rows, b_cols, b_vals = [], [], []
    z_rows, z_cols, z_vals = [], [], []
    n_b = n_z = 0
    clamped = []
    boundary_set = set(int(v) for v in mesh.boundary_vertices)
    for v in range(nv):
        if v in boundary_set:
            fixed, free = reduce_constraints(vertex_constraints(mesh, bc, v), d)
        else:
            fixed, free = np.zeros((0, d)), np.eye(d)
        for row in fixed:
            b_rows += [n_b] * d
            b_cols += list(v * d + np.arange(d))
            b_vals += list(row)
            n_b += 1
        for col in free.T:
            z_rows += list(v * d + np.arange(d))
            z_cols += [n_z] * d
            z_vals += list(col)
            n_z += 1
        if free.shape[1] == 0:
            clamped.append(v)

    if n_z == 0:
        raise PreconditionError("every vector degree of freedom is clamped; refine the mesh")
    B = sp.csr_matrix((b_vals, (b_rows, b_cols)), shape=(n_b, nv * d))
    Z = sp.csr_matrix((z_vals, (z_rows, z_cols)), shape=(nv * d, n_z))
    Z.eliminate_zeros()
    fraction = len(clamped) / max(len(boundary_set), 1)
    if fraction > CLAMP_WARN_FRACTION:
        logger.warning(f"⚠️ corner policy clamps {len(clamped)} of {len(boundary_set)} boundary vertices ({fraction:.1%})")
    logger.debug(f"vector system: {nv * d} dofs, {n_b} constraints, {n_z} admissible")
    return VectorSystem(mesh, scalar, K, M, boundary, B, Z, np.array(clamped, dtype=np.int64), fraction)


# ============================================================
# EIGENFIELDS
# ============================================================

@dataclass(frozen=True)
class FieldClass:
    kind: str
    matched: tuple = ()           # 1-based indices of the scalar eigenfunctions used
    mismatch: float = float("nan")
    divergence: float = float("nan")
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "matched": list(self.matched),
            "mismatch": self.mismatch,
            "divergence": self.divergence,
            "note": self.note,
        }


@dataclass(frozen=True, eq=False)
class VectorEigenfield:
    index: int
    eigenvalue: float
    values: np.ndarray    # (nv, d)
    residual: float
    classification: Optional[FieldClass] = None

    def component(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def to_dict(self) -> dict:
        out = {"index": self.index, "eigenvalue": self.eigenvalue, "residual": self.residual}
        if self.classification is not None:
            out["classification"] = self.classification.to_dict()
        return out


def solve_A_spectrum(system: VectorSystem, k: int, tol: float = EIG_TOL, seed: int = SEED) -> List[VectorEigenfield]:
    K, M = system.reduced()
    if k > K.shape[0]:
        raise InvalidInputError(f"k={k} exceeds the {K.shape[0]} admissible degrees of freedom")
    spectrum = smallest_eigs(K, M, EigOptions(k=k, tol=tol, seed=seed))
    fields = []
    for i in range(k):
        u = system.basis @ spectrum.vectors[:, i]
        fields.append(VectorEigenfield(i + 1, float(spectrum.values[i]), system.unflatten(u), float(spectrum.residuals[i])))
    logger.info("✅ A spectrum: " + ", ".join(f"{f.eigenvalue:.6g}" for f in fields[:6]))
    return fields


# ============================================================
# FIELD UTILITIES
# ============================================================

def mass_norm(system: VectorSystem, field: np.ndarray) -> float:
    u = system.flatten(field)
    return float(np.sqrt(u @ (system.mass @ u)))


def constraint_violation(system: VectorSystem, field: np.ndarray) -> float:
    if system.constraints.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(system.constraints @ system.flatten(field))))


def rayleigh_quotient(system: VectorSystem, field: np.ndarray) -> float:
    u = system.flatten(field)
    den = u @ (system.mass @ u)
    if den <= 0:
        raise InvalidInputError("Rayleigh quotient of the zero field")
    return float((u @ (system.stiffness @ u)) / den)


def admissible_projection(system: VectorSystem, field: np.ndarray) -> np.ndarray:
    """Nearest admissible nodal field (vertex-wise orthogonal projection)."""
    Z = system.basis
    return system.unflatten(Z @ (Z.T @ system.flatten(field)))


def gradient_trial_field(
    system: VectorSystem,
    psi,
    projector: Optional[GradientProjector] = None,
) -> np.ndarray:
    """Admissible nodal interpolant of ∇ψ (L²-projected gradient, then projected into V)."""
    values = psi.values if isinstance(psi, ScalarEigenfunction) else np.asarray(psi, dtype=float)
    projector = projector or GradientProjector(system.mesh, system.scalar.mass)
    return admissible_projection(system, projector.project(values))


def random_admissible_fields(system: VectorSystem, count: int, seed: int = SEED) -> List[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [system.unflatten(system.basis @ rng.standard_normal(system.basis.shape[1])) for _ in range(count)]


def cell_divergence(mesh: Mesh, field: np.ndarray) -> np.ndarray:
    grads = barycentric_gradients(mesh)
    return np.einsum("cak,cak->c", field[mesh.cells], grads)


def normal_trace_violation(system: VectorSystem, field: np.ndarray, bc) -> float:
    """max |u·ν| over Neumann boundary vertices, relative to max |u|."""
    mesh = system.mesh
    scale = float(np.max(np.linalg.norm(field, axis=1))) or 1.0
    worst = 0.0
    for v, ids in mesh.vertex_face_ids.items():
        for face_id in ids:
            if bc[face_id] == DIRICHLET:
                continue
            nu = mesh.faces[face_id].normal_at(mesh.vertices[v])
            worst = max(worst, abs(float(field[v] @ nu)))
    return worst / scale


def _window(eta: float, neumann_spectrum: Sequence[ScalarEigenfunction], tol_eig: float):
    floor = 1e-8 * max(abs(eta), 1.0)
    return [
        psi for psi in neumann_spectrum
        if psi.eigenvalue > floor and abs(psi.eigenvalue - eta) <= tol_eig * max(abs(eta), floor)
    ]


def gradient_mismatch(system: VectorSystem, field: np.ndarray, gradients: Sequence[np.ndarray]) -> float:
    """‖u − P u‖_M / ‖u‖_M with P the M-orthogonal projection onto span(gradients)."""
    u = system.flatten(field)
    G = np.column_stack([system.flatten(g) for g in gradients])
    MG = system.mass @ G
    gram = G.T @ MG
    coeffs, *_ = np.linalg.lstsq(gram, MG.T @ u, rcond=None)
    r = u - G @ coeffs
    return float(np.sqrt(max(r @ (system.mass @ r), 0.0) / (u @ (system.mass @ u))))


def classify_eigenfield(
    system: VectorSystem,
    u: VectorEigenfield,
    neumann_spectrum: Sequence[ScalarEigenfunction],
    bc,
    tol_eig: float = EIG_WINDOW,
    class_tol: float = CLASS_TOL,
    projector: Optional[GradientProjector] = None,
) -> FieldClass:
    """Helmholtz type of an eigenfield.

    mismatch: distance to the span of the projected gradients of every scalar
    eigenfunction whose eigenvalue lies within tol_eig (relative) of η.
    divergence: mass-weighted L² norm of the cellwise divergence over √η‖u‖,
    plus the relative normal-trace violation on Neumann faces.
    """
    bc = dict(bc)
    field = u.values
    if constraint_violation(system, field) > ADMISSIBLE_TOL * max(float(np.max(np.abs(field))), 1.0):
        raise PreconditionError(f"field {u.index} is not admissible (‖Bu‖ > 0); not an eigenfield of A")

    norm = mass_norm(system, field)
    candidates = _window(u.eigenvalue, neumann_spectrum, tol_eig)
    mismatch = float("inf")
    if candidates:
        projector = projector or GradientProjector(system.mesh, system.scalar.mass)
        mismatch = gradient_mismatch(system, field, projector.project_many([p.values for p in candidates]))

    div = cell_divergence(system.mesh, field)
    div_norm = float(np.sqrt(np.sum(system.mesh.cell_volumes * div**2)))
    divergence = div_norm / (np.sqrt(max(u.eigenvalue, 1e-300)) * norm) + normal_trace_violation(system, field, bc)

    matched = tuple(p.index for p in candidates)
    if mismatch <= class_tol:
        note = "divergence also small; gradient type preferred" if divergence <= class_tol else ""
        return FieldClass(GRADIENT, matched, mismatch, divergence, note)
    if divergence <= class_tol:
        return FieldClass(DIVFREE, matched, mismatch, divergence)
    return FieldClass(UNCLASSIFIED, matched, mismatch, divergence)


def eigen_clusters(values: Sequence[float], window: float) -> List[List[int]]:
    """Chain consecutive eigenvalues whose relative gap is within `window`."""
    groups: List[List[int]] = []
    for i, eta in enumerate(values):
        if groups:
            prev = values[groups[-1][-1]]
            if abs(eta - prev) <= window * max(abs(eta), abs(prev), 1e-300):
                groups[-1].append(i)
                continue
        groups.append([i])
    return groups


def _m_orthonormal(system: VectorSystem, columns: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    gram = columns.T @ (system.mass @ columns)
    w, V = np.linalg.eigh(0.5 * (gram + gram.T))
    keep = w > tol * max(float(w.max()), 1e-300)
    return columns @ (V[:, keep] / np.sqrt(w[keep]))


def _ritz(system: VectorSystem, columns: np.ndarray):
    """Rayleigh–Ritz of A on span(columns); M-orthonormal Ritz fields sorted by value."""
    if columns.shape[1] == 0:
        return np.zeros(0), columns
    KP = columns.T @ (system.stiffness @ columns)
    MP = columns.T @ (system.mass @ columns)
    values, coeffs = scipy.linalg.eigh(0.5 * (KP + KP.T), 0.5 * (MP + MP.T))
    return values, columns @ coeffs


def _field_residual(system: VectorSystem, u: np.ndarray, eta: float) -> float:
    Z = system.basis
    Mu = system.mass @ u
    return float(np.linalg.norm(Z.T @ (system.stiffness @ u - eta * Mu)) / np.linalg.norm(Z.T @ Mu))


def split_cluster(
    system: VectorSystem,
    fields: Sequence[VectorEigenfield],
    gradients: Sequence[np.ndarray],
    class_tol: float = CLASS_TOL,
) -> List[VectorEigenfield]:
    """Rotate a near-degenerate group of eigenfields into gradient and remainder parts.

    The principal vectors between the group and span(gradients) (M-inner
    product) whose mismatch is within class_tol form the gradient part; the
    M-orthogonal complement inside the group is the remainder. Each part is
    re-diagonalized so the returned fields are Ritz pairs of A.
    """
    if not gradients:
        return list(fields)
    U = np.column_stack([system.flatten(f.values) for f in fields])
    Q = _m_orthonormal(system, np.column_stack([system.flatten(g) for g in gradients]))
    if Q.shape[1] == 0:
        return list(fields)
    cross = U.T @ (system.mass @ Q)
    W, sigma, _ = np.linalg.svd(cross)
    cosines = np.zeros(U.shape[1])
    cosines[: len(sigma)] = np.clip(sigma, 0.0, 1.0)
    n_grad = int(np.sum(np.sqrt(1.0 - cosines ** 2) <= class_tol))
    rotated = U @ W
    out = []
    for part in (rotated[:, :n_grad], rotated[:, n_grad:]):
        values, vectors = _ritz(system, part)
        for eta, u in zip(values, normalize_signs(vectors).T):
            out.append((float(eta), u))
    out.sort(key=lambda pair: pair[0])
    return [
        VectorEigenfield(f.index, eta, system.unflatten(u), _field_residual(system, u, eta))
        for f, (eta, u) in zip(fields, out)
    ]


def classify_spectrum(
    system: VectorSystem,
    fields: Sequence[VectorEigenfield],
    neumann_spectrum: Sequence[ScalarEigenfunction],
    bc,
    tol_eig: float = EIG_WINDOW,
    class_tol: float = CLASS_TOL,
) -> List[VectorEigenfield]:
    """Classify every eigenfield, resolving groups of nearly equal eigenvalues first.

    Gradient and divergence-free eigenvalues that coincide in the continuum
    come out of the solver as arbitrary mixtures; such groups are split with
    split_cluster before the per-field classification.
    """
    projector = GradientProjector(system.mesh, system.scalar.mass)
    resolved: List[VectorEigenfield] = []
    for group in eigen_clusters([f.eigenvalue for f in fields], tol_eig):
        members = [fields[i] for i in group]
        if len(members) > 1:
            candidates = {}
            for f in members:
                for psi in _window(f.eigenvalue, neumann_spectrum, tol_eig):
                    candidates[psi.index] = psi
            gradients = projector.project_many([candidates[i].values for i in sorted(candidates)])
            members = split_cluster(system, members, gradients, class_tol)
        resolved.extend(members)
    return [
        replace(f, classification=classify_eigenfield(system, f, neumann_spectrum, bc, tol_eig, class_tol, projector))
        for f in resolved
    ]
