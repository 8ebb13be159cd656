# src/fem/scalar.py
"""
P1 Lagrange discretization of the scalar Laplacian.

Neumann faces are natural (no boundary term). Dirichlet faces remove every
vertex on the closure of the face from the unknowns. Matrices are assembled
cell-vectorized into COO triplets and summed into CSR in a fixed order, so
the result does not depend on threading.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from src.fem.eigensolve import EigOptions, smallest_eigs
from src.geometry.domain import DIRICHLET
from src.mesh.mesh import Mesh
from src.utils.config import EIG_TOL, SEED
from src.utils.errors import InvalidInputError, MeshValidationError
from src.utils.logger import get_logger

logger = get_logger("fem_scalar")


# ============================================================
# ELEMENT QUANTITIES
# ============================================================

def barycentric_gradients(mesh: Mesh) -> np.ndarray:
    """(nc, d+1, d) constant gradients of the barycentric coordinates per cell."""
    v = mesh.vertices[mesh.cells]
    jac = np.transpose(v[:, 1:] - v[:, :1], (0, 2, 1))  # columns x_i - x_0
    tail = np.linalg.inv(jac)  # row i is grad λ_{i+1}
    head = -tail.sum(axis=1, keepdims=True)
    return np.concatenate([head, tail], axis=1)


def _coo(cells: np.ndarray, local: np.ndarray, n: int) -> sp.csr_matrix:
    d1 = cells.shape[1]
    rows = np.repeat(cells, d1, axis=1).ravel()
    cols = np.tile(cells, (1, d1)).ravel()
    return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(n, n))


def stiffness_matrix(mesh: Mesh, grads: Optional[np.ndarray] = None) -> sp.csr_matrix:
    grads = barycentric_gradients(mesh) if grads is None else grads
    local = np.einsum("cak,cbk->cab", grads, grads) * mesh.cell_volumes[:, None, None]
    local = 0.5 * (local + np.transpose(local, (0, 2, 1)))
    return _coo(mesh.cells, local, mesh.n_vertices)


def mass_matrix(mesh: Mesh) -> sp.csr_matrix:
    d1 = mesh.dim + 1
    ref = (np.ones((d1, d1)) + np.eye(d1)) / (d1 * (d1 + 1))
    local = mesh.cell_volumes[:, None, None] * ref[None]
    return _coo(mesh.cells, local, mesh.n_vertices)


def gradient_matrices(mesh: Mesh, grads: Optional[np.ndarray] = None) -> List[sp.csr_matrix]:
    """G_i[a, b] = ∫ φ_a ∂_i φ_b, one matrix per direction."""
    grads = barycentric_gradients(mesh) if grads is None else grads
    d1 = mesh.dim + 1
    weight = mesh.cell_volumes / d1
    out = []
    for i in range(mesh.dim):
        local = weight[:, None, None] * np.broadcast_to(grads[:, None, :, i], (mesh.n_cells, d1, d1))
        out.append(_coo(mesh.cells, local, mesh.n_vertices))
    return out


# ============================================================
# SYSTEM
# ============================================================

@dataclass(frozen=True, eq=False)
class ScalarSystem:
    mesh: Mesh
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    free_dofs: np.ndarray   # vertex index of each dof
    dirichlet_vertices: np.ndarray

    @property
    def n_dofs(self) -> int:
        return len(self.free_dofs)

    @property
    def has_dirichlet(self) -> bool:
        return len(self.dirichlet_vertices) > 0

    def reduced(self):
        idx = self.free_dofs
        return self.stiffness[idx][:, idx], self.mass[idx][:, idx]

    def lift(self, dof_values: np.ndarray) -> np.ndarray:
        full = np.zeros((self.mesh.n_vertices,) + dof_values.shape[1:])
        full[self.free_dofs] = dof_values
        return full


def check_labels(mesh: Mesh, bc) -> None:
    missing = sorted(set(mesh.facet_ids) - set(bc))
    if missing:
        raise MeshValidationError(f"boundary faces without a label: {', '.join(missing)}")
    unknown = sorted(f for f in bc if bc[f] not in ("neumann", "dirichlet"))
    if unknown:
        raise MeshValidationError(f"unknown boundary condition on faces {', '.join(unknown)}")


def assemble_scalar(mesh: Mesh, bc, dirichlet_everywhere: bool = False) -> ScalarSystem:
    """Stiffness/mass pair with Dirichlet vertices removed from the dof set.

    `bc` maps face id → "neumann" | "dirichlet". With dirichlet_everywhere the
    labels are ignored and every boundary vertex is fixed (Dirichlet Laplacian
    on the same mesh).
    """
    bc = dict(bc)
    if dirichlet_everywhere:
        fixed = mesh.boundary_vertices
    else:
        check_labels(mesh, bc)
        dirichlet = [f for f in sorted(set(mesh.facet_ids)) if bc[f] == DIRICHLET]
        fixed = (
            np.unique(np.concatenate([mesh.vertices_on_face(f) for f in dirichlet]))
            if dirichlet else np.zeros(0, dtype=np.int64)
        )
    free = np.setdiff1d(np.arange(mesh.n_vertices), fixed)
    if len(free) == 0:
        raise InvalidInputError("no free degrees of freedom left after removing Dirichlet vertices")

    grads = barycentric_gradients(mesh)
    K = stiffness_matrix(mesh, grads)
    M = mass_matrix(mesh)
    logger.debug(f"scalar system: {mesh.n_vertices} vertices, {len(free)} dofs, {len(fixed)} fixed")
    return ScalarSystem(mesh, K, M, free, np.asarray(fixed, dtype=np.int64))


# ============================================================
# EIGENFUNCTIONS
# ============================================================

@dataclass(frozen=True, eq=False)
class ScalarEigenfunction:
    index: int
    eigenvalue: float
    values: np.ndarray      # per vertex, zero on Dirichlet vertices
    residual: float
    gradients: np.ndarray   # (nc, d), constant per cell

    def to_dict(self) -> dict:
        return {"index": self.index, "eigenvalue": self.eigenvalue, "residual": self.residual}


def gradient_field(mesh: Mesh, psi) -> np.ndarray:
    """Exact gradient of the P1 interpolant, one vector per cell.

    `psi` is a ScalarEigenfunction or a plain array of vertex values.
    """
    values = psi.values if isinstance(psi, ScalarEigenfunction) else np.asarray(psi, dtype=float)
    if values.shape != (mesh.n_vertices,):
        raise InvalidInputError(f"expected {mesh.n_vertices} vertex values, got shape {values.shape}")
    grads = barycentric_gradients(mesh)
    return np.einsum("ca,cak->ck", values[mesh.cells], grads)


def solve_scalar_spectrum(
    system: ScalarSystem,
    k: int,
    tol: float = EIG_TOL,
    seed: int = SEED,
) -> List[ScalarEigenfunction]:
    K, M = system.reduced()
    if k > system.n_dofs:
        raise InvalidInputError(f"k={k} exceeds the {system.n_dofs} free degrees of freedom")
    spectrum = smallest_eigs(K, M, EigOptions(k=k, tol=tol, seed=seed))
    out = []
    for i in range(k):
        values = system.lift(spectrum.vectors[:, i])
        out.append(ScalarEigenfunction(
            index=i + 1,
            eigenvalue=float(spectrum.values[i]),
            values=values,
            residual=float(spectrum.residuals[i]),
            gradients=gradient_field(system.mesh, values),
        ))
    logger.info(
        f"✅ scalar spectrum ({'mixed' if system.has_dirichlet else 'neumann'}): "
        + ", ".join(f"{e.eigenvalue:.6g}" for e in out[:6])
    )
    return out


def reference_index(system: ScalarSystem) -> int:
    """0-based position of the reference eigenvalue: μ₂ for Neumann, λ₁ for mixed."""
    return 0 if system.has_dirichlet else 1


class GradientProjector:
    """L²-projection of P1 gradients back onto nodal P1 vector fields."""

    def __init__(self, mesh: Mesh, mass: Optional[sp.csr_matrix] = None):
        self.mesh = mesh
        self.mass = mass_matrix(mesh) if mass is None else mass
        self._lu = splu(sp.csc_matrix(self.mass))
        self._G = gradient_matrices(mesh)

    def project(self, values: np.ndarray) -> np.ndarray:
        """(nv, d) nodal field g with M g_i = G_i ψ."""
        return np.column_stack([self._lu.solve(G @ values) for G in self._G])

    def project_many(self, columns: Sequence[np.ndarray]) -> List[np.ndarray]:
        return [self.project(c) for c in columns]
