# src/mesh/generators.py
"""
Mesh generators for the supported domains.

generate_mesh dispatches in this order:
  disk                  → graded quarter-disk rings, mirrored/reflected to the kept sectors
  simplex               → the simplex itself, red-refined to size
  Kuhn-conforming       → structured grid, every cube split into d! path simplices
  reflection-symmetric  → positive piece meshed as above, then mirrored
Anything else raises UnsupportedDomainError; such domains are meshed elsewhere and
loaded with read_mesh.

A polytope is Kuhn-conforming when, after flipping some axes, every face is either
{x_i = const} or {x_k/s_k − x_l/s_l = const} for a consistent set of axis spacings s,
and every vertex sits on the resulting grid.

Grids without diagonal faces reflect the cube diagonals across the mid-planes,
so the mesh carries every reflection symmetry of the box. Grids with diagonal
faces are graded toward each grid step boundary with the same profile on every
linked axis, which keeps the diagonal planes on grid nodes and concentrates
vertices along the obtuse edges where those faces meet axis faces.
"""

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.geometry.domain import (
    DiskKind,
    DomainSpec,
    FaceGeometry,
    IntervalKind,
    as_polytope,
    disk_faces,
    face_geometries,
    make_domain,
    polytope_face_planes,
    winding_number,
)
from src.geometry.lip import is_lip
from src.geometry.symmetry import clip_halfspace, detect_symmetries
from src.mesh.mesh import Mesh, build_mesh
from src.mesh.refine import refine
from src.utils.errors import InvalidInputError, UnsupportedDomainError
from src.utils.logger import get_logger

logger = get_logger("generators")

SIZE_FACTOR = 1.5
GRID_TOL = 1e-9
MAX_DENOMINATOR = 10**6
MAX_CELLS_PER_AXIS = 4096
GRADING_SLOPE = 1.875  # peak slope of smootherstep


# ============================================================
# KUHN GRID
# ============================================================

@dataclass(frozen=True)
class KuhnPlan:
    flips: Tuple[int, ...]
    origin: Tuple[float, ...]  # in flipped coordinates
    spacing: Tuple[float, ...]  # mean spacing; graded axes vary around it
    counts: Tuple[int, ...]
    cells_per_step: Tuple[int, ...] = ()
    graded: Tuple[bool, ...] = ()
    mirrored: bool = False


def _float_gcd(values: Sequence[float], tol: float) -> float:
    fracs = [Fraction(v).limit_denominator(MAX_DENOMINATOR) for v in values if v > tol]
    if not fracs:
        return 1.0
    den = 1
    for f in fracs:
        den = den * f.denominator // math.gcd(den, f.denominator)
    num = 0
    for f in fracs:
        num = math.gcd(num, f.numerator * (den // f.denominator))
    step = num / den
    for v in values:
        if abs(v - round(v / step) * step) > tol:
            raise UnsupportedDomainError(f"vertex coordinates have no common grid step (value {v})")
    return step


def _axis_ratios(normals: np.ndarray, dim: int, tol: float = 1e-9):
    """Relative axis spacings forced by the diagonal faces, grouped into components."""
    ratio: List[Optional[float]] = [None] * dim
    links: Dict[int, List[Tuple[int, float]]] = {i: [] for i in range(dim)}
    for n in normals:
        nz = np.flatnonzero(np.abs(n) > tol * np.max(np.abs(n)))
        if len(nz) == 1:
            continue
        if len(nz) != 2 or n[nz[0]] * n[nz[1]] >= 0:
            raise UnsupportedDomainError(f"face normal {np.round(n, 6).tolist()} does not fit a Kuhn grid")
        k, l = nz
        # n_k x_k + n_l x_l = c is a grid difference plane iff |n_k| s_k = |n_l| s_l
        links[k].append((l, abs(n[k]) / abs(n[l])))
        links[l].append((k, abs(n[l]) / abs(n[k])))

    components: List[List[int]] = []
    for seed in range(dim):
        if ratio[seed] is not None:
            continue
        ratio[seed] = 1.0
        comp = [seed]
        queue = deque([seed])
        while queue:
            i = queue.popleft()
            for j, r in links[i]:
                want = ratio[i] * r
                if ratio[j] is None:
                    ratio[j] = want
                    comp.append(j)
                    queue.append(j)
                elif abs(ratio[j] - want) > 1e-9 * want:
                    raise UnsupportedDomainError("diagonal faces require inconsistent axis spacings")
        components.append(sorted(comp))
    return np.array(ratio, dtype=float), components


def kuhn_plan(domain: DomainSpec, target_h: float) -> KuhnPlan:
    verdict = is_lip(domain, search_orientations=True)
    if not verdict.is_lip:
        raise UnsupportedDomainError(f"{domain.name or 'domain'} has faces no axis flip turns into grid planes")
    dim = domain.dim
    flips = [1] * dim
    if verdict.rotation_applied is not None:
        for i, axis in enumerate(verdict.rotation_applied.permutation):
            flips[axis] = verdict.rotation_applied.signs[i]
    flips_arr = np.array(flips, dtype=float)

    poly = as_polytope(domain)
    pts = poly.points * flips_arr
    normals = np.array([p.normal_at() for p in polytope_face_planes(poly)]) * flips_arr
    ratios, components = _axis_ratios(normals, dim)

    origin = pts.min(axis=0)
    rel = pts - origin
    scale = max(1.0, float(np.max(np.abs(pts))))
    s_max = SIZE_FACTOR * target_h / math.sqrt(dim)
    extent = pts.max(axis=0) - origin
    # diagonal faces meet axis faces at obtuse edges; grade every step toward its ends there
    mirrored = all(len(comp) == 1 for comp in components)
    spacing = np.zeros(dim)
    per_step = np.zeros(dim, dtype=int)
    graded = np.zeros(dim, dtype=bool)
    for comp in components:
        values = [rel[v, i] / ratios[i] for i in comp for v in range(len(rel))]
        step = _float_gcd(values, GRID_TOL * scale)
        stretch = 1.0 if len(comp) == 1 else GRADING_SLOPE
        n_sub = max(1, math.ceil(stretch * step * max(ratios[i] for i in comp) / s_max - 1e-9))
        if mirrored and int(round(extent[comp[0]] / step)) * n_sub % 2:
            n_sub += 1  # mid-plane on a grid line
        for i in comp:
            spacing[i] = step * ratios[i] / n_sub
            per_step[i] = n_sub
            graded[i] = len(comp) > 1
    counts = np.rint(extent / spacing).astype(int)
    if np.any(counts > MAX_CELLS_PER_AXIS):
        raise UnsupportedDomainError(f"grid of {counts.tolist()} cells is too fine for the requested size")
    return KuhnPlan(
        tuple(flips),
        tuple(float(o) for o in origin),
        tuple(float(s) for s in spacing),
        tuple(int(c) for c in counts),
        tuple(int(n) for n in per_step),
        tuple(bool(g) for g in graded),
        mirrored,
    )


def smootherstep(s: np.ndarray) -> np.ndarray:
    """6s⁵ − 15s⁴ + 10s³: monotone on [0, 1], cubic contact at both ends."""
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0)


def _axis_coordinates(plan: KuhnPlan, axis: int) -> np.ndarray:
    m = np.arange(plan.counts[axis] + 1)
    if not plan.graded or not plan.graded[axis]:
        return plan.origin[axis] + plan.spacing[axis] * m
    n_sub = plan.cells_per_step[axis]
    whole, part = np.divmod(m, n_sub)
    return plan.origin[axis] + plan.spacing[axis] * n_sub * (whole + smootherstep(part / n_sub))


def _kuhn_cells(counts: np.ndarray, mirrored: bool) -> np.ndarray:
    """d! path simplices per grid cube; mirrored grids reflect the diagonals across the mid-planes."""
    dim = len(counts)
    shape = tuple(counts + 1)
    corners = np.stack(np.meshgrid(*[np.arange(c) for c in counts], indexing="ij"), axis=-1).reshape(-1, dim)
    flip = corners >= (counts // 2) if mirrored else np.zeros_like(corners, dtype=bool)
    start = corners + flip
    direction = 1 - 2 * flip.astype(int)
    cells = []
    for perm in itertools.permutations(range(dim)):
        path = [start]
        for axis in perm:
            step = path[-1].copy()
            step[:, axis] += direction[:, axis]
            path.append(step)
        cells.append(np.column_stack([np.ravel_multi_index(tuple(p.T), shape) for p in path]))
    return np.vstack(cells)


def kuhn_mesh(domain: DomainSpec, target_h: float) -> Mesh:
    plan = kuhn_plan(domain, target_h)
    dim = domain.dim
    counts = np.array(plan.counts)
    flips = np.array(plan.flips, dtype=float)
    cells = _kuhn_cells(counts, plan.mirrored)

    # inside/outside is decided on the uniform grid; grading moves no vertex across a face
    uniform = [plan.origin[i] + plan.spacing[i] * np.arange(counts[i] + 1) for i in range(dim)]
    uniform = np.stack(np.meshgrid(*uniform, indexing="ij"), axis=-1).reshape(-1, dim) * flips
    inside = winding_number(as_polytope(domain), uniform[cells].mean(axis=1)) > 0.5

    axes = [_axis_coordinates(plan, i) for i in range(dim)]
    vertices = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim) * flips
    mesh = build_mesh(vertices, cells[inside], face_geometries(domain))
    layout = "mirrored" if plan.mirrored else ("graded" if any(plan.graded) else "uniform")
    logger.info(
        f"🧱 Kuhn mesh for {domain.name or 'domain'}: grid {plan.counts} ({layout}), "
        f"{mesh.n_cells} cells, h={mesh.h:.4g}"
    )
    return mesh


# ============================================================
# DISK
# ============================================================

def quarter_disk(radius: float, rings: int) -> Tuple[np.ndarray, np.ndarray]:
    """Vertices and triangles of {x, y ≥ 0, |p| ≤ R}; ring i carries 2i+1 points."""
    points = [(0.0, 0.0)]
    ring_index: List[List[int]] = [[0]]
    ring_angle: List[np.ndarray] = [np.zeros(1)]
    for i in range(1, rings + 1):
        r = radius * i / rings
        theta = 0.5 * np.pi * np.arange(2 * i + 1) / (2 * i)
        start = len(points)
        for k, t in enumerate(theta):
            if k == 0:
                points.append((r, 0.0))
            elif k == 2 * i:
                points.append((0.0, r))
            else:
                points.append((r * math.cos(t), r * math.sin(t)))
        ring_index.append(list(range(start, len(points))))
        ring_angle.append(theta)

    triangles = []
    for i in range(1, rings + 1):
        inner, outer = ring_index[i - 1], ring_index[i]
        a_in, a_out = ring_angle[i - 1], ring_angle[i]
        p = q = 0
        while p < len(inner) - 1 or q < len(outer) - 1:
            advance_outer = p == len(inner) - 1 or (q < len(outer) - 1 and a_out[q + 1] < a_in[p + 1])
            if advance_outer:
                triangles.append((inner[p], outer[q], outer[q + 1]))
                q += 1
            else:
                triangles.append((inner[p], outer[q], inner[p + 1]))
                p += 1
    return np.array(points), np.array(triangles, dtype=np.int64)


def disk_mesh(domain: DomainSpec, target_h: float) -> Mesh:
    kind: DiskKind = domain.kind
    rings = max(1, math.ceil(kind.radius / target_h - 1e-9))
    vertices, cells = quarter_disk(kind.radius, rings)
    for axis, side in enumerate(kind.clip):
        if side == -1:
            vertices[:, axis] *= -1
    for axis, side in enumerate(kind.clip):
        if side == 0:
            vertices, cells, _ = _mirror_arrays(vertices, cells, axis)
    mesh = build_mesh(vertices, cells, {f.face_id: f for f in disk_faces(kind)})
    logger.info(f"⭕ disk mesh R={kind.radius}, clip={kind.clip}: {mesh.n_cells} cells, h={mesh.h:.4g}")
    return mesh


# ============================================================
# SIMPLEX TEMPLATE
# ============================================================

def simplex_mesh(domain: DomainSpec, target_h: float) -> Mesh:
    poly = as_polytope(domain)
    mesh = build_mesh(poly.points, np.arange(domain.dim + 1)[None, :], face_geometries(domain))
    while mesh.h > SIZE_FACTOR * target_h:
        mesh = refine(mesh)
    logger.info(f"🔺 simplex mesh for {domain.name or 'domain'}: {mesh.n_cells} cells, h={mesh.h:.4g}")
    return mesh


# ============================================================
# MIRRORING
# ============================================================

@dataclass(frozen=True)
class VertexProvenance:
    """Where each vertex of an unfolded mesh came from.

    source[v] is the vertex of the original piece; reflection[v, i] is −1 when
    the copy was reflected across {x_i = 0} an odd number of times.
    """

    source: np.ndarray
    reflection: np.ndarray

    @classmethod
    def identity(cls, n: int, dim: int) -> "VertexProvenance":
        return cls(np.arange(n), np.ones((n, dim), dtype=int))

    def then(self, other: "VertexProvenance") -> "VertexProvenance":
        return VertexProvenance(self.source[other.source], self.reflection[other.source] * other.reflection)

    def sign(self, axes: Sequence[int]) -> np.ndarray:
        """Product of reflection signs over the given 1-based axes."""
        out = np.ones(len(self.source), dtype=int)
        for a in axes:
            out *= self.reflection[:, a - 1]
        return out


def _reflected_faces(faces: Mapping[str, FaceGeometry], axis: int) -> Dict[str, FaceGeometry]:
    """Faces of a mesh after mirroring across {x_axis = 0}: faces on the plane vanish,
    symmetric faces stay, others gain a reflected copy."""
    out: Dict[str, FaceGeometry] = {}
    a = axis - 1
    for face_id, face in faces.items():
        if getattr(face, "curved", False):
            out[face_id] = face
            continue
        n = np.array(face.normal)
        if abs(abs(n[a]) - 1.0) < 1e-12 and abs(face.offset) < 1e-12:
            continue
        out[face_id] = type(face)(face_id, face.normal, face.offset)
        m = n.copy()
        m[a] *= -1
        if np.allclose(m, n, atol=1e-12):
            continue
        out[f"{face_id}_r{axis}"] = type(face)(f"{face_id}_r{axis}", tuple(m), face.offset)
    return out


def _mirror_arrays(vertices: np.ndarray, cells: np.ndarray, a: int):
    vertices = np.array(vertices, dtype=float)
    scale = max(1.0, float(np.max(np.abs(vertices))))
    on_plane = np.abs(vertices[:, a]) <= 1e-12 * scale
    if len(np.unique(np.sign(vertices[~on_plane, a]))) > 1:
        raise InvalidInputError(f"mesh straddles the mirror plane x{a + 1} = 0")
    vertices[on_plane, a] = 0.0

    off = np.flatnonzero(~on_plane)
    copy_index = np.arange(len(vertices))
    copy_index[off] = len(vertices) + np.arange(len(off))
    mirrored = vertices[off].copy()
    mirrored[:, a] *= -1
    all_vertices = np.vstack([vertices, mirrored])
    all_cells = np.vstack([cells, copy_index[cells]])

    source = np.concatenate([np.arange(len(vertices)), off])
    reflection = np.ones((len(all_vertices), vertices.shape[1]), dtype=int)
    reflection[len(vertices):, a] = -1
    return all_vertices, all_cells, VertexProvenance(source, reflection)


def mirror_mesh(
    mesh: Mesh,
    axis: int,
    faces: Optional[Mapping[str, FaceGeometry]] = None,
) -> Tuple[Mesh, VertexProvenance]:
    """Union of the mesh and its reflection across {x_axis = 0} (axis 1-based).

    Vertices on the plane are shared. Boundary facets are re-tagged against
    `faces` (the unfolded domain's faces when known).
    """
    vertices, cells, provenance = _mirror_arrays(mesh.vertices, mesh.cells, axis - 1)
    target = dict(faces) if faces is not None else _reflected_faces(mesh.faces, axis)
    return build_mesh(vertices, cells, target), provenance


def positive_piece(domain: DomainSpec, axes: Sequence[int]) -> DomainSpec:
    """Ω ∩ {x_a ≥ 0 for a in axes} (1-based), all faces Neumann."""
    piece = domain.all_neumann()
    if isinstance(piece.kind, DiskKind):
        clip = list(piece.kind.clip)
        for a in axes:
            clip[a - 1] = 1
        kind = DiskKind(piece.kind.radius, tuple(clip))
        return make_domain(
            domain.dim, kind, name=domain.name, curvatures={"arc": 1.0 / kind.radius},
            symmetry_planes=[j for j in piece.symmetry_planes if j not in axes],
        )
    for a in axes:
        normal = np.zeros(domain.dim)
        normal[a - 1] = -1.0
        piece = clip_halfspace(piece, normal, 0.0, f"cut_x{a}")
    return piece


def unfold_mesh(
    piece_mesh: Mesh,
    domain: DomainSpec,
    axes: Sequence[int],
) -> Tuple[Mesh, VertexProvenance]:
    """Mirror a mesh of Ω ∩ {x_a ≥ 0, a ∈ axes} across the given axes back onto
    Ω ∩ {remaining clipped axes}. Intermediate faces come from the matching pieces."""
    axes = list(axes)
    mesh = piece_mesh
    provenance = VertexProvenance.identity(mesh.n_vertices, mesh.dim)
    for k, a in enumerate(axes):
        still_clipped = axes[k + 1:]
        target_domain = positive_piece(domain, still_clipped) if still_clipped else domain
        mesh, step = mirror_mesh(mesh, a, face_geometries(target_domain))
        provenance = provenance.then(step)
    return mesh, provenance


def symmetric_mesh(domain: DomainSpec, target_h: float) -> Mesh:
    axes = detect_symmetries(domain)
    if not axes:
        raise UnsupportedDomainError(f"{domain.name or 'domain'} has no reflection symmetry to exploit")
    piece = positive_piece(domain, axes)
    piece_mesh = _mesh_piece(piece, target_h)
    mesh, _ = unfold_mesh(piece_mesh, domain, axes)
    logger.info(f"🪞 mirrored mesh for {domain.name or 'domain'} across axes {list(axes)}: {mesh.n_cells} cells")
    return mesh


# ============================================================
# DISPATCH
# ============================================================

def _mesh_piece(domain: DomainSpec, target_h: float) -> Mesh:
    if isinstance(domain.kind, DiskKind):
        return disk_mesh(domain, target_h)
    poly = as_polytope(domain)
    if len(poly.vertices) == domain.dim + 1:
        return simplex_mesh(domain, target_h)
    return kuhn_mesh(domain, target_h)


def generate_mesh(domain: DomainSpec, target_h: float) -> Mesh:
    if not target_h > 0:
        raise InvalidInputError(f"target_h must be positive, got {target_h}")
    if isinstance(domain.kind, IntervalKind):
        raise UnsupportedDomainError("intervals are product factors only and are not meshed on their own")
    try:
        return _mesh_piece(domain, target_h)
    except UnsupportedDomainError as first:
        if not detect_symmetries(domain):
            raise UnsupportedDomainError(
                f"no bundled generator applies to {domain.name or 'this domain'} ({first}); "
                "mesh it externally and load it with read_mesh"
            ) from first
        logger.info(f"↪️ {first}; meshing one symmetric piece instead")
        return symmetric_mesh(domain, target_h)
