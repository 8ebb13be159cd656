# src/geometry/symmetry.py
"""
Reflection symmetries, half-space clipping and orthant restriction.
"""

import itertools
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.geometry.domain import (
    DIRICHLET,
    NEUMANN,
    DiskKind,
    DomainSpec,
    PolytopeKind,
    as_polytope,
    diameter_of,
    make_domain,
)
from src.geometry.lip import is_lip
from src.utils.errors import InvalidGeometryError, InvalidInputError, PreconditionError, UnsupportedDomainError
from src.utils.logger import get_logger

logger = get_logger("symmetry")

SYMMETRY_TOL = 1e-9


def detect_symmetries(domain: DomainSpec, tol: float = SYMMETRY_TOL) -> Tuple[int, ...]:
    """1-based j such that x_j ↦ −x_j maps Ω onto itself."""
    kind = domain.kind
    if isinstance(kind, DiskKind):
        return tuple(j + 1 for j, side in enumerate(kind.clip) if side == 0)

    poly = as_polytope(domain)
    pts = poly.points
    scale = max(diameter_of(pts), 1.0)
    face_sets = {frozenset(f) for f in poly.faces}
    found = []
    for j in range(domain.dim):
        mirrored = pts.copy()
        mirrored[:, j] *= -1
        dist = np.linalg.norm(mirrored[:, None, :] - pts[None, :, :], axis=-1)
        image = np.argmin(dist, axis=1)
        if np.any(dist[np.arange(len(pts)), image] > tol * scale):
            continue
        if len(set(image.tolist())) != len(pts):
            continue
        if all(frozenset(int(image[v]) for v in f) in face_sets for f in poly.faces):
            found.append(j + 1)
    return tuple(found)


# ============================================================
# CLIPPING
# ============================================================

def _chain_loop(edges: List[Tuple[int, int]]) -> List[int]:
    adjacency: Dict[int, List[int]] = {}
    for a, b in edges:
        adjacency.setdefault(a, []).append(b)
        adjacency.setdefault(b, []).append(a)
    if any(len(v) != 2 for v in adjacency.values()):
        raise UnsupportedDomainError("clipping produced a cap that is not a simple polygon")
    start = edges[0][0]
    loop = [start]
    prev, cur = None, start
    while True:
        a, b = adjacency[cur]
        nxt = a if a != prev else b
        if nxt == start:
            break
        loop.append(nxt)
        prev, cur = cur, nxt
    if len(loop) != len(adjacency):
        raise UnsupportedDomainError("clipping produced a cap with several components")
    return loop


def clip_halfspace(
    domain: DomainSpec,
    normal: Sequence[float],
    offset: float,
    cap_id: str,
    cap_label: str = NEUMANN,
    name: Optional[str] = None,
) -> DomainSpec:
    """Keep {⟨normal, x⟩ ≤ offset}. Faces keep their ids and labels; the new face is cap_id."""
    poly = as_polytope(domain)
    pts = poly.points
    dim = domain.dim
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    scale = max(diameter_of(pts), 1.0)
    s = pts @ n - offset
    s[np.abs(s) <= 1e-12 * scale] = 0.0

    if np.all(s <= 0):
        return domain
    if not np.any(s < 0):
        raise InvalidGeometryError(f"clipping by {cap_id} leaves an empty domain")

    axis = int(np.argmax(np.abs(n))) if np.sum(np.abs(n) > 1e-15) == 1 else None
    new_pts: List[np.ndarray] = [p for p in pts]
    cuts: Dict[Tuple[int, int], int] = {}

    def cut(a: int, b: int) -> int:
        key = (min(a, b), max(a, b))
        if key not in cuts:
            i, k = key
            t = s[i] / (s[i] - s[k])
            p = pts[i] + t * (pts[k] - pts[i])
            if axis is not None:
                p[axis] = offset / n[axis]
            cuts[key] = len(new_pts)
            new_pts.append(p)
        return cuts[key]

    on_plane = set(np.flatnonzero(s == 0).tolist())
    kept_faces: List[Tuple[int, ...]] = []
    kept_ids: List[str] = []
    for face_id, f in zip(poly.ids(), poly.faces):
        out: List[int] = []
        m = len(f)
        for i in range(m if dim == 3 else 1):
            a, b = f[i], f[(i + 1) % m]
            if s[a] <= 0:
                out.append(a)
            if s[a] * s[b] < 0:
                out.append(cut(a, b))
            if dim == 2 and s[b] <= 0:
                out.append(b)
        if len(out) < dim:
            continue
        if all((v in on_plane) or (v >= len(pts)) for v in out):
            continue
        kept_faces.append(tuple(out))
        kept_ids.append(face_id)

    if dim == 3:
        count: Dict[Tuple[int, int], int] = {}
        for f in kept_faces:
            for i in range(len(f)):
                key = tuple(sorted((f[i], f[(i + 1) % len(f)])))
                count[key] = count.get(key, 0) + 1
        boundary = [e for e, c in count.items() if c == 1]
        if not boundary:
            raise InvalidGeometryError(f"clipping by {cap_id} produced no cap")
        cap = tuple(_chain_loop(boundary))
    else:
        count1: Dict[int, int] = {}
        for f in kept_faces:
            for v in f:
                count1[v] = count1.get(v, 0) + 1
        ends = [v for v, c in count1.items() if c == 1]
        if len(ends) != 2:
            raise UnsupportedDomainError("clipping a polygon must produce a single cut segment")
        cap = tuple(ends)
    kept_faces.append(cap)
    kept_ids.append(cap_id)

    # drop vertices no face uses and renumber
    used = sorted({v for f in kept_faces for v in f})
    remap = {old: new for new, old in enumerate(used)}
    vertices = tuple(tuple(float(c) for c in new_pts[v]) for v in used)
    faces = tuple(tuple(remap[v] for v in f) for f in kept_faces)

    labels = {fid: lab for fid, lab in domain.bc.items() if fid in kept_ids}
    labels[cap_id] = cap_label
    return make_domain(
        dim,
        PolytopeKind(vertices, faces, tuple(kept_ids)),
        labels=labels,
        exterior_ball=domain.exterior_ball_declared,
        name=name or domain.name,
    )


# ============================================================
# ORTHANT / HALF-DOMAIN RESTRICTION
# ============================================================

def _check_orthant(orthant: Sequence[int], dim: int) -> Tuple[int, ...]:
    orthant = tuple(int(o) for o in orthant)
    if len(orthant) != dim or any(o not in (-1, 1) for o in orthant):
        raise InvalidInputError(f"orthant must be a vector of ±1 of length {dim}")
    return orthant


def orthant_restriction(
    domain: DomainSpec,
    orthant: Sequence[int],
    antisym_axis: int,
    half_only: bool = False,
) -> DomainSpec:
    """Ω ∩ O (or the half-domain {orthant_j·x_j > 0} when half_only) with Dirichlet on {x_j = 0}.

    antisym_axis is 1-based. Every other face, new or old, is Neumann.
    """
    dim = domain.dim
    orthant = _check_orthant(orthant, dim)
    if not 1 <= antisym_axis <= dim:
        raise InvalidInputError(f"axis j={antisym_axis} out of range 1..{dim}")
    symmetric = detect_symmetries(domain)
    if set(symmetric) != set(range(1, dim + 1)):
        raise PreconditionError(
            f"domain must be symmetric in every coordinate plane, found planes {list(symmetric)}"
        )

    j0 = antisym_axis - 1
    axes = [j0] if half_only else list(range(dim))
    tag = f"half{antisym_axis}" if half_only else "orthant"
    name = f"{domain.name or 'domain'}_{tag}"
    remaining = [i + 1 for i in range(dim) if i not in axes]

    base = domain.all_neumann()
    kind = base.kind
    if isinstance(kind, DiskKind):
        clip = [0] * dim
        for i in axes:
            clip[i] = orthant[i]
        return make_domain(
            dim,
            DiskKind(kind.radius, tuple(clip)),
            labels={f"cut_x{antisym_axis}": DIRICHLET},
            exterior_ball=domain.exterior_ball_declared,
            symmetry_planes=remaining,
            name=name,
            curvatures={"arc": 1.0 / kind.radius},
        )

    clipped = base
    for i in axes:
        normal = np.zeros(dim)
        normal[i] = -orthant[i]
        label = DIRICHLET if i == j0 else NEUMANN
        clipped = clip_halfspace(clipped, normal, 0.0, f"cut_x{i + 1}", label, name=name)
    return make_domain(
        dim,
        clipped.kind,
        labels=clipped.bc,
        exterior_ball=clipped.exterior_ball_declared,
        symmetry_planes=remaining,
        name=name,
    )


def all_orthants(dim: int):
    return itertools.product((1, -1), repeat=dim)


def find_lip_orthants(domain: DomainSpec, antisym_axis: int = 1) -> List[Tuple[int, ...]]:
    """Orthants O (in a fixed order, all-positive first) with Ω ∩ O lip after a signed permutation."""
    found = []
    for orthant in all_orthants(domain.dim):
        piece = orthant_restriction(domain, orthant, antisym_axis)
        if is_lip(piece, search_orientations=True).is_lip:
            found.append(tuple(orthant))
    return found
