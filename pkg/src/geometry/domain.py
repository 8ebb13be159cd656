# src/geometry/domain.py
"""
Declarative domain descriptions.

A DomainSpec is immutable and describes Ω, its faces, the boundary-condition
label of every face (Neumann / Dirichlet), the declared exterior-ball flag and
the coordinate planes it is symmetric in. Coordinate indices exposed to users
(symmetry planes, antisymmetry axis j) are 1-based; arrays are 0-based.

Face geometry
-------------
Every face has a FaceGeometry giving the outward unit normal and the shape
operator L_p (trivially extended in the normal direction). Planar faces have
L_p = 0. The only curved face supported is the circular arc of the 2D disk,
where L_p ∂f = −∂ν gives L_p = −(1/R)(I − ννᵀ).
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src.utils.errors import InvalidGeometryError, InvalidInputError
from src.utils.logger import get_logger

logger = get_logger("geometry")

NEUMANN = "neumann"
DIRICHLET = "dirichlet"
BC_VALUES = (NEUMANN, DIRICHLET)

PLANARITY_TOL = 1e-12
AXIS_NORMAL_TOL = 1e-12


# ============================================================
# FACE GEOMETRY
# ============================================================

@dataclass(frozen=True)
class PlanarFace:
    face_id: str
    normal: Tuple[float, ...]
    offset: float = 0.0  # ⟨normal, x⟩ = offset on the face
    polygon: Tuple[Tuple[float, ...], ...] = field(default=(), compare=False)

    curved = False

    @property
    def dim(self) -> int:
        return len(self.normal)

    def normal_at(self, point=None) -> np.ndarray:
        return np.array(self.normal, dtype=float)

    def shape_operator_at(self, point=None) -> np.ndarray:
        return np.zeros((self.dim, self.dim))

    def contains(self, point, tol: float = 1e-9) -> bool:
        """Whether a point of the face plane lies inside the face polygon (True when unknown)."""
        if not self.polygon:
            return True
        poly = np.array(self.polygon, dtype=float)
        p = np.asarray(point, dtype=float)
        if self.dim == 2:
            d = poly[1] - poly[0]
            t = np.dot(p - poly[0], d) / np.dot(d, d)
            return -tol <= t <= 1 + tol
        # winding angle in the coordinate plane the face projects onto best;
        # query points are facet centroids, never on the polygon outline
        drop = int(np.argmax(np.abs(self.normal)))
        keep = [i for i in range(3) if i != drop]
        u = poly[:, keep] - p[keep]
        v = np.roll(u, -1, axis=0)
        angle = np.arctan2(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0], np.einsum("ij,ij->i", u, v))
        return abs(np.sum(angle)) > np.pi


@dataclass(frozen=True)
class ArcFace:
    """Circular arc of radius R centred at the origin (2D only)."""

    face_id: str
    radius: float

    curved = True
    dim = 2

    @property
    def curvature(self) -> float:
        return 1.0 / self.radius

    def normal_at(self, point) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        return p / np.linalg.norm(p)

    def shape_operator_at(self, point) -> np.ndarray:
        n = self.normal_at(point)
        return -self.curvature * (np.eye(2) - np.outer(n, n))


FaceGeometry = Union[PlanarFace, ArcFace]


# ============================================================
# DOMAIN KINDS
# ============================================================

@dataclass(frozen=True)
class PolytopeKind:
    vertices: Tuple[Tuple[float, ...], ...]
    faces: Tuple[Tuple[int, ...], ...]
    face_ids: Tuple[str, ...] = ()

    name = "polytope"

    @property
    def points(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    def ids(self) -> Tuple[str, ...]:
        return self.face_ids or tuple(f"f{i}" for i in range(len(self.faces)))


@dataclass(frozen=True)
class DiskKind:
    """Disk of the given radius centred at the origin.

    clip[i] = +1 keeps {x_i ≥ 0}, −1 keeps {x_i ≤ 0}, 0 leaves axis i unclipped.
    """

    radius: float
    clip: Tuple[int, int] = (0, 0)

    name = "disk"


@dataclass(frozen=True)
class IntervalKind:
    length: float

    name = "interval"


@dataclass(frozen=True)
class ProductKind:
    left: "DomainSpec"
    right: "DomainSpec"

    name = "product"


DomainKind = Union[PolytopeKind, DiskKind, IntervalKind, ProductKind]


@dataclass(frozen=True)
class DomainSpec:
    dim: int
    kind: DomainKind
    bc_labels: Tuple[Tuple[str, str], ...]
    exterior_ball_declared: bool = True
    symmetry_planes: Tuple[int, ...] = ()
    name: str = ""
    curvatures: Tuple[Tuple[str, float], ...] = ()

    @property
    def bc(self) -> Dict[str, str]:
        return dict(self.bc_labels)

    @property
    def face_ids(self) -> Tuple[str, ...]:
        return tuple(face_id for face_id, _ in self.bc_labels)

    def dirichlet_faces(self) -> List[str]:
        return [f for f, label in self.bc_labels if label == DIRICHLET]

    def with_labels(self, labels: Mapping[str, str]) -> "DomainSpec":
        unknown = set(labels) - set(self.face_ids)
        if unknown:
            raise InvalidInputError(f"boundary labels refer to unknown faces: {sorted(unknown)}")
        merged = self.bc
        merged.update({k: v.lower() for k, v in labels.items()})
        spec = replace(self, bc_labels=tuple(sorted(merged.items(), key=lambda kv: _face_order(kv[0]))))
        validate_domain(spec)
        return spec

    def all_neumann(self) -> "DomainSpec":
        return replace(self, bc_labels=tuple((f, NEUMANN) for f in self.face_ids))

    def describe(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "kind": self.kind.name,
            "faces": len(self.bc_labels),
            "bc": self.bc,
            "exterior_ball_declared": self.exterior_ball_declared,
            "symmetry_planes": list(self.symmetry_planes),
        }


def _face_order(face_id: str):
    if face_id.startswith("f") and face_id[1:].isdigit():
        return (0, int(face_id[1:]), "")
    return (1, 0, face_id)


# ============================================================
# POLYTOPE HELPERS
# ============================================================

def newell_normal(pts: np.ndarray) -> np.ndarray:
    """Area-weighted normal of a planar polygon (length = 2·area)."""
    nxt = np.roll(pts, -1, axis=0)
    return np.array([
        np.sum((pts[:, 1] - nxt[:, 1]) * (pts[:, 2] + nxt[:, 2])),
        np.sum((pts[:, 2] - nxt[:, 2]) * (pts[:, 0] + nxt[:, 0])),
        np.sum((pts[:, 0] - nxt[:, 0]) * (pts[:, 1] + nxt[:, 1])),
    ])


def _edges_of(face: Sequence[int], dim: int) -> List[Tuple[int, int]]:
    if dim == 2:
        return [(face[0], face[1])]
    return [(face[i], face[(i + 1) % len(face)]) for i in range(len(face))]


def orient_faces(vertices: np.ndarray, faces: Sequence[Sequence[int]]) -> List[Tuple[int, ...]]:
    """Return faces oriented consistently with outward normals.

    Orientation is propagated across shared edges (3D) or shared vertices (2D),
    then flipped globally if the enclosed signed volume is negative.
    """
    dim = vertices.shape[1]
    faces = [tuple(int(i) for i in f) for f in faces]
    nf = len(faces)
    if nf == 0:
        raise InvalidGeometryError("polytope has no faces")

    # adjacency through shared sub-faces (edges in 3D, vertices in 2D)
    incidence: Dict[Tuple[int, ...], List[int]] = {}
    for fi, f in enumerate(faces):
        keys = [tuple(sorted(e)) for e in _edges_of(f, 3)] if dim == 3 else [(f[0],), (f[1],)]
        for key in keys:
            incidence.setdefault(key, []).append(fi)
    for key, owners in incidence.items():
        if len(owners) != 2:
            raise InvalidGeometryError(
                f"boundary is not closed: {'edge' if dim == 3 else 'vertex'} {key} "
                f"belongs to {len(owners)} face(s)"
            )

    oriented: List[Optional[Tuple[int, ...]]] = [None] * nf
    for seed in range(nf):
        if oriented[seed] is not None:
            continue
        oriented[seed] = faces[seed]
        stack = [seed]
        while stack:
            fi = stack.pop()
            f = oriented[fi]
            if dim == 3:
                directed = _edges_of(f, 3)
                for a, b in directed:
                    for gj in incidence[tuple(sorted((a, b)))]:
                        if gj == fi:
                            continue
                        g = oriented[gj] if oriented[gj] is not None else faces[gj]
                        consistent = (b, a) in _edges_of(g, 3)
                        if oriented[gj] is None:
                            oriented[gj] = g if consistent else tuple(reversed(g))
                            stack.append(gj)
                        elif not consistent:
                            raise InvalidGeometryError("boundary is not orientable")
            else:
                head, tail = f[1], f[0]
                for key, want_first in (((head,), True), ((tail,), False)):
                    for gj in incidence[key]:
                        if gj == fi:
                            continue
                        g = oriented[gj] if oriented[gj] is not None else faces[gj]
                        # a consistent neighbour starts where this edge ends
                        consistent = (g[0] == key[0]) if want_first else (g[1] == key[0])
                        if oriented[gj] is None:
                            oriented[gj] = g if consistent else (g[1], g[0])
                            stack.append(gj)
                        elif not consistent:
                            raise InvalidGeometryError("boundary is not orientable")

    result = [tuple(f) for f in oriented]
    if _signed_volume(vertices, result) < 0:
        result = [tuple(reversed(f)) for f in result]
    return result


def _signed_volume(vertices: np.ndarray, faces: Sequence[Sequence[int]]) -> float:
    dim = vertices.shape[1]
    total = 0.0
    if dim == 2:
        for a, b in faces:
            pa, pb = vertices[a], vertices[b]
            total += 0.5 * (pa[0] * pb[1] - pb[0] * pa[1])
        return total
    for f in faces:
        p0 = vertices[f[0]]
        for i in range(1, len(f) - 1):
            total += np.dot(p0, np.cross(vertices[f[i]], vertices[f[i + 1]])) / 6.0
    return float(total)


def polytope_face_planes(kind: PolytopeKind) -> List[PlanarFace]:
    """Outward unit normal and plane offset of every face."""
    pts = kind.points
    dim = pts.shape[1]
    planes = []
    for face_id, f in zip(kind.ids(), kind.faces):
        fp = pts[list(f)]
        if dim == 2:
            d = fp[1] - fp[0]
            raw = np.array([d[1], -d[0]])
        else:
            raw = newell_normal(fp)
        norm = np.linalg.norm(raw)
        if norm <= 1e-14 * max(1.0, diameter_of(pts)):
            raise InvalidGeometryError(f"face {face_id} is degenerate (zero area)")
        n = raw / norm
        planes.append(PlanarFace(
            face_id,
            tuple(float(c) for c in n),
            float(np.dot(n, fp.mean(axis=0))),
            tuple(tuple(float(c) for c in p) for p in fp),
        ))
    return planes


def diameter_of(pts: np.ndarray) -> float:
    if len(pts) < 2:
        return 0.0
    return float(np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)))


def polytope_measure(kind: PolytopeKind) -> float:
    return abs(_signed_volume(kind.points, kind.faces))


def polytope_boundary_measure(kind: PolytopeKind) -> float:
    pts = kind.points
    if pts.shape[1] == 2:
        return float(sum(np.linalg.norm(pts[b] - pts[a]) for a, b in kind.faces))
    return float(sum(0.5 * np.linalg.norm(newell_normal(pts[list(f)])) for f in kind.faces))


def winding_number(kind: PolytopeKind, points: np.ndarray) -> np.ndarray:
    """Winding number of the boundary around each query point.

    2D: angle sum over oriented edges. 3D: solid angles of fan triangles
    (Van Oosterom–Strackee). Query points must not lie on the boundary.
    """
    pts = kind.points
    q = np.atleast_2d(np.asarray(points, dtype=float))
    total = np.zeros(len(q))
    if pts.shape[1] == 2:
        for a, b in kind.faces:
            u = pts[a] - q
            v = pts[b] - q
            cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
            dot = np.sum(u * v, axis=1)
            total += np.arctan2(cross, dot)
        return total / (2.0 * np.pi)
    for f in kind.faces:
        for i in range(1, len(f) - 1):
            a = pts[f[0]] - q
            b = pts[f[i]] - q
            c = pts[f[i + 1]] - q
            la, lb, lc = (np.linalg.norm(x, axis=1) for x in (a, b, c))
            det = np.einsum("ij,ij->i", a, np.cross(b, c))
            den = (la * lb * lc + np.einsum("ij,ij->i", a, b) * lc
                   + np.einsum("ij,ij->i", a, c) * lb + np.einsum("ij,ij->i", b, c) * la)
            total += 2.0 * np.arctan2(det, den)
    return total / (4.0 * np.pi)


# ============================================================
# PRODUCT MATERIALIZATION
# ============================================================

def as_polytope(domain: DomainSpec) -> PolytopeKind:
    """Polytope description of a polytope or product domain."""
    kind = domain.kind
    if isinstance(kind, PolytopeKind):
        return kind
    if isinstance(kind, ProductKind):
        return _product_polytope(kind.left, kind.right)
    raise InvalidGeometryError(f"{kind.name} domain has no polytope description")


def _product_polytope(left: DomainSpec, right: DomainSpec) -> PolytopeKind:
    # one factor must be an interval; the other a polygon
    if isinstance(left.kind, IntervalKind) and not isinstance(right.kind, IntervalKind):
        base, length, prepend = as_polytope(right), left.kind.length, True
    elif isinstance(right.kind, IntervalKind) and not isinstance(left.kind, IntervalKind):
        base, length, prepend = as_polytope(left), right.kind.length, False
    else:
        raise InvalidGeometryError("products are supported as polygon × interval only")
    pts = base.points
    if pts.shape[1] != 2:
        raise InvalidGeometryError("product base must be two-dimensional")
    n = len(pts)

    def lift(p, t):
        return (t, p[0], p[1]) if prepend else (p[0], p[1], t)

    vertices = [lift(p, 0.0) for p in pts] + [lift(p, length) for p in pts]
    polygon = _polygon_cycle(base)
    faces = [tuple(polygon), tuple(i + n for i in polygon)]
    ids = ["bottom", "top"]
    for face_id, (a, b) in zip(base.ids(), base.faces):
        faces.append((a, b, b + n, a + n))
        ids.append(face_id)
    oriented = orient_faces(np.array(vertices), faces)
    return PolytopeKind(tuple(vertices), tuple(oriented), tuple(ids))


def _polygon_cycle(kind: PolytopeKind) -> List[int]:
    nxt = {a: b for a, b in kind.faces}
    start = kind.faces[0][0]
    cycle = [start]
    while True:
        v = nxt[cycle[-1]]
        if v == start:
            break
        cycle.append(v)
    if len(cycle) != len(kind.faces):
        raise InvalidGeometryError("polygon boundary must be a single closed loop")
    return cycle


# ============================================================
# FACE GEOMETRY LOOKUP
# ============================================================

def disk_faces(kind: DiskKind) -> List[FaceGeometry]:
    faces: List[FaceGeometry] = [ArcFace("arc", float(kind.radius))]
    for axis, side in enumerate(kind.clip):
        if side != 0:
            normal = [0.0, 0.0]
            normal[axis] = -float(side)
            faces.append(PlanarFace(f"cut_x{axis + 1}", tuple(normal), 0.0))
    return faces


def face_geometries(domain: DomainSpec) -> Dict[str, FaceGeometry]:
    kind = domain.kind
    if isinstance(kind, DiskKind):
        return {f.face_id: f for f in disk_faces(kind)}
    return {f.face_id: f for f in polytope_face_planes(as_polytope(domain))}


def domain_volume(domain: DomainSpec) -> float:
    kind = domain.kind
    if isinstance(kind, DiskKind):
        kept = sum(1 for s in kind.clip if s != 0)
        return np.pi * kind.radius ** 2 / (2 ** kept)
    return polytope_measure(as_polytope(domain))


def boundary_measure(domain: DomainSpec) -> float:
    kind = domain.kind
    if isinstance(kind, DiskKind):
        kept = sum(1 for s in kind.clip if s != 0)
        return 2 * np.pi * kind.radius / (2 ** kept) + kept * kind.radius
    return polytope_boundary_measure(as_polytope(domain))


# ============================================================
# CONSTRUCTION + VALIDATION
# ============================================================

def make_domain(
    dim: int,
    kind: DomainKind,
    labels: Optional[Mapping[str, str]] = None,
    exterior_ball: bool = True,
    symmetry_planes: Iterable[int] = (),
    name: str = "",
    curvatures: Optional[Mapping[str, float]] = None,
) -> DomainSpec:
    """Build and validate a DomainSpec. Unlabelled faces default to Neumann."""
    if isinstance(kind, PolytopeKind):
        pts = kind.points
        if pts.ndim != 2 or pts.shape[1] != dim:
            raise InvalidInputError(f"vertices must be {dim}-vectors")
        oriented = orient_faces(pts, kind.faces)
        kind = PolytopeKind(kind.vertices, tuple(oriented), kind.ids())
    if isinstance(kind, IntervalKind):
        ids: Tuple[str, ...] = ("left", "right")
    elif isinstance(kind, DiskKind):
        ids = tuple(f.face_id for f in disk_faces(kind))
    else:
        ids = as_polytope(DomainSpec(dim, kind, ())).ids()

    labels = {k: v.lower() for k, v in (labels or {}).items()}
    unknown = set(labels) - set(ids)
    if unknown:
        raise InvalidInputError(f"boundary labels refer to unknown faces: {sorted(unknown)}")
    bc = tuple((f, labels.get(f, NEUMANN)) for f in ids)

    spec = DomainSpec(
        dim=dim,
        kind=kind,
        bc_labels=bc,
        exterior_ball_declared=bool(exterior_ball),
        symmetry_planes=tuple(sorted(set(int(j) for j in symmetry_planes))),
        name=name,
        curvatures=tuple(sorted((curvatures or {}).items())),
    )
    validate_domain(spec)
    return spec


def validate_domain(domain: DomainSpec) -> None:
    if isinstance(domain.kind, IntervalKind):
        if domain.dim != 1 or domain.kind.length <= 0:
            raise InvalidInputError("interval must be one-dimensional with positive length")
        return
    if domain.dim not in (2, 3):
        raise InvalidInputError(f"dimension must be 2 or 3, got {domain.dim}")

    for label in domain.bc.values():
        if label not in BC_VALUES:
            raise InvalidInputError(f"unknown boundary condition '{label}'")
    for j in domain.symmetry_planes:
        if not 1 <= j <= domain.dim:
            raise InvalidInputError(f"symmetry plane index {j} out of range 1..{domain.dim}")

    kind = domain.kind
    if isinstance(kind, DiskKind):
        if domain.dim != 2 or kind.radius <= 0:
            raise InvalidInputError("disk must be two-dimensional with positive radius")
        if any(s not in (-1, 0, 1) for s in kind.clip) or len(kind.clip) != 2:
            raise InvalidInputError("disk clip entries must be -1, 0 or 1")
    else:
        poly = as_polytope(domain)
        pts = poly.points
        diam = diameter_of(pts)
        if domain.dim == 3:
            for face_id, f in zip(poly.ids(), poly.faces):
                fp = pts[list(f)]
                centred = fp - fp.mean(axis=0)
                _, _, vt = np.linalg.svd(centred)
                dist = np.max(np.abs(centred @ vt[-1]))
                if dist > PLANARITY_TOL * diam:
                    raise InvalidGeometryError(
                        f"face {face_id} is not planar (deviation {dist:.3e}, diameter {diam:.3e})"
                    )
        polytope_face_planes(poly)  # raises on degenerate faces

    dirichlet = domain.dirichlet_faces()
    if len(dirichlet) > 1:
        raise InvalidInputError(f"at most one Dirichlet face is allowed, got {dirichlet}")
    if dirichlet:
        face = face_geometries(domain)[dirichlet[0]]
        if face.curved:
            raise InvalidInputError("the Dirichlet face must be flat")
        n = face.normal_at()
        if np.sum(np.abs(n) > AXIS_NORMAL_TOL) != 1:
            raise InvalidInputError(
                f"Dirichlet face {dirichlet[0]} must be perpendicular to a coordinate axis"
            )


def axis_of_normal(normal: np.ndarray, tol: float = AXIS_NORMAL_TOL) -> Optional[int]:
    """0-based axis j when normal = ±e_j, else None."""
    mask = np.abs(normal) > tol
    if np.sum(mask) == 1:
        return int(np.argmax(mask))
    return None
