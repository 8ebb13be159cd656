# src/mesh/mesh.py
"""
Simplicial mesh with tagged boundary facets.

Vertices are an (nv, d) array, cells an (nc, d+1) array of vertex indices with
positive signed volume. Boundary facets are found topologically (facets owned
by exactly one cell) and tagged with the id of the domain face they lie on.
Each tagged facet carries the exact outward normal of its face and one
midpoint sample of the face's shape operator; neither is estimated from the
discrete geometry.
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.geometry.domain import ArcFace, FaceGeometry, PlanarFace
from src.utils.errors import MeshValidationError
from src.utils.logger import get_logger

logger = get_logger("mesh")

TAG_TOL = 1e-9
NORMAL_TOL = 1e-10


@dataclass(frozen=True)
class BoundaryFacet:
    vertices: Tuple[int, ...]
    face_id: str
    normal: Tuple[float, ...]
    shape_sample: Tuple[Tuple[float, ...], ...]


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray
    cells: np.ndarray
    facets: np.ndarray
    facet_ids: Tuple[str, ...]
    facet_normals: np.ndarray
    shape_samples: np.ndarray
    faces: Mapping[str, FaceGeometry]

    @property
    def dim(self) -> int:
        return int(self.vertices.shape[1])

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_cells(self) -> int:
        return int(self.cells.shape[0])

    @cached_property
    def h(self) -> float:
        return float(np.max(cell_diameters(self.vertices, self.cells)))

    @cached_property
    def cell_volumes(self) -> np.ndarray:
        return signed_volumes(self.vertices, self.cells)

    @cached_property
    def facet_measures(self) -> np.ndarray:
        return facet_measures(self.vertices, self.facets)

    def volume(self) -> float:
        return float(np.sum(self.cell_volumes))

    def boundary_measure(self, face_id: Optional[str] = None) -> float:
        if face_id is None:
            return float(np.sum(self.facet_measures))
        mask = np.array([f == face_id for f in self.facet_ids], dtype=bool)
        return float(np.sum(self.facet_measures[mask]))

    @property
    def boundary_facets(self) -> List[BoundaryFacet]:
        return [
            BoundaryFacet(
                tuple(int(v) for v in self.facets[k]),
                self.facet_ids[k],
                tuple(float(c) for c in self.facet_normals[k]),
                tuple(tuple(float(c) for c in row) for row in self.shape_samples[k]),
            )
            for k in range(len(self.facets))
        ]

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.facets)

    @cached_property
    def vertex_face_ids(self) -> Dict[int, Tuple[str, ...]]:
        """Boundary vertex → sorted ids of the faces whose facets touch it."""
        incident: Dict[int, set] = {}
        for facet, face_id in zip(self.facets, self.facet_ids):
            for v in facet:
                incident.setdefault(int(v), set()).add(face_id)
        return {v: tuple(sorted(ids)) for v, ids in incident.items()}

    def vertices_on_face(self, face_id: str) -> np.ndarray:
        mask = np.array([f == face_id for f in self.facet_ids], dtype=bool)
        return np.unique(self.facets[mask])

    def has_curved_facets(self) -> bool:
        return bool(np.any(np.abs(self.shape_samples) > 0))

    def stats(self) -> dict:
        return {
            "dim": self.dim,
            "vertices": self.n_vertices,
            "cells": self.n_cells,
            "boundary_facets": int(len(self.facets)),
            "h": self.h,
        }

    def validate(self) -> None:
        vol = self.cell_volumes
        if np.any(vol <= 0):
            bad = int(np.argmin(vol))
            raise MeshValidationError(f"cell {bad} has non-positive volume {vol[bad]:.3e}")
        facets, _, _ = find_boundary_facets(self.cells)
        stored = {tuple(sorted(int(v) for v in f)) for f in self.facets}
        topo = {tuple(int(v) for v in f) for f in facets}
        if stored != topo or len(stored) != len(self.facets):
            raise MeshValidationError(
                f"boundary facets do not match cell incidence ({len(stored)} stored, {len(topo)} topological)"
            )
        interior = _interior_facet_multiplicity(self.cells)
        if interior > 2:
            raise MeshValidationError(f"a facet is shared by {interior} cells")
        for k, face_id in enumerate(self.facet_ids):
            face = self.faces.get(face_id)
            if face is None:
                raise MeshValidationError(f"boundary facet {k} refers to unknown face '{face_id}'")
            if isinstance(face, PlanarFace):
                if np.linalg.norm(self.facet_normals[k] - face.normal_at()) > NORMAL_TOL:
                    raise MeshValidationError(f"boundary facet {k} normal disagrees with face '{face_id}'")


# ============================================================
# GEOMETRIC HELPERS
# ============================================================

def signed_volumes(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    d = vertices.shape[1]
    p0 = vertices[cells[:, 0]]
    edges = np.stack([vertices[cells[:, i]] - p0 for i in range(1, d + 1)], axis=1)
    return np.linalg.det(edges) / (2.0 if d == 2 else 6.0)


def cell_diameters(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    d = cells.shape[1]
    longest = np.zeros(len(cells))
    for a, b in combinations(range(d), 2):
        longest = np.maximum(longest, np.linalg.norm(vertices[cells[:, a]] - vertices[cells[:, b]], axis=1))
    return longest


def facet_measures(vertices: np.ndarray, facets: np.ndarray) -> np.ndarray:
    if len(facets) == 0:
        return np.zeros(0)
    p = vertices[facets]
    if vertices.shape[1] == 2:
        return np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
    return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)


def orient_cells(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """Swap the last two vertices of negatively oriented cells."""
    cells = np.array(cells, dtype=np.int64, copy=True)
    neg = signed_volumes(vertices, cells) < 0
    cells[neg, -2], cells[neg, -1] = cells[neg, -1], cells[neg, -2].copy()
    return cells


def _local_facets(cells: np.ndarray):
    d1 = cells.shape[1]
    faces, opposite, owner = [], [], []
    for i in range(d1):
        keep = [j for j in range(d1) if j != i]
        faces.append(cells[:, keep])
        opposite.append(cells[:, i])
        owner.append(np.arange(len(cells)))
    return np.sort(np.vstack(faces), axis=1), np.concatenate(opposite), np.concatenate(owner)


def find_boundary_facets(cells: np.ndarray):
    """Sorted boundary facets, the vertex opposite each and the owning cell."""
    faces, opposite, owner = _local_facets(cells)
    _, first, counts = np.unique(faces, axis=0, return_index=True, return_counts=True)
    boundary = np.sort(first[counts == 1])
    return faces[boundary], opposite[boundary], owner[boundary]


def _interior_facet_multiplicity(cells: np.ndarray) -> int:
    faces, _, _ = _local_facets(cells)
    _, counts = np.unique(faces, axis=0, return_counts=True)
    return int(counts.max()) if len(counts) else 0


def facet_geometric_normals(vertices: np.ndarray, facets: np.ndarray, opposite: np.ndarray) -> np.ndarray:
    p = vertices[facets]
    if vertices.shape[1] == 2:
        t = p[:, 1] - p[:, 0]
        n = np.column_stack([t[:, 1], -t[:, 0]])
    else:
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    inward = np.einsum("ij,ij->i", n, vertices[opposite] - p[:, 0]) > 0
    n[inward] *= -1
    return n / np.linalg.norm(n, axis=1)[:, None]


def facet_sample(face: FaceGeometry, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Outward normal and shape-operator sample at the facet midpoint."""
    mid = points.mean(axis=0)
    if isinstance(face, ArcFace):
        mid = face.radius * mid / np.linalg.norm(mid)
    return face.normal_at(mid), face.shape_operator_at(mid)


# ============================================================
# TAGGING + CONSTRUCTION
# ============================================================

def tag_boundary(
    vertices: np.ndarray,
    facets: np.ndarray,
    opposite: np.ndarray,
    faces: Mapping[str, FaceGeometry],
    tol: float = TAG_TOL,
) -> List[str]:
    """Face id of every boundary facet; planar faces take precedence over arcs."""
    scale = max(1.0, float(np.max(np.abs(vertices))))
    pts = vertices[facets]
    centroid = pts.mean(axis=1)
    geo = facet_geometric_normals(vertices, facets, opposite)

    planar = [f for f in faces.values() if isinstance(f, PlanarFace)]
    arcs = [f for f in faces.values() if isinstance(f, ArcFace)]
    match = np.zeros((len(facets), len(planar)), dtype=bool)
    for c, face in enumerate(planar):
        n = face.normal_at()
        dist = np.abs(pts @ n - face.offset)
        match[:, c] = np.all(dist <= tol * scale, axis=1) & (geo @ n > 0.5)

    ids: List[str] = []
    for k in range(len(facets)):
        candidates = [planar[c] for c in np.flatnonzero(match[k])]
        if len(candidates) > 1:
            candidates = [f for f in candidates if f.contains(centroid[k])] or candidates[:1]
        if candidates:
            ids.append(candidates[0].face_id)
            continue
        for arc in arcs:
            radii = np.linalg.norm(pts[k], axis=1)
            if np.all(np.abs(radii - arc.radius) <= tol * arc.radius) and geo[k] @ centroid[k] > 0:
                ids.append(arc.face_id)
                break
        else:
            raise MeshValidationError(
                f"boundary facet {k} at {centroid[k].round(6).tolist()} lies on no domain face"
            )
    return ids


def assemble_facet_data(vertices: np.ndarray, facets: np.ndarray, ids: Sequence[str], faces: Mapping[str, FaceGeometry]):
    d = vertices.shape[1]
    normals = np.zeros((len(facets), d))
    shapes = np.zeros((len(facets), d, d))
    for k, face_id in enumerate(ids):
        normals[k], shapes[k] = facet_sample(faces[face_id], vertices[facets[k]])
    return normals, shapes


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def make_mesh(
    vertices: np.ndarray,
    cells: np.ndarray,
    facets: np.ndarray,
    facet_ids: Sequence[str],
    faces: Mapping[str, FaceGeometry],
    facet_normals: Optional[np.ndarray] = None,
    shape_samples: Optional[np.ndarray] = None,
    validate: bool = True,
) -> Mesh:
    vertices = np.array(vertices, dtype=float)
    cells = np.array(cells, dtype=np.int64)
    facets = np.array(facets, dtype=np.int64).reshape(-1, vertices.shape[1])
    if facet_normals is None or shape_samples is None:
        facet_normals, shape_samples = assemble_facet_data(vertices, facets, facet_ids, faces)
    mesh = Mesh(
        _freeze(vertices),
        _freeze(cells),
        _freeze(facets),
        tuple(facet_ids),
        _freeze(np.array(facet_normals, dtype=float)),
        _freeze(np.array(shape_samples, dtype=float)),
        dict(faces),
    )
    if validate:
        mesh.validate()
    return mesh


def build_mesh(vertices: np.ndarray, cells: np.ndarray, faces: Mapping[str, FaceGeometry]) -> Mesh:
    """Orient cells, drop unused vertices, find and tag boundary facets."""
    vertices = np.asarray(vertices, dtype=float)
    cells = np.asarray(cells, dtype=np.int64)
    used = np.unique(cells)
    if len(used) != len(vertices):
        remap = -np.ones(len(vertices), dtype=np.int64)
        remap[used] = np.arange(len(used))
        vertices, cells = vertices[used], remap[cells]
    cells = orient_cells(vertices, cells)
    facets, opposite, _ = find_boundary_facets(cells)
    ids = tag_boundary(vertices, facets, opposite, faces)
    mesh = make_mesh(vertices, cells, facets, ids, faces)
    logger.debug(f"built mesh {mesh.stats()}")
    return mesh
