# src/mesh/refine.py
"""
Uniform red refinement.

Triangles split into 4, tetrahedra into 8 (Bey's rule: local vertices sorted
by global index, interior octahedron cut along the m02–m13 diagonal).
Midpoint vertices are numbered after the old vertices in sorted-edge order,
so refinement is deterministic. Boundary facets are split alongside and keep
their face id; midpoints of arc facets are pushed onto the circle.
"""

from itertools import combinations

import numpy as np

from src.geometry.domain import ArcFace
from src.mesh.mesh import Mesh, make_mesh, orient_cells
from src.utils.logger import get_logger

logger = get_logger("refine")


def _edge_index(cells: np.ndarray):
    """Unique sorted edges and, per cell, the edge index of each local pair."""
    pairs = list(combinations(range(cells.shape[1]), 2))
    local = np.stack([np.sort(cells[:, [a, b]], axis=1) for a, b in pairs], axis=1)
    edges, inverse = np.unique(local.reshape(-1, 2), axis=0, return_inverse=True)
    return edges, inverse.reshape(len(cells), len(pairs)), pairs


def refine(mesh: Mesh) -> Mesh:
    vertices, cells = mesh.vertices, np.sort(mesh.cells, axis=1)
    nv = len(vertices)
    edges, cell_edges, pairs = _edge_index(cells)
    mid = nv + cell_edges  # midpoint vertex index per (cell, local pair)
    new_vertices = np.vstack([vertices, 0.5 * (vertices[edges[:, 0]] + vertices[edges[:, 1]])])

    m = {pair: mid[:, k] for k, pair in enumerate(pairs)}
    x = [cells[:, i] for i in range(cells.shape[1])]
    if mesh.dim == 2:
        children = [
            (x[0], m[(0, 1)], m[(0, 2)]),
            (m[(0, 1)], x[1], m[(1, 2)]),
            (m[(0, 2)], m[(1, 2)], x[2]),
            (m[(0, 1)], m[(1, 2)], m[(0, 2)]),
        ]
    else:
        children = [
            (x[0], m[(0, 1)], m[(0, 2)], m[(0, 3)]),
            (m[(0, 1)], x[1], m[(1, 2)], m[(1, 3)]),
            (m[(0, 2)], m[(1, 2)], x[2], m[(2, 3)]),
            (m[(0, 3)], m[(1, 3)], m[(2, 3)], x[3]),
            (m[(0, 1)], m[(0, 2)], m[(0, 3)], m[(1, 3)]),
            (m[(0, 1)], m[(0, 2)], m[(1, 2)], m[(1, 3)]),
            (m[(0, 2)], m[(0, 3)], m[(1, 3)], m[(2, 3)]),
            (m[(0, 2)], m[(1, 2)], m[(1, 3)], m[(2, 3)]),
        ]
    # child-major within each parent keeps numbering stable
    new_cells = np.stack([np.column_stack(c) for c in children], axis=1).reshape(-1, cells.shape[1])

    # boundary facets
    lookup = {(int(a), int(b)): nv + i for i, (a, b) in enumerate(edges)}

    def midpoint(a, b):
        return lookup[(min(a, b), max(a, b))]

    new_facets, new_ids = [], []
    for facet, face_id in zip(mesh.facets, mesh.facet_ids):
        f = [int(v) for v in facet]
        if mesh.dim == 2:
            mab = midpoint(f[0], f[1])
            parts = [(f[0], mab), (mab, f[1])]
            face = mesh.faces[face_id]
            if isinstance(face, ArcFace):
                p = new_vertices[mab]
                new_vertices[mab] = face.radius * p / np.linalg.norm(p)
        else:
            a, b, c = f
            mab, mbc, mca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            parts = [(a, mab, mca), (mab, b, mbc), (mca, mbc, c), (mab, mbc, mca)]
        for part in parts:
            new_facets.append(sorted(part))
            new_ids.append(face_id)

    new_cells = orient_cells(new_vertices, new_cells)
    refined = make_mesh(new_vertices, new_cells, np.array(new_facets), new_ids, mesh.faces)
    logger.debug(f"refined mesh: {mesh.n_cells} → {refined.n_cells} cells, h {mesh.h:.4g} → {refined.h:.4g}")
    return refined


def refine_times(mesh: Mesh, times: int) -> Mesh:
    for _ in range(times):
        mesh = refine(mesh)
    return mesh
