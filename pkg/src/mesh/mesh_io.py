# src/mesh/mesh_io.py
"""
Plain-text mesh files.

    mesh <dim> <nv> <nc> <nbf>
    v x y [z]
    c i j k [l]
    b i j [k] <face_id>
    bn <facet_index> n1 n2 [n3]
    bs <facet_index> <d*d shape-operator entries, row-major>
    curved <face_id> <radius>

Indices are 0-based. Floats are written with 17 significant digits so a
write/read round trip is bit-exact. Planar faces are rebuilt from the
stored facet normals; curved faces come from `curved` lines.
"""

from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from src.geometry.domain import ArcFace, FaceGeometry, PlanarFace
from src.mesh.mesh import Mesh, assemble_facet_data, make_mesh
from src.utils.errors import MeshParseError
from src.utils.logger import get_logger

logger = get_logger("mesh_io")


def _fmt(x: float) -> str:
    return "%.17g" % x


def mesh_to_text(mesh: Mesh) -> str:
    d = mesh.dim
    lines = [f"mesh {d} {mesh.n_vertices} {mesh.n_cells} {len(mesh.facets)}"]
    lines += ["v " + " ".join(_fmt(c) for c in p) for p in mesh.vertices]
    lines += ["c " + " ".join(str(int(i)) for i in cell) for cell in mesh.cells]
    for facet, face_id in zip(mesh.facets, mesh.facet_ids):
        lines.append("b " + " ".join(str(int(i)) for i in facet) + f" {face_id}")
    for k, n in enumerate(mesh.facet_normals):
        lines.append(f"bn {k} " + " ".join(_fmt(c) for c in n))
    for k, s in enumerate(mesh.shape_samples):
        if np.any(s != 0):
            lines.append(f"bs {k} " + " ".join(_fmt(c) for c in s.ravel()))
    for face_id, face in sorted(mesh.faces.items()):
        if isinstance(face, ArcFace):
            lines.append(f"curved {face_id} {_fmt(face.radius)}")
    return "\n".join(lines) + "\n"


def write_mesh(mesh: Mesh, destination: Union[str, Path]) -> Path:
    path = Path(destination)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(mesh_to_text(mesh), encoding="utf-8")
    logger.info(f"💾 Wrote mesh {path} ({mesh.n_vertices} vertices, {mesh.n_cells} cells)")
    return path


def _numbers(tokens: List[str], kind, line_number: int):
    try:
        return [kind(t) for t in tokens]
    except ValueError:
        raise MeshParseError(f"expected {kind.__name__} values, got {' '.join(tokens)!r}", line_number) from None


def parse_mesh_text(text: str) -> Mesh:
    header = None
    vertices: List[List[float]] = []
    cells: List[List[int]] = []
    facets: List[List[int]] = []
    facet_ids: List[str] = []
    normals: Dict[int, List[float]] = {}
    shapes: Dict[int, List[float]] = {}
    curved: Dict[str, float] = {}

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if header is None:
            if key != "mesh" or len(rest) != 4:
                raise MeshParseError("file must start with 'mesh <dim> <nv> <nc> <nbf>'", line_number)
            header = _numbers(rest, int, line_number)
            if header[0] not in (2, 3):
                raise MeshParseError(f"dimension must be 2 or 3, got {header[0]}", line_number)
            continue
        d = header[0]
        if key == "v":
            coords = _numbers(rest, float, line_number)
            if len(coords) != d:
                raise MeshParseError(f"vertex needs {d} coordinates", line_number)
            vertices.append(coords)
        elif key == "c":
            idx = _numbers(rest, int, line_number)
            if len(idx) != d + 1:
                raise MeshParseError(f"cell needs {d + 1} vertex indices", line_number)
            if any(not 0 <= i < header[1] for i in idx):
                raise MeshParseError("cell references a missing vertex", line_number)
            cells.append(idx)
        elif key == "b":
            if len(rest) != d + 1:
                raise MeshParseError(f"boundary facet needs {d} indices and a face id", line_number)
            idx = _numbers(rest[:d], int, line_number)
            if any(not 0 <= i < header[1] for i in idx):
                raise MeshParseError("boundary facet references a missing vertex", line_number)
            facets.append(sorted(idx))
            facet_ids.append(rest[d])
        elif key in ("bn", "bs"):
            values = _numbers(rest[1:], float, line_number)
            k = _numbers(rest[:1], int, line_number)[0] if rest else -1
            want = d if key == "bn" else d * d
            if len(values) != want:
                raise MeshParseError(f"'{key}' needs a facet index and {want} values", line_number)
            (normals if key == "bn" else shapes)[k] = values
        elif key == "curved":
            if len(rest) != 2:
                raise MeshParseError("curved expects <face_id> <radius>", line_number)
            curved[rest[0]] = _numbers(rest[1:], float, line_number)[0]
        else:
            raise MeshParseError(f"unknown record '{key}'", line_number)

    if header is None:
        raise MeshParseError("empty mesh file")
    d, nv, nc, nbf = header
    if (len(vertices), len(cells), len(facets)) != (nv, nc, nbf):
        raise MeshParseError(
            f"header announces {nv}/{nc}/{nbf} vertices/cells/facets, file has "
            f"{len(vertices)}/{len(cells)}/{len(facets)}"
        )
    bad = [k for k in list(normals) + list(shapes) if not 0 <= k < nbf]
    if bad:
        raise MeshParseError(f"normal/shape record for missing facet {bad[0]}")

    v = np.array(vertices, dtype=float).reshape(-1, d)
    f = np.array(facets, dtype=np.int64).reshape(-1, d)
    faces = _rebuild_faces(v, f, facet_ids, normals, curved)
    default_normals, _ = assemble_facet_data(v, f, facet_ids, faces)
    facet_normals = np.array([normals.get(k, default_normals[k]) for k in range(nbf)], dtype=float).reshape(-1, d)
    shape_samples = np.array(
        [shapes.get(k, [0.0] * (d * d)) for k in range(nbf)], dtype=float
    ).reshape(-1, d, d)
    return make_mesh(v, np.array(cells, dtype=np.int64), f, facet_ids, faces, facet_normals, shape_samples)


def _rebuild_faces(vertices, facets, facet_ids, normals, curved) -> Dict[str, FaceGeometry]:
    faces: Dict[str, FaceGeometry] = {}
    for face_id, radius in curved.items():
        faces[face_id] = ArcFace(face_id, radius)
    for k, face_id in enumerate(facet_ids):
        if face_id in faces:
            continue
        if k not in normals:
            raise MeshParseError(f"planar face '{face_id}' has no stored normal (missing 'bn {k}')")
        n = np.array(normals[k], dtype=float)
        faces[face_id] = PlanarFace(face_id, tuple(float(c) for c in n), float(vertices[facets[k][0]] @ n))
    return faces


def read_mesh(source: Union[str, Path]) -> Mesh:
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise MeshParseError(f"cannot read {path}: {e}") from e
    mesh = parse_mesh_text(text)
    logger.info(f"📄 Loaded mesh {path.name}: {mesh.stats()}")
    return mesh
