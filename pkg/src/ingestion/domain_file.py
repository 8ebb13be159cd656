# src/ingestion/domain_file.py
"""
Reads plain-text domain descriptions into a DomainSpec.

    # comment
    dim 3
    vertex 0 0 0
    ...
    face 0 1 2 3 bc=dirichlet
    symmetry 1 2
    exterior_ball yes
    curvature arc 1.0
    disk 1.0            (extension: the disk kind instead of vertices/faces)

Faces are numbered f0, f1, ... in the order they appear.
This module only parses and validates. Meshing is handled by src.mesh.
"""

from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from src.geometry.domain import BC_VALUES, DiskKind, DomainSpec, PolytopeKind, make_domain
from src.utils.errors import DomainParseError
from src.utils.logger import get_logger

logger = get_logger("domain_file")

CURVATURE_TOL = 1e-9


def _floats(tokens: List[str], line_number: int) -> List[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise DomainParseError(f"expected numbers, got {' '.join(tokens)!r}", line_number) from None


def _ints(tokens: List[str], line_number: int) -> List[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise DomainParseError(f"expected integers, got {' '.join(tokens)!r}", line_number) from None


def parse_domain_text(text: str, name: str = "file") -> DomainSpec:
    dim: Optional[int] = None
    vertices: List[Tuple[float, ...]] = []
    faces: List[Tuple[int, ...]] = []
    labels: Dict[str, str] = {}
    symmetry: List[int] = []
    exterior_ball = True
    curvatures: Dict[str, Tuple[float, int]] = {}
    radius: Optional[float] = None

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *rest = line.split()
        keyword = keyword.lower()

        if keyword == "dim":
            values = _ints(rest, line_number)
            if len(values) != 1 or values[0] not in (2, 3):
                raise DomainParseError("dim must be 2 or 3", line_number)
            dim = values[0]
        elif keyword == "vertex":
            if dim is None:
                raise DomainParseError("'dim' must precede 'vertex'", line_number)
            coords = _floats(rest, line_number)
            if len(coords) != dim:
                raise DomainParseError(f"vertex needs {dim} coordinates, got {len(coords)}", line_number)
            vertices.append(tuple(coords))
        elif keyword == "face":
            bc = None
            indices = []
            for token in rest:
                if token.lower().startswith("bc="):
                    bc = token.split("=", 1)[1].lower()
                    if bc not in BC_VALUES:
                        raise DomainParseError(f"unknown boundary condition '{bc}'", line_number)
                else:
                    indices.append(token)
            idx = _ints(indices, line_number)
            for i in idx:
                if not 0 <= i < len(vertices):
                    raise DomainParseError(f"face references missing vertex {i}", line_number)
            if dim is not None and len(idx) < dim:
                raise DomainParseError(f"face needs at least {dim} vertices", line_number)
            face_id = f"f{len(faces)}"
            faces.append(tuple(idx))
            if bc is not None:
                labels[face_id] = bc
        elif keyword == "symmetry":
            symmetry.extend(_ints(rest, line_number))
        elif keyword == "exterior_ball":
            if len(rest) != 1 or rest[0].lower() not in ("yes", "no"):
                raise DomainParseError("exterior_ball expects yes or no", line_number)
            exterior_ball = rest[0].lower() == "yes"
        elif keyword == "curvature":
            if len(rest) != 2:
                raise DomainParseError("curvature expects <face_id> <kappa>", line_number)
            curvatures[rest[0]] = (_floats(rest[1:], line_number)[0], line_number)
        elif keyword == "disk":
            values = _floats(rest, line_number)
            if len(values) != 1 or values[0] <= 0:
                raise DomainParseError("disk expects one positive radius", line_number)
            radius = values[0]
        else:
            raise DomainParseError(f"unknown keyword '{keyword}'", line_number)

    if radius is not None:
        if vertices or faces:
            raise DomainParseError("a disk description cannot also list vertices or faces")
        for face_id, (kappa, line_number) in curvatures.items():
            if face_id != "arc":
                raise DomainParseError(f"only the disk arc can be curved, got '{face_id}'", line_number)
            if abs(kappa - 1.0 / radius) > CURVATURE_TOL / radius:
                raise DomainParseError(f"arc curvature {kappa} does not match 1/R = {1.0 / radius}", line_number)
        return make_domain(
            2, DiskKind(radius), exterior_ball=exterior_ball,
            symmetry_planes=symmetry or (1, 2), name=name, curvatures={"arc": 1.0 / radius},
        )

    if dim is None:
        raise DomainParseError("missing 'dim' line")
    if not faces:
        raise DomainParseError("no faces given")
    for face_id, (kappa, line_number) in curvatures.items():
        # polytope faces are flat; only a zero curvature is consistent
        if kappa != 0.0:
            raise DomainParseError(f"face {face_id} is planar; curved polytope faces are not supported", line_number)

    # geometry problems (non-planar faces, open boundary, bad Dirichlet face) keep their own types
    return make_domain(
        dim,
        PolytopeKind(tuple(vertices), tuple(faces)),
        labels=labels,
        exterior_ball=exterior_ball,
        symmetry_planes=symmetry,
        name=name,
    )


def read_domain_file(path: Union[str, Path]) -> DomainSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DomainParseError(f"cannot read {path}: {e}") from e
    domain = parse_domain_text(text, name=path.stem)
    logger.info(f"📄 Loaded domain {path.name}: dim={domain.dim}, {len(domain.bc_labels)} faces")
    return domain
