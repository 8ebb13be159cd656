# src/geometry/lip.py
"""
Lip-domain predicate.

A face normal is admissible when it is ±e_j, or when it has exactly two
nonzero components of opposite sign (equivalently: its orthogonal hyperplane
is a sublattice of R^d). A domain is lip when every boundary normal is
admissible, possibly after a rotation. Rotations are searched over the finite
group of signed axis permutations only.
"""

import itertools
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.geometry.domain import (
    ArcFace,
    DiskKind,
    DomainSpec,
    IntervalKind,
    ProductKind,
    as_polytope,
    disk_faces,
    polytope_face_planes,
)
from src.utils.errors import InvalidInputError
from src.utils.logger import get_logger

logger = get_logger("lip")

ZERO_COMPONENT_TOL = 1e-9
UNIT_TOL = 1e-6
ARC_SAMPLES = 64

AXIS = "axis"
OPPOSITE_PAIR = "opposite_pair"
VIOLATING = "violating"


@dataclass(frozen=True)
class Orientation:
    """x'_i = signs[i] · x_{permutation[i]} (0-based axes)."""

    permutation: Tuple[int, ...]
    signs: Tuple[int, ...]

    @property
    def is_identity(self) -> bool:
        return self.permutation == tuple(range(len(self.permutation))) and all(s == 1 for s in self.signs)

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        v = np.asarray(vectors, dtype=float)
        return v[..., list(self.permutation)] * np.array(self.signs, dtype=float)

    def to_dict(self) -> dict:
        return {
            "type": "none" if self.is_identity else "permutation_reflection",
            "permutation": [p + 1 for p in self.permutation],
            "signs": list(self.signs),
        }


@dataclass(frozen=True)
class FaceClass:
    face_id: str
    klass: str
    axes: Tuple[int, ...] = ()  # 1-based
    signs: Tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {"face_id": self.face_id, "class": self.klass, "axes": list(self.axes), "signs": list(self.signs)}


@dataclass(frozen=True)
class LipVerdict:
    is_lip: bool
    witness_faces: Tuple[FaceClass, ...]
    rotation_applied: Optional[Orientation] = None
    searched: bool = False
    note: str = ""

    def violating(self) -> List[str]:
        return [f.face_id for f in self.witness_faces if f.klass == VIOLATING]

    def to_dict(self) -> dict:
        return {
            "is_lip": self.is_lip,
            "rotation_applied": (self.rotation_applied.to_dict() if self.rotation_applied else {"type": "none"}),
            "orientation_search": "signed_axis_permutations" if self.searched else "off",
            "faces": [f.to_dict() for f in self.witness_faces],
            "note": self.note,
        }


# ============================================================
# NORMAL TESTS
# ============================================================

def _check_unit(nu: np.ndarray) -> None:
    if abs(np.linalg.norm(nu) - 1.0) > UNIT_TOL:
        raise InvalidInputError(f"normal must be a unit vector, |nu| = {np.linalg.norm(nu):.6g}")


def _nonzero_mask(nu: np.ndarray, tol: float) -> np.ndarray:
    scale = np.max(np.abs(nu))
    return np.abs(nu) > tol * scale


def normal_sublattice_ok(nu, tol: float = ZERO_COMPONENT_TOL) -> bool:
    """True iff the hyperplane orthogonal to nu is closed under |·|."""
    nu = np.asarray(nu, dtype=float)
    if not 0 < tol <= 1e-6:
        raise InvalidInputError(f"tol must lie in (0, 1e-6], got {tol}")
    _check_unit(nu)
    mask = _nonzero_mask(nu, tol)
    count = int(np.sum(mask))
    if count == 1:
        return True
    if count == 2:
        a, b = nu[mask]
        return bool(a * b < 0)
    return False


def classify_normal(face_id: str, nu, tol: float = ZERO_COMPONENT_TOL) -> FaceClass:
    nu = np.asarray(nu, dtype=float)
    mask = _nonzero_mask(nu, tol)
    axes = tuple(int(i) + 1 for i in np.flatnonzero(mask))
    signs = tuple(int(np.sign(nu[i - 1])) for i in axes)
    if not normal_sublattice_ok(nu, tol):
        return FaceClass(face_id, VIOLATING, axes, signs)
    return FaceClass(face_id, AXIS if len(axes) == 1 else OPPOSITE_PAIR, axes, signs)


# ============================================================
# FACE NORMAL SAMPLES
# ============================================================

def arc_normal_samples(kind: DiskKind) -> np.ndarray:
    """Unit normals of the arc at angles strictly inside the kept sector."""
    theta = 2 * np.pi * (np.arange(ARC_SAMPLES) + 0.5) / ARC_SAMPLES
    normals = np.column_stack([np.cos(theta), np.sin(theta)])
    keep = np.ones(len(normals), dtype=bool)
    for axis, side in enumerate(kind.clip):
        if side != 0:
            keep &= side * normals[:, axis] > 0
    return normals[keep]


def face_normal_samples(domain: DomainSpec) -> List[Tuple[str, np.ndarray]]:
    """(face_id, normals) for every face; planar faces contribute one normal."""
    kind = domain.kind
    if isinstance(kind, IntervalKind):
        return [("left", np.array([[-1.0]])), ("right", np.array([[1.0]]))]
    if isinstance(kind, DiskKind):
        out = []
        for face in disk_faces(kind):
            if isinstance(face, ArcFace):
                out.append((face.face_id, arc_normal_samples(kind)))
            else:
                out.append((face.face_id, np.atleast_2d(face.normal_at())))
        return out
    return [(p.face_id, np.atleast_2d(p.normal_at())) for p in polytope_face_planes(as_polytope(domain))]


def _classify_face(face_id: str, normals: np.ndarray, tol: float) -> FaceClass:
    classes = [classify_normal(face_id, n, tol) for n in normals]
    for c in classes:
        if c.klass == VIOLATING:
            return c
    # a curved face is reported by its first interior sample
    return classes[0]


def _classify_all(samples, orientation: Optional[Orientation], tol: float) -> Tuple[FaceClass, ...]:
    out = []
    for face_id, normals in samples:
        n = orientation.apply(normals) if orientation is not None else normals
        out.append(_classify_face(face_id, n, tol))
    return tuple(out)


def signed_axis_permutations(dim: int):
    """Identity first, then all other signed permutations in a fixed order."""
    for perm in itertools.permutations(range(dim)):
        for signs in itertools.product((1, -1), repeat=dim):
            yield Orientation(tuple(perm), tuple(signs))


# ============================================================
# PREDICATE
# ============================================================

def is_lip(domain: DomainSpec, search_orientations: bool = False, tol: float = ZERO_COMPONENT_TOL) -> LipVerdict:
    if isinstance(domain.kind, ProductKind) and not search_orientations:
        # product rule: the factors' normals never mix coordinates
        left = is_lip(domain.kind.left, False, tol)
        right = is_lip(domain.kind.right, False, tol)
        samples = face_normal_samples(domain)
        faces = _classify_all(samples, None, tol)
        verdict = LipVerdict(left.is_lip and right.is_lip, faces, None, False)
        if verdict.is_lip != all(f.klass != VIOLATING for f in faces):
            logger.warning(f"⚠️ product rule and face classification disagree for {domain.name}")
        return verdict

    samples = face_normal_samples(domain)
    given = _classify_all(samples, None, tol)
    if all(f.klass != VIOLATING for f in given):
        return LipVerdict(True, given, None, search_orientations)
    if not search_orientations:
        return LipVerdict(False, given, None, False)

    for orientation in signed_axis_permutations(domain.dim):
        if orientation.is_identity:
            continue
        faces = _classify_all(samples, orientation, tol)
        if all(f.klass != VIOLATING for f in faces):
            logger.info(f"🔄 {domain.name or 'domain'} is lip after signed permutation {orientation.to_dict()}")
            return LipVerdict(True, faces, orientation, True)

    return LipVerdict(
        False,
        given,
        None,
        True,
        note="no signed axis permutation makes every normal admissible; general rotations are not searched",
    )

