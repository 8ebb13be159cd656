# src/verify/oracles.py
"""
Closed-form reference eigenvalues for the domains where separation of
variables applies: axis-parallel rectangles and boxes (Neumann, one
Dirichlet face, Dirichlet everywhere, divergence-free cavity modes) and
disks (Bessel roots found with brentq).
"""

import itertools
from functools import lru_cache
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv, jvp

from src.geometry.domain import DiskKind, DomainSpec, PolytopeKind, axis_of_normal, face_geometries
from src.utils.errors import InvalidInputError

SCAN_STEP = 0.05


# ---------------------------
# Bessel roots
# ---------------------------

def _nth_root(f, n_root: int, start: float) -> float:
    if n_root < 1:
        raise InvalidInputError(f"root index must be ≥ 1, got {n_root}")
    found = 0
    a = start
    fa = f(a)
    while True:
        b = a + SCAN_STEP
        fb = f(b)
        if fa == 0.0:
            found += 1
            if found == n_root:
                return a
        elif fa * fb < 0:
            found += 1
            if found == n_root:
                return brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        a, fa = b, fb


@lru_cache(maxsize=None)
def bessel_j_root(order: int, k: int) -> float:
    """k-th positive zero of J_order."""
    return _nth_root(lambda x: jv(order, x), k, max(float(order), 0.5))


@lru_cache(maxsize=None)
def bessel_jp_root(order: int, k: int) -> float:
    """k-th positive zero of J'_order (x = 0 excluded for order 0)."""
    return _nth_root(lambda x: jvp(order, x), k, max(float(order), 0.5))


def disk_neumann_eigenvalues(radius: float, count: int) -> List[float]:
    """Smallest Neumann eigenvalues of the disk with multiplicity (0 first)."""
    values = [0.0]
    for order in range(0, count + 1):
        for k in range(1, count + 1):
            lam = (bessel_jp_root(order, k) / radius) ** 2
            values += [lam] * (1 if order == 0 else 2)
    return sorted(values)[:count]


def disk_dirichlet_eigenvalues(radius: float, count: int) -> List[float]:
    values = []
    for order in range(0, count + 1):
        for k in range(1, count + 1):
            lam = (bessel_j_root(order, k) / radius) ** 2
            values += [lam] * (1 if order == 0 else 2)
    return sorted(values)[:count]


# ---------------------------
# Rectangles and boxes
# ---------------------------

def box_eigenvalues(
    extents: Sequence[float],
    count: int,
    dirichlet_axis: Optional[int] = None,
    dirichlet_everywhere: bool = False,
) -> List[float]:
    """Eigenvalues of [0,a1]×…×[0,ad] with multiplicity.

    dirichlet_axis (1-based) puts Dirichlet on exactly one face perpendicular
    to that axis, Neumann elsewhere.
    """
    extents = [float(a) for a in extents]
    reach = count + 2
    per_axis = []
    for i, a in enumerate(extents):
        if dirichlet_everywhere:
            per_axis.append([(np.pi * m / a) ** 2 for m in range(1, reach + 1)])
        elif dirichlet_axis == i + 1:
            per_axis.append([(np.pi * (m + 0.5) / a) ** 2 for m in range(0, reach)])
        else:
            per_axis.append([(np.pi * m / a) ** 2 for m in range(0, reach)])
    values = sorted(sum(combo) for combo in itertools.product(*per_axis))
    return values[:count]


def box_divfree_eigenvalues(extents: Sequence[float], count: int) -> List[float]:
    """Divergence-free cavity modes: 2D rectangles give the Dirichlet spectrum,
    3D boxes the perfectly conducting cavity spectrum (at least two nonzero indices)."""
    extents = [float(a) for a in extents]
    if len(extents) == 2:
        return box_eigenvalues(extents, count, dirichlet_everywhere=True)
    reach = count + 2
    values = []
    for m in itertools.product(range(0, reach), repeat=3):
        nonzero = sum(1 for x in m if x)
        if nonzero < 2:
            continue
        lam = sum((np.pi * mi / a) ** 2 for mi, a in zip(m, extents))
        # two polarizations when all three indices are nonzero
        values += [lam] * (2 if nonzero == 3 else 1)
    return sorted(values)[:count]


# ---------------------------
# Domain lookup
# ---------------------------

def axis_box_extents(domain: DomainSpec) -> Optional[List[float]]:
    """Side lengths when the domain is an axis-parallel box, else None."""
    kind = domain.kind
    if not isinstance(kind, PolytopeKind):
        return None
    pts = kind.points
    if len(pts) != 2 ** domain.dim or len(kind.faces) != 2 * domain.dim:
        return None
    faces = face_geometries(domain)
    if any(axis_of_normal(np.array(f.normal)) is None for f in faces.values()):
        return None
    return list(pts.max(axis=0) - pts.min(axis=0))


def _dirichlet_axis(domain: DomainSpec) -> Optional[int]:
    faces = face_geometries(domain)
    for face_id in domain.dirichlet_faces():
        axis = axis_of_normal(np.array(faces[face_id].normal))
        return None if axis is None else axis + 1
    return None


def reference_oracle(domain: DomainSpec) -> Optional[float]:
    """μ₂ (all Neumann) or λ₁ (one Dirichlet face) when known in closed form."""
    mixed = bool(domain.dirichlet_faces())
    if isinstance(domain.kind, DiskKind) and not any(domain.kind.clip):
        if mixed:
            return None
        return (bessel_jp_root(1, 1) / domain.kind.radius) ** 2
    extents = axis_box_extents(domain)
    if extents is None:
        return None
    if mixed:
        return box_eigenvalues(extents, 1, dirichlet_axis=_dirichlet_axis(domain))[0]
    return box_eigenvalues(extents, 2)[1]


def divfree_oracle(domain: DomainSpec) -> Optional[float]:
    """Smallest divergence-free eigenvalue for all-Neumann boxes and disks."""
    if domain.dirichlet_faces():
        return None
    if isinstance(domain.kind, DiskKind) and not any(domain.kind.clip):
        # stream functions: the Dirichlet spectrum of the disk
        return disk_dirichlet_eigenvalues(domain.kind.radius, 1)[0]
    extents = axis_box_extents(domain)
    if extents is None:
        return None
    return box_divfree_eigenvalues(extents, 1)[0]
