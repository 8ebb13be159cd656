# src/geometry/builtins.py
"""
Built-in example domains.

rectangle(a, b)            [0,a]×[0,b], or centred on the origin
box(a, b, c)               [0,a]×[0,b]×[0,c], or centred
disk(radius)               centred at the origin
interval(length)           1D factor for products
double_triangle            2D analogue of the double prism
double_prism               {0≤x,y≤1, y−1 ≤ z ≤ x}: two prisms glued along a segment
double_prism_shifted(c)    upper prism lifted by c with the slab [0,1]²×[0,c] inserted
double_prism_truncated(C)  double prism cut by {y − x ≤ C}
octahedron(a, b, height)   a×b rectangular base in {z=0}, apices above/below its centre
l_shape(a)                 axis-parallel L (declared without exterior ball)
product(left, right)       polygon × interval
"""

from typing import Any, Callable, Dict, Mapping

import numpy as np

from src.geometry.domain import (
    DiskKind,
    DomainSpec,
    IntervalKind,
    PolytopeKind,
    ProductKind,
    make_domain,
)
from src.geometry.symmetry import clip_halfspace
from src.utils.errors import InvalidInputError
from src.utils.logger import get_logger

logger = get_logger("builtins")


def _positive(params: Mapping[str, Any], key: str, default: float) -> float:
    value = float(params.get(key, default))
    if not np.isfinite(value) or value <= 0:
        raise InvalidInputError(f"parameter '{key}' must be positive, got {value}")
    return value


def _shift(centered: bool, *extents: float):
    return [(-e / 2.0 if centered else 0.0) for e in extents]


# ---------------------------
# 2D
# ---------------------------

def rectangle(params: Mapping[str, Any]) -> DomainSpec:
    a = _positive(params, "a", 1.0)
    b = _positive(params, "b", 1.0)
    centered = bool(params.get("centered", False))
    x0, y0 = _shift(centered, a, b)
    vertices = ((x0, y0), (x0 + a, y0), (x0 + a, y0 + b), (x0, y0 + b))
    faces = ((0, 1), (1, 2), (2, 3), (3, 0))
    return make_domain(
        2, PolytopeKind(vertices, faces), labels=params.get("labels"),
        symmetry_planes=(1, 2) if centered else (), name="rectangle",
    )


def disk(params: Mapping[str, Any]) -> DomainSpec:
    radius = _positive(params, "radius", 1.0)
    return make_domain(
        2, DiskKind(radius), labels=params.get("labels"),
        symmetry_planes=(1, 2), name="disk", curvatures={"arc": 1.0 / radius},
    )


def double_triangle(params: Mapping[str, Any]) -> DomainSpec:
    vertices = ((0.0, -1.0), (1.0, 0.0), (1.0, 1.0), (0.0, 0.0))
    faces = ((0, 1), (1, 2), (2, 3), (3, 0))
    return make_domain(2, PolytopeKind(vertices, faces), labels=params.get("labels"), name="double_triangle")


def l_shape(params: Mapping[str, Any]) -> DomainSpec:
    a = _positive(params, "a", 1.0)
    vertices = ((0.0, 0.0), (2 * a, 0.0), (2 * a, a), (a, a), (a, 2 * a), (0.0, 2 * a))
    faces = tuple((i, (i + 1) % 6) for i in range(6))
    return make_domain(
        2, PolytopeKind(vertices, faces), labels=params.get("labels"),
        exterior_ball=False, name="l_shape",
    )


def interval(params: Mapping[str, Any]) -> DomainSpec:
    length = _positive(params, "length", params.get("c", 1.0))
    return make_domain(1, IntervalKind(length), name="interval")


# ---------------------------
# 3D
# ---------------------------

def box(params: Mapping[str, Any]) -> DomainSpec:
    a = _positive(params, "a", 1.0)
    b = _positive(params, "b", 1.0)
    c = _positive(params, "c", 1.0)
    centered = bool(params.get("centered", False))
    x0, y0, z0 = _shift(centered, a, b, c)
    vertices = tuple(
        (x0 + i * a, y0 + j * b, z0 + k * c) for k in (0, 1) for j in (0, 1) for i in (0, 1)
    )
    faces = (
        (0, 2, 3, 1),  # z = z0
        (4, 5, 7, 6),  # z = z0 + c
        (0, 1, 5, 4),  # y = y0
        (2, 6, 7, 3),  # y = y0 + b
        (0, 4, 6, 2),  # x = x0
        (1, 3, 7, 5),  # x = x0 + a
    )
    return make_domain(
        3, PolytopeKind(vertices, faces), labels=params.get("labels"),
        symmetry_planes=(1, 2, 3) if centered else (), name="box",
    )


_DOUBLE_PRISM_VERTICES = (
    (0.0, 0.0, 0.0),
    (1.0, 0.0, 1.0),
    (1.0, 1.0, 1.0),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, -1.0),
    (1.0, 0.0, -1.0),
    (1.0, 1.0, 0.0),
)
_DOUBLE_PRISM_FACES = (
    (0, 1, 2, 3),  # z = x
    (4, 5, 6, 3),  # z = y − 1
    (5, 6, 2, 1),  # x = 1
    (4, 5, 1, 0),  # y = 0
    (4, 0, 3),     # x = 0
    (3, 2, 6),     # y = 1
)


def double_prism(params: Mapping[str, Any]) -> DomainSpec:
    return make_domain(
        3, PolytopeKind(_DOUBLE_PRISM_VERTICES, _DOUBLE_PRISM_FACES),
        labels=params.get("labels"), name="double_prism",
    )


def double_prism_shifted(params: Mapping[str, Any]) -> DomainSpec:
    c = _positive(params, "c", 0.5)
    vertices = (
        (0.0, 0.0, c), (1.0, 0.0, 1.0 + c), (1.0, 1.0, 1.0 + c), (0.0, 1.0, c),
        (0.0, 0.0, -1.0), (1.0, 0.0, -1.0), (1.0, 1.0, 0.0), (0.0, 1.0, 0.0),
    )
    faces = (
        (0, 1, 2, 3),  # z = x + c
        (4, 5, 6, 7),  # z = y − 1
        (5, 6, 2, 1),  # x = 1
        (4, 5, 1, 0),  # y = 0
        (4, 0, 3, 7),  # x = 0
        (7, 6, 2, 3),  # y = 1
    )
    return make_domain(
        3, PolytopeKind(vertices, faces), labels=params.get("labels"), name="double_prism_shifted",
    )


def double_prism_truncated(params: Mapping[str, Any]) -> DomainSpec:
    cut = _positive(params, "cut", 0.5)
    if cut >= 1.0:
        raise InvalidInputError(f"truncation level must lie in (0, 1), got {cut}")
    base = double_prism({})
    clipped = clip_halfspace(base, (-1.0, 1.0, 0.0), cut / np.sqrt(2.0), "cut", name="double_prism_truncated")
    if params.get("labels"):
        return clipped.with_labels(params["labels"])
    return clipped


def octahedron(params: Mapping[str, Any]) -> DomainSpec:
    a = _positive(params, "a", 2.0)
    b = _positive(params, "b", 2.0)
    height = _positive(params, "height", 1.0)
    centered = bool(params.get("centered", True))
    x0, y0 = _shift(True, a, b)
    cx, cy = 0.0, 0.0
    if not centered:
        x0, y0, cx, cy = 0.0, 0.0, a / 2.0, b / 2.0
    vertices = (
        (x0, y0, 0.0), (x0 + a, y0, 0.0), (x0 + a, y0 + b, 0.0), (x0, y0 + b, 0.0),
        (cx, cy, height), (cx, cy, -height),
    )
    faces = []
    for i in range(4):
        k = (i + 1) % 4
        faces.append((i, k, 4))
        faces.append((k, i, 5))
    return make_domain(
        3, PolytopeKind(vertices, tuple(faces)), labels=params.get("labels"),
        symmetry_planes=(1, 2, 3) if centered else (), name="octahedron",
    )


# ---------------------------
# PRODUCT
# ---------------------------

def _factor(value: Any) -> DomainSpec:
    if isinstance(value, DomainSpec):
        return value
    if isinstance(value, str):
        return builtin_domain(value, {})
    if isinstance(value, (tuple, list)) and len(value) == 2:
        return builtin_domain(value[0], dict(value[1]))
    raise InvalidInputError(f"cannot interpret product factor {value!r}")


def product(params: Mapping[str, Any]) -> DomainSpec:
    left = _factor(params.get("left", "double_triangle"))
    right = _factor(params.get("right", "interval"))
    dim = left.dim + right.dim
    if dim != 3:
        raise InvalidInputError(f"product must be three-dimensional, got {left.dim} + {right.dim}")
    return make_domain(
        dim, ProductKind(left, right), labels=params.get("labels"),
        exterior_ball=left.exterior_ball_declared and right.exterior_ball_declared,
        name=f"product({left.name},{right.name})",
    )


BUILTINS: Dict[str, Callable[[Mapping[str, Any]], DomainSpec]] = {
    "rectangle": rectangle,
    "box": box,
    "disk": disk,
    "interval": interval,
    "double_triangle": double_triangle,
    "double_prism": double_prism,
    "double_prism_shifted": double_prism_shifted,
    "double_prism_truncated": double_prism_truncated,
    "octahedron": octahedron,
    "l_shape": l_shape,
    "product": product,
}


def builtin_domain(name: str, params: Mapping[str, Any] = None) -> DomainSpec:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise InvalidInputError(f"unknown builtin domain '{name}'; choose one of {sorted(BUILTINS)}") from None
    domain = factory(dict(params or {}))
    logger.debug(f"built {name}: {domain.describe()}")
    return domain
