# src/verify/convergence.py
"""
Eigenvalue convergence under uniform refinement.

Each level is one red refinement of the previous mesh, so the nominal mesh
size halves and the observed order is log2 of consecutive error ratios. The
reference value comes from the closed-form oracles when the domain has one,
otherwise from Aitken extrapolation of the last three levels.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from src.fem.scalar import assemble_scalar, solve_scalar_spectrum
from src.fem.vector import assemble_vector_A, solve_A_spectrum
from src.geometry.domain import DomainSpec
from src.mesh.generators import generate_mesh
from src.mesh.refine import refine
from src.utils.config import EIG_TOL, SEED
from src.utils.errors import InvalidInputError
from src.utils.logger import get_logger
from src.verify.checks import reference_eigenvalue
from src.verify.oracles import reference_oracle

logger = get_logger("convergence")

SCALAR = "scalar"
VECTOR = "eta1"
QUANTITIES = (SCALAR, VECTOR)


@dataclass
class ConvergenceTable:
    domain: str
    quantity: str
    reference: float
    reference_source: str
    table: pd.DataFrame

    @property
    def orders(self) -> np.ndarray:
        return self.table["order"].dropna().to_numpy()

    @property
    def observed_order(self) -> float:
        orders = self.orders
        return float(orders[-1]) if len(orders) else float("nan")

    @property
    def monotone(self) -> bool:
        """Values never increase under refinement."""
        v = self.table["value"].to_numpy()
        return bool(np.all(np.diff(v) <= 1e-12 * np.abs(v[:-1])))

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "quantity": self.quantity,
            "reference": self.reference,
            "reference_source": self.reference_source,
            "observed_order": self.observed_order,
            "monotone": self.monotone,
            "rows": [
                {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()}
                for row in self.table.to_dict(orient="records")
            ],
        }


def aitken(values) -> float:
    a, b, c = (float(v) for v in values[-3:])
    den = a - 2 * b + c
    if den == 0.0:
        return c
    return (a * c - b * b) / den


def _level_value(mesh, domain: DomainSpec, quantity: str, k: int, tol: float, seed: int) -> float:
    scalar = assemble_scalar(mesh, domain.bc)
    if quantity == SCALAR:
        return reference_eigenvalue(solve_scalar_spectrum(scalar, k, tol, seed)).eigenvalue
    system = assemble_vector_A(mesh, domain.bc, scalar)
    return solve_A_spectrum(system, 1, tol, seed)[0].eigenvalue


def convergence_study(
    domain: DomainSpec,
    levels: int,
    h0: float,
    quantity: str = SCALAR,
    k: int = 3,
    tol: float = EIG_TOL,
    seed: int = SEED,
    oracle: Optional[float] = None,
) -> ConvergenceTable:
    if levels < 3:
        raise InvalidInputError(f"a convergence study needs at least 3 levels, got {levels}")
    if quantity not in QUANTITIES:
        raise InvalidInputError(f"quantity must be one of {QUANTITIES}, got {quantity!r}")

    rows = []
    mesh = generate_mesh(domain, h0)
    for level in range(levels):
        if level:
            mesh = refine(mesh)
        value = _level_value(mesh, domain, quantity, k, tol, seed)
        rows.append({"level": level, "h": mesh.h, "vertices": mesh.n_vertices, "cells": mesh.n_cells, "value": value})
        logger.info(f"📈 level {level}: h={mesh.h:.4g}, {quantity}={value:.10g}")

    reference = oracle if oracle is not None else reference_oracle(domain)
    source = "analytic"
    if reference is None:
        reference = aitken([r["value"] for r in rows])
        source = "extrapolated"

    df = pd.DataFrame(rows)
    df["error"] = (df["value"] - reference).abs()
    ratio = df["error"].shift(1) / df["error"]
    df["order"] = np.log2(ratio.where(ratio > 0))
    return ConvergenceTable(domain.name or "domain", quantity, float(reference), source, df)
