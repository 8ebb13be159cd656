# src/fem/eigensolve.py
"""
Smallest eigenpairs of K u = λ M u (K symmetric, M symmetric positive definite).

Sparse path: shift-invert Lanczos (ARPACK eigsh) with an LU factorization of
K − σM passed as OPinv. Small problems go to dense LAPACK eigh. Results are
finished with a Rayleigh–Ritz step on the computed subspace so eigenvectors
are M-orthonormal and sorted, then sign-normalized (largest-magnitude entry
positive) for reproducible output.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from src.utils.config import BLOCK_SIZE, EIG_MAX_ITER, EIG_TOL, SEED
from src.utils.errors import FactorizationError, InvalidInputError, NonConvergenceError
from src.utils.logger import get_logger

logger = get_logger("eigensolve")

AUTO_SHIFT = -0.01
DENSE_LIMIT = 600
MAX_SHIFT_RETRIES = 3
MAX_POLISH = 3
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class EigOptions:
    k: int
    tol: float = EIG_TOL
    max_iter: int = EIG_MAX_ITER
    shift: Optional[float] = None  # None: 0, moved to a small negative value when K is singular
    seed: int = SEED
    block_size: int = BLOCK_SIZE

    def validate(self) -> None:
        if self.k < 1:
            raise InvalidInputError(f"k must be at least 1, got {self.k}")
        if not self.tol > 0:
            raise InvalidInputError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1 or self.block_size < 1:
            raise InvalidInputError("max_iter and block_size must be positive")


@dataclass(frozen=True, eq=False)
class Spectrum:
    values: np.ndarray
    vectors: np.ndarray  # columns, M-orthonormal
    residuals: np.ndarray
    shift: float = 0.0
    method: str = "shift-invert"

    def __len__(self) -> int:
        return len(self.values)


# ---------------------------
# helpers
# ---------------------------

def _check_inputs(K, M, opts: EigOptions):
    opts.validate()
    if K.shape != M.shape or K.shape[0] != K.shape[1]:
        raise InvalidInputError(f"K and M must be square and of equal size, got {K.shape} and {M.shape}")
    n = K.shape[0]
    if opts.k > n:
        raise InvalidInputError(f"requested k={opts.k} eigenpairs from a problem of size {n}")
    for name, A in (("K", K), ("M", M)):
        asym = abs(A - A.T).max() if sp.issparse(A) else np.max(np.abs(A - A.T))
        scale = abs(A).max() if sp.issparse(A) else np.max(np.abs(A))
        if asym > SYMMETRY_TOL * max(scale, 1e-300):
            raise InvalidInputError(f"{name} is not symmetric (max asymmetry {asym:.3e})")


def residual_norms(K, M, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    KV = K @ vectors
    MV = M @ vectors
    return np.linalg.norm(KV - MV * values, axis=0) / np.linalg.norm(MV, axis=0)


def normalize_signs(vectors: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _rayleigh_ritz(K, M, basis: np.ndarray, k: int):
    KB = basis.T @ (K @ basis)
    MB = basis.T @ (M @ basis)
    KB = 0.5 * (KB + KB.T)
    MB = 0.5 * (MB + MB.T)
    values, coeffs = scipy.linalg.eigh(KB, MB)
    return values[:k], basis @ coeffs[:, :k]


def _dense(K, M, k: int):
    Kd = K.toarray() if sp.issparse(K) else np.asarray(K, dtype=float)
    Md = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)
    return scipy.linalg.eigh(Kd, Md, subset_by_index=[0, k - 1])


def _factorize(K, M, sigma: float):
    A = sp.csc_matrix(K - sigma * M)
    lu = splu(A)
    diag = np.abs(lu.U.diagonal())
    if not np.all(np.isfinite(diag)) or diag.min() <= 1e-13 * diag.max():
        raise RuntimeError("factor is numerically singular")
    return lu


# ---------------------------
# main entry
# ---------------------------

def smallest_eigs(K, M, opts: EigOptions) -> Spectrum:
    _check_inputs(K, M, opts)
    n = K.shape[0]
    k = opts.k
    want = min(n, k + opts.block_size)

    if n <= DENSE_LIMIT or want >= n - 1:
        values, vectors = _dense(K, M, want)
        values, vectors = values[:k], vectors[:, :k]
        vectors = normalize_signs(vectors)
        res = residual_norms(K, M, values, vectors)
        if not np.all(res <= opts.tol):
            raise NonConvergenceError(
                f"dense residual {res.max():.3e} above tolerance {opts.tol:.1e}", 1, float(res.max())
            )
        logger.debug(f"dense eigh n={n}, k={k}, max residual {res.max():.2e}")
        return Spectrum(values, vectors, res, 0.0, "dense")

    K = sp.csr_matrix(K)
    M = sp.csr_matrix(M)
    sigma = 0.0 if opts.shift is None else float(opts.shift)
    lu = None
    for attempt in range(MAX_SHIFT_RETRIES + 1):
        try:
            lu = _factorize(K, M, sigma)
            break
        except RuntimeError as e:
            if attempt == MAX_SHIFT_RETRIES:
                raise FactorizationError(f"could not factor K − σM after {attempt + 1} shifts (last σ={sigma}): {e}")
            new_sigma = AUTO_SHIFT if (opts.shift is None and attempt == 0) else sigma + AUTO_SHIFT * (attempt + 1)
            logger.warning(f"⚠️ K − σM singular at σ={sigma}; retrying with σ={new_sigma}")
            sigma = new_sigma

    op_inv = LinearOperator(K.shape, matvec=lu.solve, dtype=float)
    v0 = np.random.default_rng(opts.seed).standard_normal(n)
    ncv = min(n, max(2 * want + 1, 20))
    try:
        values, vectors = eigsh(
            K, want, M, sigma=sigma, OPinv=op_inv, which="LM",
            v0=v0, ncv=ncv, maxiter=opts.max_iter, tol=0.0,
        )
    except ArpackNoConvergence as e:
        best = float("inf")
        if len(e.eigenvalues):
            best = float(residual_norms(K, M, e.eigenvalues, e.eigenvectors).min())
        raise NonConvergenceError("shift-invert Lanczos did not converge", opts.max_iter, best) from e

    basis = vectors
    for step in range(MAX_POLISH + 1):
        values, vectors = _rayleigh_ritz(K, M, basis, want)
        res = residual_norms(K, M, values[:k], vectors[:, :k])
        if res.max() <= opts.tol:
            break
        if step == MAX_POLISH:
            raise NonConvergenceError(
                f"residual {res.max():.3e} above tolerance {opts.tol:.1e}", opts.max_iter, float(res.max())
            )
        # one inverse-iteration sweep enlarges the subspace
        extra = np.column_stack([lu.solve(M @ vectors[:, i]) for i in range(vectors.shape[1])])
        basis, _ = np.linalg.qr(np.column_stack([vectors, extra]))

    values, vectors = values[:k], normalize_signs(vectors[:, :k])
    res = residual_norms(K, M, values, vectors)
    logger.debug(f"eigsh n={n}, k={k}, σ={sigma}, max residual {res.max():.2e}")
    return Spectrum(values, vectors, res, sigma, "shift-invert")


def cluster_eigenvalues(values, rel_gap: float = 1e-6, abs_floor: float = 1e-8):
    """Group consecutive eigenvalues whose relative gap is below rel_gap.

    Returns lists of indices. Values below abs_floor in magnitude are compared absolutely.
    """
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        return []
    clusters = [[0]]
    for i in range(1, len(values)):
        prev = values[clusters[-1][-1]]
        scale = max(abs(prev), abs(values[i]))
        gap = abs(values[i] - prev)
        if gap <= max(rel_gap * scale, abs_floor):
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def cluster_summary(values, rel_gap: float = 1e-6) -> List[dict]:
    """Cluster dimensions for reports: mean eigenvalue, dimension and 1-based indices."""
    values = np.asarray(values, dtype=float)
    return [
        {"eigenvalue": float(values[c].mean()), "dimension": len(c), "indices": [i + 1 for i in c]}
        for c in cluster_eigenvalues(values, rel_gap)
    ]
