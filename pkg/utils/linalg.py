"""Design-matrix storage and the few linear-algebra kernels screening needs."""
from typing import Union

import numpy as np
import scipy.sparse as sp

DesignMatrix = Union[np.ndarray, sp.csc_matrix]

# Below this fraction of nonzeros a matrix is stored as CSC
SPARSE_DENSITY_THRESHOLD = 0.25

POWER_ITERATIONS = 50


def as_design_matrix(A, density_threshold: float = SPARSE_DENSITY_THRESHOLD) -> DesignMatrix:
    """Store A column-major: Fortran-ordered dense, or CSC when sparse enough.

    Screening tests compute a_j^T c for every column, so both layouts keep
    columns contiguous.
    """
    if sp.issparse(A):
        rows, cols = A.shape
        nnz = A.nnz
    else:
        A = np.asarray(A, dtype=float)
        if A.ndim != 2:
            raise ValueError(f"design matrix must be 2-D, got shape {A.shape}")
        rows, cols = A.shape
        nnz = int(np.count_nonzero(A))

    size = rows * cols
    density = nnz / size if size else 1.0

    if density < density_threshold:
        return sp.csc_matrix(A, dtype=float)
    if sp.issparse(A):
        A = A.toarray()
    return np.asfortranarray(A, dtype=float)


def column_norms(A: DesignMatrix) -> np.ndarray:
    """Euclidean norm of every column."""
    if sp.issparse(A):
        return np.sqrt(np.asarray(A.multiply(A).sum(axis=0)).ravel())
    return np.linalg.norm(A, axis=0)


def drop_columns(A: DesignMatrix, keep: np.ndarray) -> DesignMatrix:
    """Return the sub-matrix of kept columns in the same storage layout."""
    keep = np.asarray(keep, dtype=int)
    if sp.issparse(A):
        return sp.csc_matrix(A[:, keep])
    return np.asfortranarray(A[:, keep])


def to_dense(A: DesignMatrix) -> np.ndarray:
    return A.toarray() if sp.issparse(A) else np.asarray(A)


def spectral_norm_sq(A: DesignMatrix, n_iter: int = POWER_ITERATIONS, seed: int = 0) -> float:
    """Estimate sigma_max(A)^2 by power iteration on A^T A.

    The estimate approaches from below; callers that need an upper bound
    must backtrack.
    """
    n = A.shape[1]
    if n == 0 or A.shape[0] == 0:
        return 0.0

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)

    estimate = 0.0
    for _ in range(n_iter):
        w = A.T @ (A @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        estimate = float(v @ w)
        v = w / norm_w
    # Rayleigh quotient at the final vector
    return max(estimate, float(v @ (A.T @ (A @ v))))
