"""Small dense SPD linear algebra.

Everything here works on matrices of at most a few dozen rows: Gram matrices
of ridge regressions and the metrics of confidence ellipsoids. The Cholesky
factor is recomputed after each update instead of being rank-1 downdated in
place; at these sizes the O(d^3) cost is negligible and the result is
numerically cleaner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

SYMMETRY_RTOL = 1e-12


class NotSymmetric(ValueError):
    pass


class NotPositiveDefinite(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def _as_vec(v, dim: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != dim:
        raise DimensionMismatch(f"expected vector of length {dim}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """Symmetric positive definite matrix together with its lower Cholesky factor."""

    entries: np.ndarray
    chol: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


def spd_from(matrix) -> SpdMatrix:
    """Validate, symmetrize and factor ``matrix``.

    Raises
    ------
    NotSymmetric
        If ``matrix`` is not square or is asymmetric beyond a relative 1e-12.
    NotPositiveDefinite
        If the factorization meets a nonpositive pivot.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    scale = max(np.max(np.abs(m)), np.finfo(float).tiny)
    if np.max(np.abs(m - m.T)) > SYMMETRY_RTOL * scale:
        raise NotSymmetric("matrix is not symmetric")
    m = 0.5 * (m + m.T)
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    if np.any(np.diag(chol) <= 0.0):
        raise NotPositiveDefinite("nonpositive pivot")
    return SpdMatrix(_frozen(m), _frozen(chol))


def scaled_identity(dim: int, scale: float = 1.0) -> SpdMatrix:
    return spd_from(scale * np.eye(dim))


def rank1_update(M: SpdMatrix, v) -> SpdMatrix:
    """Return ``M + v v^T`` with a freshly computed factor."""
    v = _as_vec(v, M.dim)
    return spd_from(M.entries + np.outer(v, v))


def solve(M: SpdMatrix, b) -> np.ndarray:
    """Solve ``M x = b`` with two triangular solves against the factor."""
    b = _as_vec(b, M.dim)
    y = solve_triangular(M.chol, b, lower=True)
    return solve_triangular(M.chol.T, y, lower=False)


def solve_many(M: SpdMatrix, B) -> np.ndarray:
    """Solve ``M X = B`` for a matrix right-hand side (columns are systems)."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != M.dim:
        raise DimensionMismatch(f"expected {M.dim} rows, got shape {B.shape}")
    y = solve_triangular(M.chol, B, lower=True)
    return solve_triangular(M.chol.T, y, lower=False)


def inv_root_apply(M: SpdMatrix, u) -> np.ndarray:
    """Map ``u`` to ``L^{-T} u`` where ``M = L L^T``.

    The image of the unit ball under this map is exactly the ellipsoid
    ``{x : x^T M x <= 1}``, so it serves as an inverse square root without
    ever forming one.
    """
    u = _as_vec(u, M.dim)
    return solve_triangular(M.chol.T, u, lower=False)


def maha_norm(M: SpdMatrix, v) -> float:
    """``sqrt(v^T M v)``."""
    v = _as_vec(v, M.dim)
    return float(np.linalg.norm(M.chol.T @ v))


def inv_maha_norm(M: SpdMatrix, v) -> float:
    """``sqrt(v^T M^{-1} v)`` via one triangular solve."""
    v = _as_vec(v, M.dim)
    return float(np.linalg.norm(solve_triangular(M.chol, v, lower=True)))
