"""Rank-revealing helpers with one global, scale-aware threshold.

A singular value counts as zero when it is below ``RANK_RTOL * max(sigma_max,
scale)``.  ``scale`` lets callers supply the natural size of the vectors
being compared, so that a lone vector of size 1e-14 is rank 0 rather than
rank 1 relative to itself.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import subspace_angles

RANK_RTOL = 1e-9


def _threshold(s: np.ndarray, rtol: float, scale: float | None) -> float:
    top = float(s[0]) if s.size else 0.0
    if scale is not None:
        top = max(top, float(scale))
    return rtol * top


def numerical_rank(a, rtol: float = RANK_RTOL, scale: float | None = None) -> int:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > _threshold(s, rtol, scale)))


def null_space(a, rtol: float = RANK_RTOL, scale: float | None = None,
               ncols: int | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of {v : a v = 0}."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    n = a.shape[1] if ncols is None else ncols
    if a.size == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    tol = _threshold(s, rtol, scale)
    rank = int(np.sum(s > tol)) if s.size and s[0] > 0 else 0
    return vt[rank:].T.copy()


def column_space(a, rtol: float = RANK_RTOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the span of the columns of ``a``."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], 0))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    tol = _threshold(s, rtol, scale)
    rank = int(np.sum(s > tol)) if s.size and s[0] > 0 else 0
    return u[:, :rank].copy()


def intersection(a: np.ndarray, b: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of span(a) ∩ span(b) for orthonormal column sets."""
    n = a.shape[0]
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.zeros((n, 0))
    coeffs = null_space(np.hstack([a, -b]), rtol=rtol)
    return column_space(a @ coeffs[: a.shape[1]], rtol=rtol)


def max_principal_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Largest principal angle between two subspaces; pi/2 when dimensions differ."""
    if a.shape[1] != b.shape[1]:
        return float(np.pi / 2)
    if a.shape[1] == 0:
        return 0.0
    return float(np.max(subspace_angles(a, b)))


def projection_residual(sub: np.ndarray, vectors: np.ndarray) -> float:
    """max_i |v_i - P v_i| for the orthogonal projector P onto span(sub)."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    if vectors.shape[1] == 0:
        return 0.0
    resid = vectors - sub @ (sub.T @ vectors)
    return float(np.max(np.linalg.norm(resid, axis=0)))
