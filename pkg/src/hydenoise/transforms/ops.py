"""Small dense kernels: shrinkage, spectral differences, economy SVD."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import DataError, ParameterError, ShapeError

__all__ = [
    "soft_threshold",
    "spectral_diff_apply",
    "spectral_diff_matrix",
    "SvdResult",
    "svd_econ",
    "procrustes",
]


def soft_threshold(x, t):
    """Elementwise shrinkage ``sign(x) * max(|x| - t, 0)``.

    ``t`` may be a scalar or broadcast against ``x``; it must be non-negative.
    """
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0) or not np.all(np.isfinite(t_arr)):
        raise ParameterError(f"threshold must be finite and >= 0, got {t}")
    x = np.asarray(x)
    out = np.sign(x) * np.maximum(np.abs(x) - t_arr, 0.0)
    return out if out.ndim else float(out)


def spectral_diff_apply(m, transpose: bool = False) -> np.ndarray:
    """Apply the first-order band difference ``D`` (or ``D.T``) to the rows of ``m``.

    ``m`` is pixels x bands. ``D`` maps ``bands`` columns to ``bands - 1``
    with row ``j`` equal to ``e_{j+1} - e_j``; with ``transpose=True`` the
    input has ``bands - 1`` columns and the output ``bands``.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D pixels x bands array, got shape {m.shape}")
    if not transpose:
        if m.shape[1] < 2:
            raise ParameterError("spectral differences need at least 2 bands")
        return m[:, 1:] - m[:, :-1]
    if m.shape[1] < 1:
        raise ParameterError("spectral differences need at least 2 bands")
    out = np.zeros((m.shape[0], m.shape[1] + 1))
    out[:, 1:] += m
    out[:, :-1] -= m
    return out


def spectral_diff_matrix(bands: int) -> np.ndarray:
    """Dense ``(bands - 1) x bands`` first-difference matrix."""
    if bands < 2:
        raise ParameterError("spectral differences need at least 2 bands")
    return np.diff(np.eye(bands), axis=0)


class SvdResult(NamedTuple):
    u: np.ndarray  # m x k
    s: np.ndarray  # k, non-increasing
    v: np.ndarray  # n x k


def svd_econ(matrix) -> SvdResult:
    """Economy SVD in float64 with a deterministic sign convention.

    Each column of ``u`` is flipped (together with the matching column of
    ``v``) so that its largest-magnitude entry is positive.
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"svd_econ needs a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataError("svd_econ input contains non-finite values")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    pivot = u[np.argmax(np.abs(u), axis=0), np.arange(u.shape[1])]
    signs = np.where(pivot < 0, -1.0, 1.0)
    return SvdResult(u * signs, s, vt.T * signs)


def procrustes(target) -> np.ndarray:
    """Column-orthonormal ``V`` maximizing ``trace(V.T @ target)``.

    For ``target = A.T @ B`` this solves ``min ||A - B V.T||_F`` over
    ``V.T V = I``.
    """
    res = svd_econ(target)
    return res.u @ res.v.T
