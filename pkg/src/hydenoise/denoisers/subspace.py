"""Noise estimation by spectral regression and HySime subspace identification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..cube import CubeMatrix, HsiCube, unfold
from ..errors import ParameterError
from ..transforms import svd_econ

__all__ = ["SubspaceModel", "estimate_noise", "hysime", "whitening"]

RIDGE = 1e-6


def _as_matrix(cube) -> Tuple[np.ndarray, Tuple[int, int, int]]:
    if isinstance(cube, HsiCube):
        m = unfold(cube)
        return m.matrix.astype(np.float64), m.origin_dims
    if isinstance(cube, CubeMatrix):
        return np.asarray(cube.matrix, dtype=np.float64), cube.origin_dims
    y = np.asarray(cube, dtype=np.float64)
    return y, (y.shape[0], 1, y.shape[1])


def estimate_noise(cube) -> Tuple[CubeMatrix, np.ndarray]:
    """Estimate per-pixel noise by regressing each band on all the others.

    Parameters
    ----------
    cube : HsiCube, CubeMatrix or (pixels, bands) array

    Returns
    -------
    noise : CubeMatrix
        Regression residuals, pixels x bands.
    noise_cov : ndarray
        ``noise.T @ noise / pixels`` (bands x bands).

    Notes
    -----
    The normal equations are damped by ``1e-6`` times the mean of their
    diagonal, which keeps the solve well posed for (near) rank-deficient
    cubes without depending on the data scale.
    """
    y, dims = _as_matrix(cube)
    n, b = y.shape
    if b < 3:
        raise ParameterError(f"noise estimation needs at least 3 bands, got {b}")
    if n <= b:
        raise ParameterError(f"noise estimation needs more pixels ({n}) than bands ({b})")
    rr = y.T @ y
    damp = RIDGE * max(float(np.trace(rr)) / b, np.finfo(float).tiny)
    rri = np.linalg.inv(rr + damp * np.eye(b))
    # beta[:, i] regresses band i on the remaining bands
    a = rr - np.diag(np.diag(rr))
    p = rri @ a
    beta = p - rri * (np.diag(p) / np.diag(rri))[None, :]
    np.fill_diagonal(beta, 0.0)
    w = y - y @ beta
    cov = w.T @ w / n
    return CubeMatrix(w, dims), 0.5 * (cov + cov.T)


@dataclass(frozen=True)
class SubspaceModel:
    """HySime result.

    ``criterion_curve[j]`` is the selection criterion for a subspace of
    dimension ``j + 1``; ``k`` is its argmin plus one. ``basis`` holds the
    chosen eigenvectors as columns.
    """

    noise_cov: np.ndarray
    basis: np.ndarray
    k: int
    criterion_curve: np.ndarray
    eigenvectors: np.ndarray  # all eigenvectors of the signal correlation, ordered by criterion


def hysime(cube, noise: CubeMatrix = None, noise_cov: np.ndarray = None) -> SubspaceModel:
    """Signal-subspace identification by minimum error.

    The signal correlation matrix is estimated from the noise-removed data
    ``Y - W``. For each eigenvector ``e`` the mean-squared error contribution
    is ``-e.T Ry e + 2 e.T Rn e``; the subspace keeps the eigenvectors with
    the most negative contributions, and its dimension minimizes the
    cumulative sum.
    """
    y, _ = _as_matrix(cube)
    if noise is None or noise_cov is None:
        noise, noise_cov = estimate_noise(y)
    n, b = y.shape
    w = np.asarray(noise.matrix if isinstance(noise, CubeMatrix) else noise, dtype=np.float64)
    x = y - w
    ry = y.T @ y / n
    rx = x.T @ x / n
    e = svd_econ(0.5 * (rx + rx.T)).u
    rn = noise_cov + (np.trace(rx) / b / 1e10) * np.eye(b)
    py = np.einsum("ij,ik,kj->j", e, ry, e)
    pn = np.einsum("ij,ik,kj->j", e, rn, e)
    cost = -py + 2.0 * pn
    order = np.argsort(cost, kind="stable")
    curve = np.cumsum(cost[order])
    k = int(np.argmin(curve)) + 1
    ordered = e[:, order]
    return SubspaceModel(noise_cov, ordered[:, :k], k, curve, ordered)


def whitening(noise_cov: np.ndarray, floor: float = 1e-12) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(W, W_inv)`` with ``W = noise_cov^{-1/2}`` (symmetric).

    Eigenvalues below ``floor * max_eigenvalue`` are clipped so the whitening
    stays finite for (near) noise-free data.
    """
    vals, vecs = np.linalg.eigh(0.5 * (noise_cov + noise_cov.T))
    top = max(float(vals.max()), np.finfo(float).tiny)
    vals = np.maximum(vals, floor * top)
    root = np.sqrt(vals)
    return (vecs / root) @ vecs.T, (vecs * root) @ vecs.T
