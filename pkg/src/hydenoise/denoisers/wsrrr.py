"""Wavelet-based sparse reduced-rank regression (WSRRR)."""

from __future__ import annotations

import math
from typing import List, NamedTuple

import numpy as np

from ..cube import HsiCube
from ..errors import ParameterError
from ..transforms import array_to_coeffs, coeffs_to_array, dwt2, idwt2, procrustes, soft_threshold, svd_econ
from .subspace import estimate_noise, hysime

__all__ = ["wsrrr", "WsrrrResult", "wsrrr_objective"]


class WsrrrResult(NamedTuple):
    denoised: HsiCube
    components: List[np.ndarray]
    v: np.ndarray  # bands x rank, orthonormal columns
    objective: List[float]
    lam: float


def wsrrr_objective(w, c, v, lam) -> float:
    return float(np.sum((w - c @ v.T) ** 2) + lam * np.abs(c).sum())


def wsrrr(
    cube: HsiCube,
    rank: int = None,
    lam: float = None,
    max_iters: int = 20,
    tol: float = 1e-4,
    wavelet: str = "db8",
    levels: int = 2,
) -> WsrrrResult:
    """Sparse reduced-rank regression of the wavelet coefficients.

    With ``W`` the per-band wavelet coefficients (coefficients x bands),
    alternately minimizes ``||W - C V^T||_F^2 + lam ||C||_1`` subject to
    ``V^T V = I``:

    * C-step: ``C = soft_threshold(W V, lam / 2)``
    * V-step: orthogonal Procrustes, ``V = P Q^T`` from the SVD of ``W^T C``.

    Both steps are exact minimizers, so the objective never increases.
    ``rank`` defaults to the HySime estimate and ``lam`` to
    ``sigma * sqrt(2 ln n)`` with ``sigma`` the mean estimated noise level and
    ``n`` the number of pixels. The columns of ``C`` transformed back to
    images are returned as feature components.
    """
    b = cube.bands
    if rank is None:
        rank = hysime(cube).k
    if not 1 <= rank <= b:
        raise ParameterError(f"rank must be in [1, {b}], got {rank}")
    n = cube.rows * cube.cols
    if lam is None:
        _, cov = estimate_noise(cube)
        lam = math.sqrt(max(float(np.trace(cov)) / b, 0.0)) * math.sqrt(2.0 * math.log(n))
    if lam < 0:
        raise ParameterError(f"lambda must be >= 0, got {lam}")
    if max_iters < 1:
        raise ParameterError("max_iters must be >= 1")

    levels = min(levels, int(np.log2(min(cube.rows, cube.cols))))
    coeffs = dwt2(cube.data, levels, wavelet)
    w = coeffs_to_array(coeffs).T  # ncoef x bands
    v = svd_econ(w).v[:, :rank]
    c = soft_threshold(w @ v, lam / 2.0)
    history = [wsrrr_objective(w, c, v, lam)]
    for _ in range(max_iters):
        v = procrustes(w.T @ c)
        c = soft_threshold(w @ v, lam / 2.0)
        history.append(wsrrr_objective(w, c, v, lam))
        prev = history[-2]
        if prev > 0 and (prev - history[-1]) / prev < tol:
            break

    x = c @ v.T
    denoised = cube.with_data(idwt2(array_to_coeffs(x.T, coeffs)))
    feats = idwt2(array_to_coeffs(c.T, coeffs))
    return WsrrrResult(denoised, [f for f in feats], v, history, float(lam))
