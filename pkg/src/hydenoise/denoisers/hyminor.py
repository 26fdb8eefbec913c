"""Mixed Gaussian and sparse noise removal (HyMiNoR)."""

from __future__ import annotations

from typing import List, NamedTuple

import numpy as np
from scipy import linalg

from ..cube import HsiCube, unfold
from ..errors import ParameterError
from ..transforms import soft_threshold, spectral_diff_matrix
from .hyres import hyres

__all__ = ["hyminor", "HyminorResult", "l1_spectral_smooth"]


class HyminorResult(NamedTuple):
    denoised: HsiCube
    gaussian_stage: HsiCube
    residuals: List[float]
    iterations: int


def l1_spectral_smooth(m, lam=10.0, mu=5.0, max_iters=50, tol=1e-3):
    """Split Bregman solve of ``min_X ||X - M||_1 + lam ||X D^T||_1``.

    ``M`` is pixels x bands and ``D`` the first-order band difference. The
    auxiliaries are ``A = X - M`` and ``B = X D^T``.

    Returns
    -------
    x : ndarray
    residuals : list of float
        Bregman residual ``sqrt(||X - M - A||^2 + ||X D^T - B||^2)`` per
        outer iteration.
    """
    if not lam > 0 or not mu > 0:
        raise ParameterError(f"lambda and mu must be > 0, got {lam}, {mu}")
    if max_iters < 1:
        raise ParameterError("max_iters must be >= 1")
    m = np.asarray(m, dtype=np.float64)
    d = spectral_diff_matrix(m.shape[1])
    factor = linalg.cho_factor(np.eye(m.shape[1]) + d.T @ d)
    x = m.copy()
    a = np.zeros_like(m)
    b = np.zeros((m.shape[0], m.shape[1] - 1))
    ba = np.zeros_like(a)
    bb = np.zeros_like(b)
    residuals = []
    scale = max(float(np.linalg.norm(m)), np.finfo(float).tiny)
    for _ in range(max_iters):
        rhs = (m + a - ba) + (b - bb) @ d
        x_new = linalg.cho_solve(factor, rhs.T).T
        xd = x_new @ d.T
        a = soft_threshold(x_new - m + ba, 1.0 / mu)
        b = soft_threshold(xd + bb, lam / mu)
        ra = x_new - m - a
        rb = xd - b
        ba += ra
        bb += rb
        residuals.append(float(np.sqrt(np.sum(ra**2) + np.sum(rb**2))))
        change = float(np.linalg.norm(x_new - x)) / scale
        x = x_new
        if change < tol:
            break
    return x, residuals


def hyminor(cube: HsiCube, lam: float = 10.0, mu: float = 5.0, max_iters: int = 50, tol: float = 1e-3,
            return_info: bool = False):
    """HyRes followed by l1-l1 spectral smoothing to remove sparse noise.

    The residual impulses left in the HyRes output ``M`` are removed by
    :func:`l1_spectral_smooth`; the l1 data term tolerates large isolated
    deviations that a quadratic fit would spread out.
    """
    if cube.bands < 3:
        raise ParameterError("HyMiNoR needs at least 3 bands")
    stage1 = hyres(cube)
    m = unfold(stage1).matrix.astype(np.float64)
    x, residuals = l1_spectral_smooth(m, lam, mu, max_iters, tol)
    out = cube.with_data(x.T.reshape(cube.data.shape))
    if return_info:
        return HyminorResult(out, stage1, residuals, len(residuals))
    return out
