"""Orthogonal total variation component analysis (OTVCA)."""

from __future__ import annotations

from typing import List, NamedTuple

import numpy as np

from ..cube import HsiCube, unfold
from ..errors import ParameterError
from ..transforms import procrustes, split_bregman_tv, svd_econ, tv_norm
from .subspace import hysime

__all__ = ["otvca", "OtvcaResult", "otvca_objective"]


class OtvcaResult(NamedTuple):
    denoised: HsiCube
    features: List[np.ndarray]
    v: np.ndarray
    objective: List[float]
    lam: np.ndarray  # per-component TV weight


def otvca_objective(y, f_imgs, v, lam) -> float:
    f = f_imgs.reshape(f_imgs.shape[0], -1).T
    fit = float(np.sum((y - f @ v.T) ** 2))
    return fit + float(sum(l * tv_norm(img) for l, img in zip(lam, f_imgs)))


def _tv_step(proj, old, lam, max_tv_iters, tol):
    """Per-component TV denoising; keeps the previous image when it scores better."""
    out = np.empty_like(proj)
    for i, (p, l) in enumerate(zip(proj, lam)):
        new = split_bregman_tv(p, l / 2.0, max_iters=max_tv_iters, tol=tol)
        if old is not None:
            score_new = np.sum((p - new) ** 2) + l * tv_norm(new)
            score_old = np.sum((p - old[i]) ** 2) + l * tv_norm(old[i])
            if score_old < score_new:
                new = old[i]
        out[i] = new
    return out


def otvca(
    cube: HsiCube,
    rank: int = None,
    lam=None,
    max_iters: int = 10,
    tol: float = 1e-4,
    tv_iters: int = 40,
) -> OtvcaResult:
    """Low-rank decomposition with TV-regularized feature images.

    Minimizes ``||Y - F V^T||_F^2 + sum_i lam_i TV(F_i)`` over
    column-orthonormal ``V`` (bands x rank) by cyclic descent. The V-step is
    an orthogonal Procrustes solve on ``Y^T F``; the F-step runs split
    Bregman TV on each column of ``Y V`` reshaped as an image.

    ``rank`` defaults to the HySime estimate. ``lam`` may be a scalar or a
    per-component sequence; by default each component gets 1% of the value
    range of its initial projection.
    """
    y = unfold(cube).matrix.astype(np.float64)
    b = cube.bands
    if rank is None:
        rank = hysime(cube).k
    if not 1 <= rank <= b:
        raise ParameterError(f"rank must be in [1, {b}], got {rank}")
    if max_iters < 1:
        raise ParameterError("max_iters must be >= 1")
    shape = (rank, cube.rows, cube.cols)

    v = svd_econ(y).v[:, :rank]
    proj = (y @ v).T.reshape(shape)
    if lam is None:
        spread = proj.reshape(rank, -1).max(axis=1) - proj.reshape(rank, -1).min(axis=1)
        lam = 0.01 * np.maximum(spread, np.finfo(float).tiny)
    lam = np.broadcast_to(np.asarray(lam, dtype=np.float64), (rank,)).copy()
    if np.any(lam <= 0):
        raise ParameterError("lambda must be > 0")

    f_imgs = _tv_step(proj, None, lam, tv_iters, tol)
    history = [otvca_objective(y, f_imgs, v, lam)]
    for _ in range(max_iters):
        v = procrustes(y.T @ f_imgs.reshape(rank, -1).T)
        proj = (y @ v).T.reshape(shape)
        f_imgs = _tv_step(proj, f_imgs, lam, tv_iters, tol)
        history.append(otvca_objective(y, f_imgs, v, lam))
        prev = history[-2]
        if prev > 0 and (prev - history[-1]) / prev < tol:
            break

    x = f_imgs.reshape(rank, -1).T @ v.T
    denoised = cube.with_data(x.T.reshape(cube.data.shape))
    return OtvcaResult(denoised, list(f_imgs), v, history, lam)
