"""Parameter-free low-rank wavelet restoration (HyRes)."""

from __future__ import annotations

import math

import numpy as np

from ..cube import HsiCube, unfold
from ..transforms import array_to_coeffs, coeffs_to_array, dwt2, idwt2, soft_threshold, svd_econ
from .subspace import estimate_noise, whitening

__all__ = ["hyres", "HYRES_WAVELET", "HYRES_LEVELS"]

HYRES_WAVELET = "db8"
HYRES_LEVELS = 2


def hyres(cube: HsiCube, wavelet: str = HYRES_WAVELET, levels: int = HYRES_LEVELS, return_rank: bool = False):
    """Denoise ``cube`` without user-set parameters.

    1. Estimate the noise covariance and whiten the spectra.
    2. Rotate onto the singular vectors of the whitened pixels x bands matrix.
    3. Wavelet-transform every eigen-image and soft-threshold its detail
       coefficients at ``sigma_c * sqrt(2 ln n)`` (``n`` = pixel count,
       ``sigma_c`` = the component's whitened noise level).
    4. Keep a component only if its post-threshold energy is above twice the
       energy pure noise would leave in the untouched approximation band;
       this fixes the rank.
    5. Invert the wavelet transform, the rotation and the whitening.

    With ``return_rank=True`` the number of kept components is returned too.
    """
    y = unfold(cube).matrix.astype(np.float64)
    n, b = y.shape
    _, cov = estimate_noise(y)
    wh, wh_inv = whitening(cov)
    yw = y @ wh
    v = svd_econ(yw).v
    eig = yw @ v
    sigma_c = np.sqrt(np.maximum(np.einsum("ij,ik,kj->j", v, wh @ cov @ wh, v), 0.0))

    coeffs = dwt2(eig.T.reshape(-1, cube.rows, cube.cols), levels, wavelet)
    thr = sigma_c[:, None, None] * math.sqrt(2.0 * math.log(n))
    details = [tuple(soft_threshold(d, thr) for d in band) for band in coeffs.details]
    shrunk = array_to_coeffs(coeffs_to_array(coeffs), coeffs)
    shrunk.details = details
    energy = np.sum(coeffs_to_array(shrunk) ** 2, axis=1)
    n_approx = coeffs.approx.shape[-2] * coeffs.approx.shape[-1]
    keep = energy > 2.0 * n_approx * sigma_c**2

    den = idwt2(shrunk)
    den[~keep] = 0.0
    xw = den.reshape(den.shape[0], -1).T @ v.T
    x = xw @ wh_inv
    out = cube.with_data(x.T.reshape(cube.data.shape))
    if return_rank:
        return out, int(keep.sum())
    return out
