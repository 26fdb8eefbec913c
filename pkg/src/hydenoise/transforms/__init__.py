"""Numerical kernels shared by the denoisers."""

from .ops import SvdResult, procrustes, soft_threshold, spectral_diff_apply, spectral_diff_matrix, svd_econ
from .tv import TvResult, split_bregman_tv, tv_norm, tv_objective
from .wavelets import (
    MODES,
    SUPPORTED_WAVELETS,
    WaveletCoeffs,
    array_to_coeffs,
    coeffs_to_array,
    dwt2,
    idwt2,
    wavelet_filters,
)
