"""Quality metrics: SNR, PSNR, spectral angle (SAM) and MSE.

All metrics take a reference and an estimate with identical shapes, either
:class:`~hydenoise.cube.HsiCube` instances or ``(bands, rows, cols)``
arrays, and accumulate in float64. Exact equality yields ``inf`` dB.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .cube import HsiCube
from .errors import DataError, ParameterError, ShapeError

__all__ = ["MetricsReport", "snr_db", "psnr", "sam", "mse", "evaluate"]


def _pair(reference, estimate):
    r = reference.data if isinstance(reference, HsiCube) else np.asarray(reference)
    e = estimate.data if isinstance(estimate, HsiCube) else np.asarray(estimate)
    if r.shape != e.shape:
        raise ShapeError(f"reference shape {r.shape} != estimate shape {e.shape}")
    return r.astype(np.float64, copy=False), e.astype(np.float64, copy=False)


def mse(reference, estimate) -> float:
    """Mean squared difference over all entries."""
    r, e = _pair(reference, estimate)
    return float(np.mean((r - e) ** 2))


def snr_db(reference, estimate) -> float:
    """``10 log10(sum(ref^2) / sum((ref - est)^2))``."""
    r, e = _pair(reference, estimate)
    signal = float(np.sum(r * r))
    if signal == 0.0:
        raise ParameterError("SNR is undefined for an all-zero reference")
    err = float(np.sum((r - e) ** 2))
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(signal / err)


def psnr(reference, estimate, peak: float = None) -> float:
    """Peak SNR in dB; ``peak`` defaults to the global maximum of ``reference``."""
    r, e = _pair(reference, estimate)
    err = float(np.mean((r - e) ** 2))
    if err == 0.0:
        return math.inf
    peak = float(r.max()) if peak is None else float(peak)
    if peak == 0.0:
        raise ParameterError("PSNR peak is zero")
    return 10.0 * math.log10(peak * peak / err)


def sam(reference, estimate) -> float:
    """Mean spectral angle in radians.

    The spectrum of a pixel runs along the band axis (axis 0). Pixels where
    either spectrum has zero norm are left out of the mean.
    """
    r, e = _pair(reference, estimate)
    r = r.reshape(r.shape[0], -1)
    e = e.reshape(e.shape[0], -1)
    nr = np.sqrt(np.sum(r * r, axis=0))
    ne = np.sqrt(np.sum(e * e, axis=0))
    ok = (nr > 0) & (ne > 0)
    if not ok.any():
        raise DataError("every pixel has a zero-norm spectrum; SAM undefined")
    cos = np.sum(r[:, ok] * e[:, ok], axis=0) / (nr[ok] * ne[ok])
    return float(np.mean(np.arccos(np.clip(cos, -1.0, 1.0))))


@dataclass(frozen=True)
class MetricsReport:
    snr_db: float
    psnr_db: float
    sam_rad: float
    mse: float

    def to_json_dict(self) -> dict:
        """Plain dict with infinities encoded as the string ``"inf"``."""
        return {k: ("inf" if isinstance(v, float) and math.isinf(v) else v) for k, v in asdict(self).items()}


def evaluate(reference, estimate) -> MetricsReport:
    return MetricsReport(
        snr_db=snr_db(reference, estimate),
        psnr_db=psnr(reference, estimate),
        sam_rad=sam(reference, estimate),
        mse=mse(reference, estimate),
    )
