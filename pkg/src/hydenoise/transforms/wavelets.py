"""Separable 2-D orthonormal discrete wavelet transform.

Two boundary modes are provided:

``"symmetric"``
    Half-sample symmetric extension. Each level keeps ``n/2 + L/2``
    coefficients per axis (``L`` = filter length), which is what perfect
    reconstruction at the borders needs.
``"periodization"``
    Circular extension, ``n/2`` coefficients per axis. The transform is then
    an orthogonal matrix and preserves energy exactly.

Odd axis lengths are symmetric-padded by one sample before each level and
cropped again on reconstruction. All arithmetic is float64.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import List, Tuple

import numpy as np

from ..errors import ParameterError, ShapeError

__all__ = [
    "WaveletCoeffs",
    "wavelet_filters",
    "dwt2",
    "idwt2",
    "coeffs_to_array",
    "array_to_coeffs",
    "SUPPORTED_WAVELETS",
    "MODES",
]

SUPPORTED_WAVELETS = ("haar",) + tuple(f"db{n}" for n in range(1, 11))
MODES = ("symmetric", "periodization")


@lru_cache(maxsize=None)
def _daubechies(n_moments: int) -> np.ndarray:
    """Extremal-phase Daubechies scaling filter with ``n_moments`` vanishing moments.

    Spectral factorization of the Daubechies polynomial
    ``P(y) = sum_k C(N-1+k, k) y^k`` with ``y = (2 - z - 1/z) / 4``,
    keeping the roots inside the unit circle.
    """
    h = np.array([1.0])
    for _ in range(n_moments):
        h = np.convolve(h, [1.0, 1.0])
    if n_moments > 1:
        poly = [comb(n_moments - 1 + k, k) for k in range(n_moments)]
        for y in np.roots(poly[::-1]):
            zr = np.roots([1.0, -(2.0 - 4.0 * y), 1.0])
            h = np.convolve(h, [1.0, -zr[np.argmin(np.abs(zr))]])
    h = np.real(h)
    h = h * (np.sqrt(2.0) / h.sum())
    h.setflags(write=False)
    return h


def wavelet_filters(wavelet_id: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(dec_lo, dec_hi, rec_lo, rec_hi)`` for ``wavelet_id``.

    ``"haar"`` is an alias of ``"db1"``; ``"dbN"`` has ``N`` vanishing moments
    and ``2N`` taps.
    """
    name = str(wavelet_id).lower()
    if name == "haar":
        n = 1
    elif name.startswith("db") and name[2:].isdigit() and 1 <= int(name[2:]) <= 10:
        n = int(name[2:])
    else:
        raise ParameterError(f"unknown wavelet {wavelet_id!r}; supported: {', '.join(SUPPORTED_WAVELETS)}")
    rec_lo = _daubechies(n)
    L = rec_lo.size
    rec_hi = np.array([(-1) ** k * rec_lo[L - 1 - k] for k in range(L)])
    return rec_lo[::-1].copy(), rec_hi[::-1].copy(), rec_lo.copy(), rec_hi


@dataclass
class WaveletCoeffs:
    """Multi-level 2-D wavelet decomposition.

    ``details`` is ordered coarsest level first; each entry holds the
    ``(horizontal, vertical, diagonal)`` sub-bands. Horizontal is high-pass
    along rows (axis -2), vertical is high-pass along columns (axis -1).
    Arrays may carry leading batch axes (e.g. one image per band).
    """

    levels: int
    approx: np.ndarray
    details: List[Tuple[np.ndarray, np.ndarray, np.ndarray]]
    wavelet_id: str
    original_shape: Tuple[int, int]
    mode: str = "symmetric"

    @property
    def total_size(self) -> int:
        """Coefficient count per image (batch axes excluded)."""
        n = int(np.prod(self.approx.shape[-2:]))
        for band in self.details:
            n += sum(int(np.prod(b.shape[-2:])) for b in band)
        return n


def _level_lengths(n: int, levels: int, L: int, mode: str) -> List[int]:
    """Input length at each level (finest first), plus the final approx length."""
    out = [n]
    for _ in range(levels):
        even = n + (n % 2)
        n = even // 2 + (L // 2 if mode == "symmetric" else 0)
        out.append(n)
    return out


def _pad_even(x: np.ndarray, axis: int) -> np.ndarray:
    if x.shape[axis] % 2 == 0:
        return x
    widths = [(0, 0)] * x.ndim
    widths[axis] = (0, 1)
    return np.pad(x, widths, mode="symmetric")


def _slice_axis(x: np.ndarray, axis: int, sl: slice) -> np.ndarray:
    return x[(slice(None),) * (axis % x.ndim) + (sl,)]


def _analysis_1d(x: np.ndarray, lo: np.ndarray, hi: np.ndarray, axis: int, mode: str):
    x = _pad_even(x, axis)
    n = x.shape[axis]
    L = lo.size
    if mode == "symmetric":
        widths = [(0, 0)] * x.ndim
        widths[axis] = (L - 1, L - 1)
        xe = np.pad(x, widths, mode="symmetric")
        K = n // 2 + L // 2
        a = 0.0
        d = 0.0
        for j in range(L):
            s = L - 1 - j
            seg = _slice_axis(xe, axis, slice(s, s + 2 * K, 2))
            a = a + lo[j] * seg
            d = d + hi[j] * seg
        return a, d
    K = n // 2
    a = 0.0
    d = 0.0
    base = np.arange(K) * 2
    for j in range(L):
        seg = np.take(x, (base - j) % n, axis=axis)
        a = a + lo[j] * seg
        d = d + hi[j] * seg
    return a, d


def _synthesis_1d(a: np.ndarray, d: np.ndarray, lo: np.ndarray, hi: np.ndarray, axis: int, n_out: int, mode: str):
    axis = axis % a.ndim
    L = lo.size
    K = a.shape[axis]
    shape = list(a.shape)
    shape[axis] = 2 * K
    za = np.zeros(shape)
    zd = np.zeros(shape)
    even = (slice(None),) * axis + (slice(0, None, 2),)
    za[even] = a
    zd[even] = d
    n_even = n_out + (n_out % 2)
    out = 0.0
    if mode == "symmetric":
        for j in range(L):
            s = L - 1 - j
            sl = (slice(None),) * axis + (slice(s, s + n_even),)
            out = out + lo[j] * za[sl] + hi[j] * zd[sl]
    else:
        base = np.arange(n_even) + (L - 1)
        for j in range(L):
            idx = (base - j) % (2 * K)
            out = out + lo[j] * np.take(za, idx, axis=axis) + hi[j] * np.take(zd, idx, axis=axis)
    crop = (slice(None),) * axis + (slice(0, n_out),)
    return out[crop]


def dwt2(image, levels: int = 2, wavelet_id: str = "db8", mode: str = "symmetric") -> WaveletCoeffs:
    """Multi-level 2-D DWT over the last two axes of ``image``.

    Parameters
    ----------
    image : array_like
        2-D image, or a stack ``(..., rows, cols)`` transformed image-wise.
    levels : int
        Decomposition depth; requires ``min(rows, cols) >= 2**levels``.
    wavelet_id : str
        ``"haar"`` or ``"dbN"``.
    mode : {"symmetric", "periodization"}
    """
    x = np.asarray(image, dtype=np.float64)
    if x.ndim < 2:
        raise ShapeError("dwt2 needs at least a 2-D array")
    if mode not in MODES:
        raise ParameterError(f"unknown mode {mode!r}")
    if int(levels) != levels or levels < 1:
        raise ParameterError(f"levels must be a positive integer, got {levels}")
    rows, cols = x.shape[-2:]
    if min(rows, cols) < 2**levels:
        raise ParameterError(f"{levels} levels need min(rows, cols) >= {2 ** levels}, image is {rows}x{cols}")
    dec_lo, dec_hi, _, _ = wavelet_filters(wavelet_id)
    details = []
    a = x
    for _ in range(levels):
        lo_r, hi_r = _analysis_1d(a, dec_lo, dec_hi, axis=-2, mode=mode)
        aa, av = _analysis_1d(lo_r, dec_lo, dec_hi, axis=-1, mode=mode)
        ah, dd = _analysis_1d(hi_r, dec_lo, dec_hi, axis=-1, mode=mode)
        details.append((ah, av, dd))
        a = aa
    details.reverse()
    return WaveletCoeffs(int(levels), a, details, str(wavelet_id).lower(), (rows, cols), mode)


def idwt2(coeffs: WaveletCoeffs) -> np.ndarray:
    """Inverse of :func:`dwt2`; returns an array of ``original_shape`` (plus batch axes)."""
    _, _, rec_lo, rec_hi = wavelet_filters(coeffs.wavelet_id)
    L = rec_lo.size
    if len(coeffs.details) != coeffs.levels:
        raise ShapeError(f"{len(coeffs.details)} detail levels for levels={coeffs.levels}")
    r_len = _level_lengths(coeffs.original_shape[0], coeffs.levels, L, coeffs.mode)
    c_len = _level_lengths(coeffs.original_shape[1], coeffs.levels, L, coeffs.mode)
    a = np.asarray(coeffs.approx, dtype=np.float64)
    batch = a.shape[:-2]
    if a.shape[-2:] != (r_len[-1], c_len[-1]):
        raise ShapeError(f"approximation shape {a.shape[-2:]} != expected {(r_len[-1], c_len[-1])}")
    for i, (h, v, d) in enumerate(coeffs.details):
        lev = coeffs.levels - i  # 1-based level, coarsest first
        want = batch + (r_len[lev], c_len[lev])
        for band in (h, v, d):
            if np.shape(band) != want:
                raise ShapeError(f"level {lev} detail shape {np.shape(band)} != expected {want}")
        n_r, n_c = r_len[lev - 1], c_len[lev - 1]
        lo_r = _synthesis_1d(a, np.asarray(v, dtype=np.float64), rec_lo, rec_hi, -1, n_c, coeffs.mode)
        hi_r = _synthesis_1d(
            np.asarray(h, dtype=np.float64), np.asarray(d, dtype=np.float64), rec_lo, rec_hi, -1, n_c, coeffs.mode
        )
        a = _synthesis_1d(lo_r, hi_r, rec_lo, rec_hi, -2, n_r, coeffs.mode)
    return a


def coeffs_to_array(coeffs: WaveletCoeffs) -> np.ndarray:
    """Flatten every sub-band into one vector per image: shape ``(..., total_size)``.

    Order is approximation first, then details coarsest to finest (H, V, D).
    """
    parts = [coeffs.approx]
    for band in coeffs.details:
        parts.extend(band)
    batch = coeffs.approx.shape[:-2]
    return np.concatenate([np.reshape(p, batch + (-1,)) for p in parts], axis=-1)


def array_to_coeffs(arr, template: WaveletCoeffs) -> WaveletCoeffs:
    """Inverse of :func:`coeffs_to_array`, using ``template`` for sub-band shapes."""
    arr = np.asarray(arr, dtype=np.float64)
    batch = arr.shape[:-1]
    pos = 0

    def grab(shape2d):
        nonlocal pos
        n = shape2d[0] * shape2d[1]
        if pos + n > arr.shape[-1]:
            raise ShapeError("coefficient vector too short for template")
        out = arr[..., pos : pos + n].reshape(batch + tuple(shape2d))
        pos += n
        return out

    approx = grab(template.approx.shape[-2:])
    details = [tuple(grab(b.shape[-2:]) for b in band) for band in template.details]
    if pos != arr.shape[-1]:
        raise ShapeError(f"coefficient vector has {arr.shape[-1]} entries, template needs {pos}")
    return WaveletCoeffs(template.levels, approx, details, template.wavelet_id, template.original_shape, template.mode)
