"""Synthetic low-rank cubes with known ground truth.

A cube is a linear mixture ``abundances @ endmembers``: ``rank`` smooth,
positive endmember spectra and per-pixel abundance maps. Two spatial styles are available:

``"lowrank"``
    Smooth random fields (Gaussian-filtered white noise).
``"piecewise"``
    Piecewise-constant maps from a random Voronoi partition.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .cube import HsiCube
from .errors import ParameterError
from .noise import make_rng

__all__ = ["endmember_spectra", "abundance_maps", "synth_cube", "SYNTH_KINDS"]

SYNTH_KINDS = ("lowrank", "piecewise")


def endmember_spectra(bands: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """``(rank, bands)`` smooth positive spectra with peak value 1.

    Each spectrum is a random rotation of the lowest ``rank`` non-constant
    cosine modes over the band axis, shifted positive, so the set is smooth
    but well conditioned.
    """
    t = np.linspace(0.0, 1.0, bands)
    modes = np.cos(np.pi * np.arange(1, rank + 1)[:, None] * t[None, :])
    q, _ = np.linalg.qr(rng.standard_normal((rank, rank)))
    out = q @ modes
    out -= out.min(axis=1, keepdims=True) - 0.1
    return out / out.max(axis=1, keepdims=True)


def abundance_maps(rows: int, cols: int, rank: int, kind: str, rng: np.random.Generator) -> np.ndarray:
    """``(rank, rows, cols)`` non-negative abundances summing to one per pixel."""
    if kind == "lowrank":
        sigma = max(rows, cols) / 10.0
        fields = np.stack([ndimage.gaussian_filter(rng.standard_normal((rows, cols)), sigma, mode="reflect")
                           for _ in range(rank)])
        fields /= fields.std(axis=(1, 2), keepdims=True) + 1e-12
        a = np.exp(1.5 * fields)
    elif kind == "piecewise":
        n_regions = max(2 * rank, 6)
        seeds = np.column_stack([rng.uniform(0, rows, n_regions), rng.uniform(0, cols, n_regions)])
        rr, cc = np.mgrid[0:rows, 0:cols]
        d2 = (rr[..., None] - seeds[:, 0]) ** 2 + (cc[..., None] - seeds[:, 1]) ** 2
        label = np.argmin(d2, axis=-1)
        weights = rng.dirichlet(np.full(rank, 0.5), size=n_regions)
        # every endmember dominates at least one region
        weights[:rank] = 0.8 * np.eye(rank) + 0.2 * weights[:rank]
        a = np.moveaxis(weights[label], -1, 0)
    else:
        raise ParameterError(f"unknown synth kind {kind!r}; expected one of {SYNTH_KINDS}")
    return a / a.sum(axis=0, keepdims=True)


def synth_cube(rows: int, cols: int, bands: int, rank: int, seed: int = 0, kind: str = "lowrank") -> HsiCube:
    """Noise-free cube of exact spectral rank ``rank``."""
    if min(rows, cols, bands, rank) < 1:
        raise ParameterError("rows, cols, bands and rank must be positive")
    if rank > min(bands, rows * cols):
        raise ParameterError(f"rank {rank} exceeds min(bands, pixels)")
    rng = make_rng(seed, "synth")
    spectra = endmember_spectra(bands, rank, rng)
    abund = abundance_maps(rows, cols, rank, kind, rng)
    data = np.tensordot(spectra.T, abund, axes=(1, 0))
    return HsiCube(data, tuple(np.linspace(400.0, 1000.0, bands)) if bands > 1 else None)
