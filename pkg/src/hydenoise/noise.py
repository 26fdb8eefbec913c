"""Noise simulators and the training-style augmentation transform.

Randomness comes from NumPy's Philox counter-based generator. Every call
seeds its own stream from ``SeedSequence([seed, op_id])``, so different
operations never share draws and results are reproducible per seed.
Gaussian variates use NumPy's ziggurat sampler (``Generator.standard_normal``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .cube import HsiCube, NormalizationRecord, apply_normalization, normalize_bands
from .errors import ParameterError

__all__ = [
    "make_rng",
    "add_gaussian_noise_snr",
    "add_noniid_gaussian",
    "add_salt_pepper",
    "add_deadline",
    "deadline_mask",
    "add_stripes",
    "stripe_offsets",
    "NoiseSpec",
    "AugmentConfig",
    "AugmentPlan",
    "augment_plan",
    "augment_sample",
    "GEOMETRIC_TRANSFORMS",
]

_OP_IDS = {
    "gaussian_snr": 1,
    "noniid_gaussian": 2,
    "salt_pepper": 3,
    "deadline": 4,
    "stripe": 5,
    "augment": 6,
    "synth": 7,
}

GEOMETRIC_TRANSFORMS = ("identity", "rot90", "rot180", "rot270", "flip_h", "flip_v")


def make_rng(seed: int, op: str) -> np.random.Generator:
    """Philox stream keyed by ``(seed mod 2**64, op)``."""
    ss = np.random.SeedSequence([int(seed) % (1 << 64), _OP_IDS[op]])
    return np.random.Generator(np.random.Philox(ss))


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _check_fraction(name, value):
    if not (0.0 <= value <= 1.0):
        raise ParameterError(f"{name} must lie in [0, 1], got {value}")


def add_gaussian_noise_snr(cube: HsiCube, target_snr_db: float, seed: int) -> HsiCube:
    """Add i.i.d. Gaussian noise so the expected SNR equals ``target_snr_db``.

    Signal power is the mean square over the whole cube; the noise variance
    is ``power / 10**(snr/10)``.
    """
    if not math.isfinite(target_snr_db):
        raise ParameterError(f"target SNR must be finite, got {target_snr_db}")
    x = cube.data.astype(np.float64)
    power = float(np.mean(x * x))
    if power == 0.0:
        raise ParameterError("cannot set an SNR on an all-zero cube")
    sigma = math.sqrt(power / 10.0 ** (target_snr_db / 10.0))
    noise = make_rng(seed, "gaussian_snr").standard_normal(x.shape)
    return cube.with_data(x + sigma * noise)


def add_noniid_gaussian(cube: HsiCube, sigma_low: float, sigma_high: float, seed: int) -> HsiCube:
    """Zero-mean Gaussian noise with a per-band sigma drawn from U[sigma_low, sigma_high]."""
    if sigma_low < 0 or sigma_high < 0:
        raise ParameterError("noise sigmas must be non-negative")
    if sigma_low > sigma_high:
        raise ParameterError(f"sigma_low ({sigma_low}) exceeds sigma_high ({sigma_high})")
    rng = make_rng(seed, "noniid_gaussian")
    sigmas = rng.uniform(sigma_low, sigma_high, size=cube.bands)
    x = cube.data.astype(np.float64)
    return cube.with_data(x + sigmas[:, None, None] * rng.standard_normal(x.shape))


def add_salt_pepper(cube: HsiCube, p: float, seed: int) -> HsiCube:
    """Replace entries with their band max ("salt") or band min ("pepper").

    Each entry is hit independently: salt with probability ``p/2`` and
    pepper with probability ``p/2``.
    """
    _check_fraction("p", p)
    x = cube.data.copy()
    u = make_rng(seed, "salt_pepper").random(x.shape)
    lo = x.min(axis=(1, 2), keepdims=True)
    hi = x.max(axis=(1, 2), keepdims=True)
    salt = u < p / 2
    pepper = (u >= p / 2) & (u < p)
    x = np.where(salt, hi, x)
    x = np.where(pepper, lo, x)
    return cube.with_data(x)


def deadline_mask(dims: Tuple[int, int, int], col_fraction: float, band_fraction: float, seed: int) -> np.ndarray:
    """Boolean ``(bands, cols)`` mask of dead columns for :func:`add_deadline`.

    ``round(band_fraction * bands)`` bands are affected; in each of them
    ``round(col_fraction * cols)`` distinct columns are dead.
    """
    _check_fraction("col_fraction", col_fraction)
    _check_fraction("band_fraction", band_fraction)
    _, cols, bands = dims
    rng = make_rng(seed, "deadline")
    mask = np.zeros((bands, cols), dtype=bool)
    n_cols = _round_half_up(col_fraction * cols)
    for b in np.sort(rng.choice(bands, _round_half_up(band_fraction * bands), replace=False)):
        mask[b, rng.choice(cols, n_cols, replace=False)] = True
    return mask


def add_deadline(cube: HsiCube, col_fraction: float, band_fraction: float, seed: int) -> HsiCube:
    """Zero out dead columns; the affected set is ``deadline_mask(cube.dims, ...)``."""
    mask = deadline_mask(cube.dims, col_fraction, band_fraction, seed)
    x = cube.data.copy()
    x[np.broadcast_to(mask[:, None, :], x.shape)] = 0.0
    return cube.with_data(x)


def stripe_offsets(
    dims: Tuple[int, int, int],
    stripe_fraction: float,
    amplitude: float,
    seed: int,
    band_fraction: float = 1.0,
) -> np.ndarray:
    """Per ``(band, column)`` additive offsets used by :func:`add_stripes`.

    Zero where a column is not striped; otherwise uniform in
    ``[-amplitude, amplitude]``.
    """
    _check_fraction("stripe_fraction", stripe_fraction)
    _check_fraction("band_fraction", band_fraction)
    if not (amplitude >= 0 and math.isfinite(amplitude)):
        raise ParameterError(f"amplitude must be finite and >= 0, got {amplitude}")
    _, cols, bands = dims
    rng = make_rng(seed, "stripe")
    offsets = np.zeros((bands, cols))
    n_cols = _round_half_up(stripe_fraction * cols)
    for b in np.sort(rng.choice(bands, _round_half_up(band_fraction * bands), replace=False)):
        sel = rng.choice(cols, n_cols, replace=False)
        offsets[b, sel] = rng.uniform(-amplitude, amplitude, size=n_cols)
    return offsets


def add_stripes(cube: HsiCube, stripe_fraction: float, amplitude: float, seed: int, band_fraction: float = 1.0) -> HsiCube:
    """Add a constant offset to selected columns of selected bands."""
    offsets = stripe_offsets(cube.dims, stripe_fraction, amplitude, seed, band_fraction)
    return cube.with_data(cube.data.astype(np.float64) + offsets[:, None, :])


# ---------------------------------------------------------------------------
# declarative noise descriptions

_SPEC_PARAMS = {
    "gaussian_snr": ("target_snr_db",),
    "noniid_gaussian": ("sigma_low", "sigma_high"),
    "salt_pepper": ("p",),
    "deadline": ("col_fraction", "band_fraction"),
    "stripe": ("stripe_fraction", "amplitude"),
}
_SPEC_OPTIONAL = {"stripe": {"band_fraction": 1.0}}


@dataclass(frozen=True)
class NoiseSpec:
    """One noise injection, serializable to flat JSON.

    >>> NoiseSpec.from_json('{"kind": "gaussian_snr", "target_snr_db": 20, "seed": 1234}').params
    {'target_snr_db': 20.0}
    """

    kind: str
    params: Dict[str, float] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _SPEC_PARAMS:
            raise ParameterError(f"unknown noise kind {self.kind!r}; expected one of {sorted(_SPEC_PARAMS)}")
        allowed = set(_SPEC_PARAMS[self.kind]) | set(_SPEC_OPTIONAL.get(self.kind, {}))
        missing = [k for k in _SPEC_PARAMS[self.kind] if k not in self.params]
        extra = [k for k in self.params if k not in allowed]
        if missing:
            raise ParameterError(f"noise kind {self.kind!r} requires {missing}")
        if extra:
            raise ParameterError(f"unexpected parameters for {self.kind!r}: {extra}")
        params = {}
        for k, v in self.params.items():
            try:
                params[k] = float(v)
            except (TypeError, ValueError):
                raise ParameterError(f"parameter {k!r} must be a number, got {v!r}") from None
            if not math.isfinite(params[k]):
                raise ParameterError(f"parameter {k!r} must be finite")
        for k in ("p", "col_fraction", "band_fraction", "stripe_fraction"):
            if k in params:
                _check_fraction(k, params[k])
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        d = dict(d)
        try:
            kind = d.pop("kind")
        except KeyError:
            raise ParameterError("noise spec needs a 'kind'") from None
        seed = d.pop("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ParameterError(f"seed must be an integer, got {seed!r}")
        return cls(kind, d, seed)

    @classmethod
    def from_json(cls, text: str) -> "NoiseSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"invalid noise spec JSON: {exc}") from None
        if not isinstance(d, dict):
            raise ParameterError("noise spec JSON must be an object")
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params, "seed": self.seed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def apply(self, cube: HsiCube) -> HsiCube:
        p = self.params
        if self.kind == "gaussian_snr":
            return add_gaussian_noise_snr(cube, p["target_snr_db"], self.seed)
        if self.kind == "noniid_gaussian":
            return add_noniid_gaussian(cube, p["sigma_low"], p["sigma_high"], self.seed)
        if self.kind == "salt_pepper":
            return add_salt_pepper(cube, p["p"], self.seed)
        if self.kind == "deadline":
            return add_deadline(cube, p["col_fraction"], p["band_fraction"], self.seed)
        return add_stripes(cube, p["stripe_fraction"], p["amplitude"], self.seed, p.get("band_fraction", 1.0))


# ---------------------------------------------------------------------------
# augmentation


@dataclass(frozen=True)
class AugmentConfig:
    """Settings for :func:`augment_sample`.

    The spatial scale factor is drawn from ``[scale_low, scale_high]``; the
    crop must fit the smallest possible scaled image.
    """

    crop_rows: int
    crop_cols: int
    band_count: int
    snr_low_db: float = 20.0
    snr_high_db: float = 30.0
    transforms: Tuple[str, ...] = GEOMETRIC_TRANSFORMS
    seed: int = 0
    scale_low: float = 0.5
    scale_high: float = 1.0

    def validate(self, dims: Tuple[int, int, int]) -> None:
        rows, cols, bands = dims
        if self.snr_low_db > self.snr_high_db:
            raise ParameterError("snr_low_db must not exceed snr_high_db")
        if not (math.isfinite(self.snr_low_db) and math.isfinite(self.snr_high_db)):
            raise ParameterError("SNR bounds must be finite")
        if not 1 <= self.band_count <= bands:
            raise ParameterError(f"band_count must be in [1, {bands}], got {self.band_count}")
        if not 0 < self.scale_low <= self.scale_high:
            raise ParameterError("need 0 < scale_low <= scale_high")
        if self.crop_rows < 1 or self.crop_cols < 1:
            raise ParameterError("crop size must be positive")
        min_r = max(1, _round_half_up(rows * self.scale_low))
        min_c = max(1, _round_half_up(cols * self.scale_low))
        if self.crop_rows > min_r or self.crop_cols > min_c:
            raise ParameterError(
                f"crop {self.crop_rows}x{self.crop_cols} larger than the smallest scaled image {min_r}x{min_c}"
            )
        if not self.transforms or any(t not in GEOMETRIC_TRANSFORMS for t in self.transforms):
            raise ParameterError(f"transforms must be a non-empty subset of {GEOMETRIC_TRANSFORMS}")


class AugmentPlan(NamedTuple):
    """Random choices made by :func:`augment_sample` for a given config."""

    scale: float
    scaled_shape: Tuple[int, int]
    crop_origin: Tuple[int, int]
    band_start: int
    transform: str
    snr_db: float
    noise_seed: int


def augment_plan(dims: Tuple[int, int, int], cfg: AugmentConfig) -> AugmentPlan:
    """Draw the augmentation choices for a cube of ``dims`` (rows, cols, bands)."""
    cfg.validate(dims)
    rows, cols, bands = dims
    rng = make_rng(cfg.seed, "augment")
    scale = float(rng.uniform(cfg.scale_low, cfg.scale_high))
    sr = max(1, _round_half_up(rows * scale))
    sc = max(1, _round_half_up(cols * scale))
    r0 = int(rng.integers(0, sr - cfg.crop_rows + 1))
    c0 = int(rng.integers(0, sc - cfg.crop_cols + 1))
    b0 = int(rng.integers(0, bands - cfg.band_count + 1))
    transform = cfg.transforms[int(rng.integers(0, len(cfg.transforms)))]
    snr = float(rng.uniform(cfg.snr_low_db, cfg.snr_high_db))
    noise_seed = int(rng.integers(0, 2**63 - 1))
    return AugmentPlan(scale, (sr, sc), (r0, c0), b0, transform, snr, noise_seed)


def _geometric(x: np.ndarray, name: str) -> np.ndarray:
    if name.startswith("rot"):
        return np.rot90(x, k=int(name[3:]) // 90, axes=(1, 2))
    if name == "flip_h":
        return x[:, :, ::-1]
    if name == "flip_v":
        return x[:, ::-1, :]
    return x


def augment_sample(cube: HsiCube, cfg: AugmentConfig) -> Tuple[HsiCube, HsiCube, NormalizationRecord]:
    """Produce a ``(noisy, clean, record)`` training pair.

    Steps, in order: random spatial rescale (bilinear) and crop, a random
    window of consecutive bands, a random geometric transform, Gaussian
    noise at a random SNR, then per-band normalization. The normalization
    constants come from the noisy cube and are applied to both outputs.
    Use :func:`augment_plan` to inspect the random choices.
    """
    plan = augment_plan(cube.dims, cfg)
    x = cube.data.astype(np.float64)
    sr, sc = plan.scaled_shape
    if (sr, sc) != (cube.rows, cube.cols):
        x = ndimage.zoom(x, (1.0, sr / cube.rows, sc / cube.cols), order=1, mode="nearest", grid_mode=False)
        x = x[:, :sr, :sc]
    r0, c0 = plan.crop_origin
    x = x[:, r0 : r0 + cfg.crop_rows, c0 : c0 + cfg.crop_cols]
    x = x[plan.band_start : plan.band_start + cfg.band_count]
    x = _geometric(x, plan.transform)
    wl = cube.wavelengths[plan.band_start : plan.band_start + cfg.band_count] if cube.wavelengths else None
    clean = HsiCube(x, wl)
    noisy = add_gaussian_noise_snr(clean, plan.snr_db, plan.noise_seed)
    noisy_n, record = normalize_bands(noisy)
    return noisy_n, apply_normalization(clean, record), record
