"""Hyperspectral cube container, band normalization, unfolding and file I/O.

Cubes are stored band-sequential: ``data`` has shape ``(bands, rows, cols)``
and is C-contiguous, so band ``i`` is the contiguous block ``data[i]``.
Storage is float32; computations elsewhere accumulate in float64.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DataError, FormatError, IntegrityError, ParameterError, ShapeError

__all__ = [
    "HsiCube",
    "NormalizationRecord",
    "CubeMatrix",
    "load_cube",
    "save_cube",
    "normalize_bands",
    "denormalize_bands",
    "apply_normalization",
    "unfold",
    "fold",
]

MAGIC = "HYDE1"
_MAX_HEADER_BYTES = 1 << 20

PathLike = Union[str, os.PathLike]


def _first_nonfinite(arr: np.ndarray) -> Optional[Tuple[int, ...]]:
    # checked one leading slice at a time to avoid a full-size mask
    flat = arr.reshape(arr.shape[0], -1) if arr.ndim > 1 else arr.reshape(1, -1)
    for i, part in enumerate(flat):
        bad = ~np.isfinite(part)
        if bad.any():
            return tuple(int(j) for j in np.unravel_index(i * flat.shape[1] + int(np.argmax(bad)), arr.shape))
    return None


class _Owned(np.ndarray):
    """Marker subclass: the array may be adopted by :class:`HsiCube` without a copy."""


@dataclass(frozen=True, eq=False)
class HsiCube:
    """A hyperspectral image.

    Parameters
    ----------
    data : array_like
        Cube values with shape ``(bands, rows, cols)``. Converted to a
        read-only, C-contiguous float32 array.
    wavelengths : sequence of float, optional
        Per-band centre wavelengths in nanometres, strictly increasing.
    """

    data: np.ndarray
    wavelengths: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        arr = self.data
        if not (isinstance(arr, _Owned) and arr.dtype == np.float32 and arr.flags.c_contiguous):
            arr = np.array(arr, dtype=np.float32, order="C", copy=True)
        else:
            arr = arr.view(np.ndarray)
        if arr.ndim != 3:
            raise ShapeError(f"cube data must be 3-D (bands, rows, cols), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ShapeError(f"cube dimensions must be positive, got {arr.shape}")
        idx = _first_nonfinite(arr)
        if idx is not None:
            raise DataError(f"non-finite value at (band, row, col) = {idx}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        if self.wavelengths is not None:
            wl = tuple(float(w) for w in self.wavelengths)
            if len(wl) != arr.shape[0]:
                raise ShapeError(f"{len(wl)} wavelengths given for {arr.shape[0]} bands")
            if any(b <= a for a, b in zip(wl, wl[1:])):
                raise ParameterError("wavelengths must be strictly increasing")
            object.__setattr__(self, "wavelengths", wl)

    @classmethod
    def _adopt(cls, arr: np.ndarray, wavelengths=None) -> "HsiCube":
        """Wrap a freshly built float32 C-contiguous array without copying it.

        The caller hands over ownership; the array is made read-only.
        """
        return cls(arr.view(_Owned), wavelengths)

    @classmethod
    def from_rcb(cls, array, wavelengths=None) -> "HsiCube":
        """Build a cube from a ``(rows, cols, bands)`` array."""
        return cls(np.moveaxis(np.asarray(array), -1, 0), wavelengths)

    @property
    def bands(self) -> int:
        return self.data.shape[0]

    @property
    def rows(self) -> int:
        return self.data.shape[1]

    @property
    def cols(self) -> int:
        return self.data.shape[2]

    @property
    def dims(self) -> Tuple[int, int, int]:
        """``(rows, cols, bands)``."""
        return (self.rows, self.cols, self.bands)

    @property
    def size(self) -> int:
        return self.data.size

    def rcb(self) -> np.ndarray:
        """Read-only ``(rows, cols, bands)`` view of the data."""
        return np.moveaxis(self.data, 0, -1)

    def with_data(self, data) -> "HsiCube":
        """New cube with the same metadata and replacement ``(bands, rows, cols)`` data."""
        data = np.asarray(data)
        if data.shape != self.data.shape:
            raise ShapeError(f"replacement data has shape {data.shape}, expected {self.data.shape}")
        return HsiCube(data, self.wavelengths)

    def __repr__(self):
        return f"HsiCube(rows={self.rows}, cols={self.cols}, bands={self.bands})"


@dataclass(frozen=True)
class NormalizationRecord:
    """Per-band minimum and maximum used by :func:`normalize_bands`."""

    per_band_min: np.ndarray
    per_band_max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.per_band_min, dtype=np.float64).ravel()
        hi = np.asarray(self.per_band_max, dtype=np.float64).ravel()
        if lo.shape != hi.shape:
            raise ShapeError("per_band_min and per_band_max differ in length")
        if np.any(hi < lo):
            raise ParameterError("per_band_max must be >= per_band_min")
        object.__setattr__(self, "per_band_min", lo)
        object.__setattr__(self, "per_band_max", hi)

    @property
    def bands(self) -> int:
        return self.per_band_min.size

    def to_dict(self) -> dict:
        return {"per_band_min": self.per_band_min.tolist(), "per_band_max": self.per_band_max.tolist()}


@dataclass(frozen=True)
class CubeMatrix:
    """Pixels-by-bands unfolding of a cube.

    ``matrix[:, j]`` is band ``j`` flattened in row-major pixel order.
    """

    matrix: np.ndarray
    origin_dims: Tuple[int, int, int]  # (rows, cols, bands)

    @property
    def pixels(self) -> int:
        return self.matrix.shape[0]


def unfold(cube: HsiCube) -> CubeMatrix:
    """Unfold a cube into a ``(rows*cols, bands)`` matrix."""
    m = cube.data.reshape(cube.bands, -1).T
    return CubeMatrix(m, cube.dims)


def fold(m: CubeMatrix, wavelengths: Optional[Sequence[float]] = None) -> HsiCube:
    """Inverse of :func:`unfold`."""
    rows, cols, bands = m.origin_dims
    mat = np.asarray(m.matrix)
    if mat.shape != (rows * cols, bands):
        raise ShapeError(f"matrix shape {mat.shape} inconsistent with origin dims {m.origin_dims}")
    return HsiCube(mat.T.reshape(bands, rows, cols), wavelengths)


def normalize_bands(cube: HsiCube) -> Tuple[HsiCube, NormalizationRecord]:
    """Min-max normalize each band to [0, 1].

    Constant bands map to zeros; their record keeps ``(v, v)`` so that
    :func:`denormalize_bands` restores ``v``.
    """
    flat = cube.data.reshape(cube.bands, -1)
    record = NormalizationRecord(flat.min(axis=1), flat.max(axis=1))
    return apply_normalization(cube, record), record


def apply_normalization(cube: HsiCube, record: NormalizationRecord) -> HsiCube:
    """Map ``cube`` with the affine band transform stored in ``record``.

    Used to put a clean cube on the same scale as its noisy counterpart.
    Output values need not lie in [0, 1].
    """
    if record.bands != cube.bands:
        raise ShapeError(f"record has {record.bands} bands, cube has {cube.bands}")
    flat = cube.data.reshape(cube.bands, -1).astype(np.float64)
    lo, hi = record.per_band_min, record.per_band_max
    span = hi - lo
    out = (flat - lo[:, None]) / np.where(span > 0, span, 1.0)[:, None]
    out[span == 0] = 0.0
    return cube.with_data(out.reshape(cube.data.shape))


def denormalize_bands(cube: HsiCube, record: NormalizationRecord) -> HsiCube:
    """Map normalized bands back with ``x * (max - min) + min``."""
    if record.bands != cube.bands:
        raise ShapeError(f"record has {record.bands} bands, cube has {cube.bands}")
    flat = cube.data.reshape(cube.bands, -1).astype(np.float64)
    lo, hi = record.per_band_min, record.per_band_max
    out = flat * (hi - lo)[:, None] + lo[:, None]
    return cube.with_data(out.reshape(cube.data.shape))


# ---------------------------------------------------------------------------
# file container


def _header_dict(cube: HsiCube) -> dict:
    hdr = {
        "magic": MAGIC,
        "rows": cube.rows,
        "cols": cube.cols,
        "bands": cube.bands,
        "dtype": "f32",
        "interleave": "bsq",
        "byte_order": "little",
    }
    if cube.wavelengths is not None:
        hdr["wavelengths"] = list(cube.wavelengths)
    return hdr


def save_cube(cube: HsiCube, path: PathLike) -> None:
    """Write ``cube`` to ``path``.

    A ``.bsq`` suffix writes a raw payload plus a sibling ``.json`` header;
    anything else writes the single-file ``.hyde`` container (header line
    followed by the little-endian float32 BSQ payload).
    """
    path = Path(path)
    header = json.dumps(_header_dict(cube), separators=(",", ":"))
    payload = cube.data.astype("<f4", copy=False).tobytes(order="C")
    try:
        if path.suffix.lower() == ".bsq":
            path.with_suffix(".json").write_text(header + "\n", encoding="utf-8")
            path.write_bytes(payload)
        else:
            with open(path, "wb") as fh:
                fh.write(header.encode("utf-8") + b"\n")
                fh.write(payload)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write cube: {exc.strerror}", str(path)) from exc


def _parse_header(raw: bytes, source: Path) -> dict:
    try:
        hdr = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{source}: unreadable header ({exc})") from None
    if not isinstance(hdr, dict):
        raise FormatError(f"{source}: header is not a JSON object")
    if hdr.get("magic") != MAGIC:
        raise FormatError(f"{source}: bad magic {hdr.get('magic')!r}")
    for key, expected in (("dtype", "f32"), ("interleave", "bsq"), ("byte_order", "little")):
        if hdr.get(key, expected) != expected:
            raise FormatError(f"{source}: unsupported {key} {hdr.get(key)!r}")
    for key in ("rows", "cols", "bands"):
        val = hdr.get(key)
        if not isinstance(val, int) or isinstance(val, bool) or val < 1:
            raise FormatError(f"{source}: header field {key!r} must be a positive integer")
    return hdr


def _cube_from_payload(hdr: dict, payload: bytes, source: Path) -> HsiCube:
    r, c, b = hdr["rows"], hdr["cols"], hdr["bands"]
    expected = 4 * r * c * b
    if len(payload) != expected:
        raise IntegrityError(
            f"{source}: header declares {r}x{c}x{b} ({expected} bytes) "
            f"but payload has {len(payload)} bytes"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(b, r, c)
    bad = _first_nonfinite(data)
    if bad is not None:
        flat = int(np.ravel_multi_index(bad, data.shape))
        raise DataError(f"{source}: non-finite value at payload index {flat} (band, row, col) = {bad}")
    try:
        return HsiCube(data, hdr.get("wavelengths"))
    except (ShapeError, ParameterError) as exc:
        raise FormatError(f"{source}: {exc}") from None


def load_cube(path: PathLike) -> HsiCube:
    """Read a ``.hyde`` container or a raw ``.bsq`` file with a ``.json`` sidecar.

    Values are returned verbatim; no scaling is applied.
    """
    path = Path(path)
    if path.suffix.lower() == ".bsq":
        sidecar = path.with_suffix(".json")
        if not sidecar.exists():
            raise FormatError(f"{path}: missing sidecar header {sidecar.name}")
        hdr = _parse_header(sidecar.read_bytes().strip(), sidecar)
        return _cube_from_payload(hdr, path.read_bytes(), path)

    blob = path.read_bytes()
    nl = blob.find(b"\n", 0, _MAX_HEADER_BYTES)
    if nl < 0:
        raise FormatError(f"{path}: no header terminator found")
    hdr = _parse_header(blob[:nl], path)
    return _cube_from_payload(hdr, blob[nl + 1 :], path)
