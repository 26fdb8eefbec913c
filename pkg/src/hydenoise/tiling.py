"""Overlapping tiled inference with linear feathering.

A cube is cut into tiles on a regular grid along rows, cols and bands. Each
tile is denoised on its own and the results are blended back. Along every
axis a tile's weight ramps linearly up across the overlap it shares with the
previous tile and down across the overlap with the next one; the per-axis
weights are normalized to sum to one, so their product over the three axes
is a partition of unity.

Assembly keeps a running weighted mean in the output array itself, so no
full-size accumulation buffer is allocated. Where only one tile has
contributed so far the value is copied verbatim, and later tiles move it by
``(w / W) * (v - out)``; for a method that returns its input unchanged this
step is exactly zero, which makes the identity round trip bit-exact.

Working memory beyond the input and output cubes is the method's own
footprint on one tile plus about 8 float32 tile volumes per worker for
slicing and blending.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

from .cube import HsiCube
from .errors import HydeError, MethodError, ParameterError, ShapeError

__all__ = ["Tile", "TilePlan", "plan_tiles", "tile_count", "tiled_apply", "axis_weights", "parse_triple"]

Triple = Tuple[int, int, int]


def tile_count(dim: int, tile: int, overlap: int) -> int:
    """Number of tiles along one axis: ``ceil((dim - overlap) / (tile - overlap))``."""
    return -(-(dim - overlap) // (tile - overlap))


def _axis_layout(dim: int, tile: int, overlap: int):
    n = tile_count(dim, tile, overlap)
    starts = [min(i * (tile - overlap), dim - tile) for i in range(n)]
    ends = [s + tile for s in starts]
    bounds = [0] + [(starts[i] + ends[i - 1]) // 2 for i in range(1, n)] + [dim]
    cores = [(bounds[i], bounds[i + 1]) for i in range(n)]
    return list(zip(starts, ends)), cores


def axis_weights(spans: Sequence[Tuple[int, int]], dim: int) -> List[np.ndarray]:
    """Normalized feathering weights of each tile along one axis.

    Returns one float64 vector per tile, covering that tile's span. At every
    position the weights of all covering tiles sum to one.
    """
    raw = []
    for i, (s, e) in enumerate(spans):
        p = np.arange(s, e, dtype=np.float64)
        w = np.ones(e - s)
        if i > 0:
            ov = spans[i - 1][1] - s
            if ov > 0:
                w = np.minimum(w, (p - s + 1) / (ov + 1))
        if i + 1 < len(spans):
            ov = e - spans[i + 1][0]
            if ov > 0:
                w = np.minimum(w, (e - p) / (ov + 1))
        raw.append(w)
    total = np.zeros(dim)
    for (s, e), w in zip(spans, raw):
        total[s:e] += w
    return [w / total[s:e] for (s, e), w in zip(spans, raw)]


@dataclass(frozen=True)
class Tile:
    """One work item. ``rows``/``cols``/``bands`` are half-open ranges into the cube."""

    index: Triple  # (band, row, col) grid position
    rows: Tuple[int, int]
    cols: Tuple[int, int]
    bands: Tuple[int, int]
    core_rows: Tuple[int, int]
    core_cols: Tuple[int, int]
    core_bands: Tuple[int, int]

    @property
    def volume(self) -> int:
        return (self.rows[1] - self.rows[0]) * (self.cols[1] - self.cols[0]) * (self.bands[1] - self.bands[0])

    def describe(self) -> str:
        r, c, b = self.rows, self.cols, self.bands
        return f"rows {r[0]}:{r[1]}, cols {c[0]}:{c[1]}, bands {b[0]}:{b[1]}"


@dataclass(frozen=True)
class TilePlan:
    """Tiles in band-outer, then row, then column order."""

    dims: Triple  # (rows, cols, bands)
    tile: Triple
    overlap: Triple
    tiles: Tuple[Tile, ...]
    grid: Triple  # tiles per axis as (bands, rows, cols)

    tile_rows = property(lambda self: self.tile[0])
    tile_cols = property(lambda self: self.tile[1])
    tile_bands = property(lambda self: self.tile[2])
    overlap_rows = property(lambda self: self.overlap[0])
    overlap_cols = property(lambda self: self.overlap[1])
    overlap_bands = property(lambda self: self.overlap[2])

    def __len__(self):
        return len(self.tiles)


def _as_triple(value, name) -> Triple:
    try:
        t = tuple(int(v) for v in value)
    except TypeError:
        raise ParameterError(f"{name} must be a sequence of 3 integers") from None
    if len(t) != 3 or any(int(v) != v for v in value):
        raise ParameterError(f"{name} must be 3 integers, got {value!r}")
    return t


def plan_tiles(dims, tile, overlap=(0, 0, 0)) -> TilePlan:
    """Lay out overlapping tiles over a ``(rows, cols, bands)`` cube.

    Tiles are spaced ``tile - overlap`` apart; the last tile on each axis is
    shifted back to end at the cube border, so it may overlap its
    neighbour by more than ``overlap``. Core ranges split every overlap at
    its midpoint and partition the cube.

    Raises
    ------
    ParameterError
        If a tile size is zero or larger than the cube, or an overlap is
        negative or not smaller than the tile size.
    """
    dims, tile, overlap = _as_triple(dims, "dims"), _as_triple(tile, "tile"), _as_triple(overlap, "overlap")
    names = ("rows", "cols", "bands")
    for n, d, t, o in zip(names, dims, tile, overlap):
        if d < 1:
            raise ParameterError(f"cube {n} must be >= 1, got {d}")
        if t < 1:
            raise ParameterError(f"tile {n} must be >= 1, got {t}")
        if t > d:
            raise ParameterError(f"tile {n} ({t}) exceeds cube {n} ({d})")
        if o < 0:
            raise ParameterError(f"overlap {n} must be >= 0, got {o}")
        if o >= t:
            raise ParameterError(f"overlap {n} ({o}) must be smaller than tile {n} ({t})")
    (rs, rc), (cs, cc), (bs, bc) = (_axis_layout(d, t, o) for d, t, o in zip(dims, tile, overlap))
    tiles = []
    for ib, (bspan, bcore) in enumerate(zip(bs, bc)):
        for ir, (rspan, rcore) in enumerate(zip(rs, rc)):
            for ic, (cspan, ccore) in enumerate(zip(cs, cc)):
                tiles.append(Tile((ib, ir, ic), rspan, cspan, bspan, rcore, ccore, bcore))
    return TilePlan(dims, tile, overlap, tuple(tiles), (len(bs), len(rs), len(cs)))


def parse_triple(text: str, full_bands: int = None) -> Triple:
    """Parse ``"RxCxB"`` (or ``"RxC"``, which takes ``full_bands``)."""
    parts = text.lower().split("x")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise ParameterError(f"expected RxCxB integers, got {text!r}") from None
    if len(vals) == 2 and full_bands is not None:
        vals.append(full_bands)
    if len(vals) != 3:
        raise ParameterError(f"expected RxCxB, got {text!r}")
    return tuple(vals)


def _prefix(weights: List[np.ndarray], spans) -> List[np.ndarray]:
    """For tile ``i`` along an axis: summed weight of tiles ``j < i`` over tile ``i``'s span."""
    out = []
    for i, (s, e) in enumerate(spans):
        acc = np.zeros(e - s)
        for j in range(i):
            sj, ej = spans[j]
            lo, hi = max(s, sj), min(e, ej)
            if lo < hi:
                acc[lo - s:hi - s] += weights[j][lo - sj:hi - sj]
        out.append(acc)
    return out


def _resolve(method, params) -> Callable[[HsiCube], HsiCube]:
    if callable(method):
        return method
    from .denoisers import coerce_params, denoise, get_method

    get_method(method)
    p = coerce_params(params)
    return lambda c: denoise(c, method, p)


def tiled_apply(method: Union[str, Callable[[HsiCube], HsiCube]], cube: HsiCube, plan: TilePlan,
                params=None, workers: int = 1) -> HsiCube:
    """Denoise ``cube`` tile by tile and blend the results.

    Parameters
    ----------
    method : str or callable
        Registered method name (used with ``params``) or a function
        ``HsiCube -> HsiCube`` that preserves shape.
    cube : HsiCube
    plan : TilePlan
        Must have been made for ``cube``'s dimensions.
    params : DenoiseParams, dict or JSON str, optional
    workers : int
        Tiles denoised concurrently. Results are always blended in plan
        order, so the output does not depend on this value. At most
        ``workers`` finished tiles are held in memory at once.

    Raises
    ------
    ShapeError
        If the plan does not match the cube.
    MethodError
        If the method fails on a tile; the message names the tile's ranges.
        Library errors raised by the method keep their class.
    """
    if tuple(plan.dims) != cube.dims:
        raise ShapeError(f"plan is for dims {plan.dims}, cube has {cube.dims}")
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    fn = _resolve(method, params)

    spans = {}
    weights = {}
    prefix = {}
    for axis, key in enumerate(("rows", "cols", "bands")):
        sp = sorted({getattr(t, key) for t in plan.tiles})
        w = axis_weights(sp, cube.dims[axis])
        spans[key] = sp
        weights[key] = dict(zip(sp, w))
        prefix[key] = dict(zip(sp, _prefix(w, sp)))

    src = cube.data
    out = np.zeros(src.shape, dtype=np.float32)
    wl = cube.wavelengths

    def run(t: Tile):
        (r0, r1), (c0, c1), (b0, b1) = t.rows, t.cols, t.bands
        sub = HsiCube(src[b0:b1, r0:r1, c0:c1], None if wl is None else wl[b0:b1])
        try:
            res = fn(sub)
        except HydeError as exc:
            raise type(exc)(f"tile {t.describe()}: {exc}") from exc
        except Exception as exc:
            raise MethodError(f"tile {t.describe()}: {type(exc).__name__}: {exc}") from exc
        data = res.data if isinstance(res, HsiCube) else np.asarray(res)
        if data.shape != sub.data.shape:
            raise MethodError(f"tile {t.describe()}: method changed shape {sub.data.shape} -> {data.shape}")
        return data

    def blend(t: Tile, v: np.ndarray):
        (r0, r1), (c0, c1), (b0, b1) = t.rows, t.cols, t.bands
        a, r, c = weights["bands"][t.bands], weights["rows"][t.rows], weights["cols"][t.cols]
        pa, pr, pc = prefix["bands"][t.bands], prefix["rows"][t.rows], prefix["cols"][t.cols]
        # in-place float64 work keeps the temporaries to a few tile volumes
        w = a[:, None, None] * r[None, :, None] * c[None, None, :]
        prev = a[:, None, None] * (pr[:, None] + r[:, None] * pc[None, :])
        prev += pa[:, None, None]
        first = prev == 0.0
        prev += w
        np.divide(w, prev, out=w)
        del prev
        region = out[b0:b1, r0:r1, c0:c1]
        step = v.astype(np.float64)
        step -= region
        step *= w
        del w
        step += region
        np.copyto(region, step, casting="same_kind")
        del step
        np.copyto(region, v, where=first)

    if workers == 1:
        for t in plan.tiles:
            blend(t, run(t))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pending = deque()
            it = iter(plan.tiles)
            for t in it:
                pending.append((t, pool.submit(run, t)))
                if len(pending) >= workers:
                    t0, fut = pending.popleft()
                    blend(t0, fut.result())
            while pending:
                t0, fut = pending.popleft()
                blend(t0, fut.result())
    return HsiCube._adopt(out, wl)
