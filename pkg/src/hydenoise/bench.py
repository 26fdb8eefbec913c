"""Repeated-run benchmark harness with Olympic-mean timing."""

from __future__ import annotations

import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

from .cube import HsiCube, load_cube, normalize_bands
from .denoisers import coerce_params, denoise, get_method
from .errors import HydeError, ParameterError
from .metrics import psnr, sam
from .noise import add_gaussian_noise_snr
from .tiling import parse_triple, plan_tiles, tiled_apply

__all__ = [
    "olympic_mean",
    "BenchmarkConfig",
    "BenchmarkCell",
    "BenchmarkReport",
    "run_benchmark",
    "format_table",
    "peak_rss_bytes",
]


def olympic_mean(values: Sequence[float]) -> float:
    """Mean after discarding one smallest and one largest value.

    Raises
    ------
    ParameterError
        If fewer than three values are given.

    Examples
    --------
    >>> olympic_mean([1, 2, 3, 4, 5])
    3.0
    >>> olympic_mean([7, 7, 7])
    7.0
    """
    vals = [float(v) for v in values]
    if len(vals) < 3:
        raise ParameterError(f"olympic_mean needs at least 3 values, got {len(vals)}")
    vals.sort()
    return math.fsum(vals[1:-1]) / (len(vals) - 2)


def peak_rss_bytes() -> Optional[int]:
    """Peak resident set size of this process so far, or ``None`` if unknown.

    This is a process-wide high-water mark, so it only approximates the
    footprint of any single method call.
    """
    try:
        import resource
    except ImportError:  # pragma: no cover - non-POSIX
        return None
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return int(rss) if sys.platform == "darwin" else int(rss) * 1024


@dataclass
class BenchmarkConfig:
    """Benchmark settings.

    ``reference`` is a cube file path or an in-memory :class:`HsiCube`.
    ``methods`` holds ``(name, params)`` pairs; params may be a dict, JSON
    string, :class:`DenoiseParams` or ``None``. With ``normalize`` the
    reference is scaled per band to [0, 1] before noise is added, so every
    metric is in normalized units. ``tile``/``overlap`` are ``(rows, cols,
    bands)`` triples; leaving ``tile`` unset runs each method on the whole
    cube.
    """

    reference: Union[str, os.PathLike, HsiCube]
    methods: List[Tuple[str, object]]
    snr_levels_db: List[float] = field(default_factory=lambda: [20.0, 30.0, 40.0])
    runs: int = 15
    seed: int = 0
    normalize: bool = True
    tile: Optional[Tuple[int, int, int]] = None
    overlap: Tuple[int, int, int] = (0, 0, 0)
    tile_workers: int = 1
    output: Optional[Union[str, os.PathLike]] = None

    def __post_init__(self):
        if isinstance(self.runs, bool) or int(self.runs) != self.runs or self.runs < 3:
            raise ParameterError(f"runs must be an integer >= 3, got {self.runs!r}")
        if not self.methods:
            raise ParameterError("at least one method is required")
        if not self.snr_levels_db:
            raise ParameterError("at least one SNR level is required")
        for s in self.snr_levels_db:
            if not math.isfinite(float(s)):
                raise ParameterError(f"SNR levels must be finite, got {s!r}")
        if self.tile_workers < 1:
            raise ParameterError("tile_workers must be >= 1")
        self.methods = [(str(n), coerce_params(p)) for n, p in self.methods]
        for name, _ in self.methods:
            get_method(name)

    @classmethod
    def from_dict(cls, d: dict, base_dir: Union[str, os.PathLike, None] = None) -> "BenchmarkConfig":
        """Build from a JSON-style dict.

        Methods are given as names or ``{"name": ..., "params": {...}}``
        objects. ``tile`` and ``overlap`` accept ``"RxCxB"`` strings or
        3-element lists. Relative paths resolve against ``base_dir``.
        """
        d = dict(d)
        known = {"reference", "methods", "snr_levels_db", "runs", "seed", "normalize", "tile", "overlap",
                 "tile_workers", "output"}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ParameterError(f"unknown benchmark config key(s): {', '.join(unknown)}")
        if "reference" not in d or "methods" not in d:
            raise ParameterError("benchmark config needs 'reference' and 'methods'")
        methods = []
        for m in d["methods"]:
            if isinstance(m, str):
                methods.append((m, None))
            elif isinstance(m, dict) and "name" in m:
                methods.append((m["name"], m.get("params")))
            else:
                raise ParameterError(f"bad method entry {m!r}")
        d["methods"] = methods
        for key in ("tile", "overlap"):
            if isinstance(d.get(key), str):
                d[key] = parse_triple(d[key])
            elif d.get(key) is not None:
                d[key] = tuple(int(v) for v in d[key])
        for key in ("reference", "output"):
            if isinstance(d.get(key), str) and base_dir is not None and not os.path.isabs(d[key]):
                d[key] = os.path.join(base_dir, d[key])
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "BenchmarkConfig":
        from .errors import FormatError

        try:
            with open(path, "r", encoding="utf-8") as fh:
                d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise FormatError(f"{path}: config must be a JSON object")
        return cls.from_dict(d, base_dir=os.path.dirname(os.path.abspath(path)))


@dataclass
class BenchmarkCell:
    method: str
    snr_db: float
    params: dict
    times_s: List[float]
    time_s: Optional[float]  # Olympic mean
    psnr_db: Optional[float]
    sam_rad: Optional[float]
    input_psnr_db: float
    input_sam_rad: float
    peak_rss_bytes: Optional[int]
    error: Optional[str] = None


@dataclass
class BenchmarkReport:
    cells: List[BenchmarkCell]
    seed: int
    runs: int
    normalize: bool
    version: str
    records: List[dict]  # raw per-run records

    def cell(self, method: str, snr_db: float) -> BenchmarkCell:
        for c in self.cells:
            if c.method == method and c.snr_db == float(snr_db):
                return c
        raise KeyError((method, snr_db))

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _version() -> str:
    from . import __version__

    return __version__


def run_benchmark(cfg: BenchmarkConfig, progress=None) -> BenchmarkReport:
    """Run every (method, SNR) cell ``cfg.runs`` times.

    The noisy cube for each SNR level is generated once with ``cfg.seed``
    and shared by all methods. Only the denoise call is timed. Metrics come
    from the last run (the methods are deterministic). A method that raises
    gets an error note in its cell and the remaining cells still run.
    ``progress``, if given, is called with a short status string per cell.
    If ``cfg.output`` is set the per-run records are written there as JSON
    lines.
    """
    ref = cfg.reference if isinstance(cfg.reference, HsiCube) else load_cube(cfg.reference)
    if cfg.normalize:
        ref, _ = normalize_bands(ref)
    plan = None
    if cfg.tile is not None:
        plan = plan_tiles(ref.dims, cfg.tile, cfg.overlap)
    version = _version()
    cells, records = [], []
    for snr in cfg.snr_levels_db:
        snr = float(snr)
        noisy = add_gaussian_noise_snr(ref, snr, cfg.seed)
        in_psnr, in_sam = psnr(ref, noisy), sam(ref, noisy)
        for name, params in cfg.methods:
            times, out, err = [], None, None
            for _ in range(cfg.runs):
                try:
                    t0 = time.perf_counter()
                    if plan is None:
                        out = denoise(noisy, name, params)
                    else:
                        out = tiled_apply(name, noisy, plan, params, workers=cfg.tile_workers)
                    times.append(time.perf_counter() - t0)
                except HydeError as exc:
                    err = f"{type(exc).__name__}: {exc}"
                    out = None
                    break
            cell = BenchmarkCell(
                method=name,
                snr_db=snr,
                params=params.to_dict(),
                times_s=times,
                time_s=olympic_mean(times) if err is None else None,
                psnr_db=psnr(ref, out) if out is not None else None,
                sam_rad=sam(ref, out) if out is not None else None,
                input_psnr_db=in_psnr,
                input_sam_rad=in_sam,
                peak_rss_bytes=peak_rss_bytes(),
                error=err,
            )
            cells.append(cell)
            for i, t in enumerate(times):
                records.append({
                    "method": name,
                    "snr_db": snr,
                    "run": i,
                    "time_s": t,
                    "psnr_db": _num(cell.psnr_db),
                    "sam_rad": _num(cell.sam_rad),
                    "input_psnr_db": _num(in_psnr),
                    "input_sam_rad": _num(in_sam),
                    "peak_rss_bytes": cell.peak_rss_bytes,
                    "peak_rss_approximate": True,
                    "params": cell.params,
                    "seed": cfg.seed,
                    "normalize": cfg.normalize,
                    "version": version,
                    "error": None,
                })
            if err is not None:
                records.append({
                    "method": name, "snr_db": snr, "run": len(times), "time_s": None, "psnr_db": None,
                    "sam_rad": None, "input_psnr_db": _num(in_psnr), "input_sam_rad": _num(in_sam),
                    "peak_rss_bytes": cell.peak_rss_bytes, "peak_rss_approximate": True, "params": cell.params,
                    "seed": cfg.seed, "normalize": cfg.normalize, "version": version, "error": err,
                })
            if progress is not None:
                progress(f"{name} @ {snr:g} dB done")
    report = BenchmarkReport(cells, cfg.seed, cfg.runs, cfg.normalize, version, records)
    if cfg.output is not None:
        report.write_jsonl(cfg.output)
    return report


def format_table(report: BenchmarkReport) -> str:
    """Aligned text table, one row per (method, SNR) cell."""
    head = ("Method", "SNR(dB)", "PSNR(dB)", "SAM(rad)", "Time(s)", "PeakRSS(MiB)~", "Note")
    rows = []
    for c in report.cells:
        f = lambda v, fmt: "-" if v is None else format(v, fmt)
        rss = None if c.peak_rss_bytes is None else c.peak_rss_bytes / 2**20
        rows.append((c.method, f(c.snr_db, "g"), f(c.psnr_db, ".3f"), f(c.sam_rad, ".4f"), f(c.time_s, ".4f"),
                     f(rss, ".1f"), c.error or ""))
    widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
    fmt_row = lambda r: "  ".join(s.ljust(w) for s, w in zip(r, widths)).rstrip()
    lines = [fmt_row(head), fmt_row(["-" * w for w in widths])] + [fmt_row(r) for r in rows]
    lines.append(f"seed={report.seed} runs={report.runs} normalize={report.normalize} version={report.version}")
    return "\n".join(lines)
