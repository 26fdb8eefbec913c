"""Command-line interface.

Exit codes: 0 success, 2 usage or parameter error, 3 data or file format
error, 4 method failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .bench import BenchmarkConfig, format_table, run_benchmark
from .cube import denormalize_bands, load_cube, normalize_bands, save_cube
from .denoisers import METHODS, denoise
from .errors import DataError, MethodError, ParameterError, ShapeError
from .metrics import evaluate
from .noise import NoiseSpec
from .synth import SYNTH_KINDS, synth_cube
from .tiling import parse_triple, plan_tiles, tiled_apply

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_METHOD = 0, 2, 3, 4


def _cmd_simulate(args) -> int:
    cube = load_cube(args.input)
    noisy = NoiseSpec.from_json(args.noise).apply(cube)
    save_cube(noisy, args.output)
    return EXIT_OK


def _cmd_denoise(args) -> int:
    cube = load_cube(args.input)
    record = None
    if args.normalize:
        cube, record = normalize_bands(cube)
    if args.tile:
        tile = parse_triple(args.tile, cube.bands)
        overlap = parse_triple(args.overlap, 0) if args.overlap else (0, 0, 0)
        out = tiled_apply(args.method, cube, plan_tiles(cube.dims, tile, overlap), args.params,
                          workers=args.tile_workers)
    else:
        if args.overlap:
            raise ParameterError("--overlap requires --tile")
        out = denoise(cube, args.method, args.params)
    if record is not None:
        out = denormalize_bands(out, record)
    save_cube(out, args.output)
    return EXIT_OK


def _cmd_metrics(args) -> int:
    report = evaluate(load_cube(args.reference), load_cube(args.estimate))
    print(json.dumps(report.to_json_dict(), sort_keys=True))
    return EXIT_OK


def _cmd_benchmark(args) -> int:
    cfg = BenchmarkConfig.from_file(args.config)
    if args.output:
        cfg.output = args.output
    progress = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    report = run_benchmark(cfg, progress=progress)
    print(format_table(report))
    return EXIT_METHOD if any(c.error for c in report.cells) else EXIT_OK


def _cmd_synth(args) -> int:
    cube = synth_cube(args.rows, args.cols, args.bands, args.rank, seed=args.seed, kind=args.kind)
    save_cube(cube, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hydenoise", description="Hyperspectral image denoising toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="add synthetic noise to a cube")
    s.add_argument("--input", required=True)
    s.add_argument("--noise", required=True, help='noise spec JSON, e.g. \'{"kind":"gaussian_snr","target_snr_db":20,"seed":1}\'')
    s.add_argument("--output", required=True)
    s.set_defaults(func=_cmd_simulate)

    s = sub.add_parser("denoise", help="denoise a cube with a registered method")
    s.add_argument("--method", required=True, choices=sorted(METHODS))
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--params", default=None, help="method parameters as a JSON object")
    s.add_argument("--tile", default=None, help="tile size RxCxB (RxC keeps all bands)")
    s.add_argument("--overlap", default=None, help="tile overlap RxCxB (RxC means no band overlap)")
    s.add_argument("--tile-workers", type=int, default=1, help="tiles processed concurrently")
    s.add_argument("--normalize", action="store_true", help="scale bands to [0, 1] before denoising and back after")
    s.set_defaults(func=_cmd_denoise)

    s = sub.add_parser("metrics", help="print SNR, PSNR, SAM and MSE as JSON")
    s.add_argument("--reference", required=True)
    s.add_argument("--estimate", required=True)
    s.set_defaults(func=_cmd_metrics)

    s = sub.add_parser("benchmark", help="run a benchmark described by a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--output", default=None, help="JSON lines output path (overrides the config)")
    s.add_argument("-v", "--verbose", action="store_true", help="report progress on stderr")
    s.set_defaults(func=_cmd_benchmark)

    s = sub.add_parser("synth", help="write a synthetic ground-truth cube")
    s.add_argument("--kind", choices=SYNTH_KINDS, default="lowrank")
    s.add_argument("--rows", type=int, required=True)
    s.add_argument("--cols", type=int, required=True)
    s.add_argument("--bands", type=int, required=True)
    s.add_argument("--rank", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", required=True)
    s.set_defaults(func=_cmd_synth)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except MethodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_METHOD


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
