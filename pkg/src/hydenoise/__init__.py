"""Hyperspectral image denoising: cube I/O, noise simulation, classical
denoisers, quality metrics, tiled inference and a benchmark harness."""

__version__ = "0.1.0"

from .cube import (
    CubeMatrix,
    HsiCube,
    NormalizationRecord,
    apply_normalization,
    denormalize_bands,
    fold,
    load_cube,
    normalize_bands,
    save_cube,
    unfold,
)
from .errors import DataError, FormatError, HydeError, IntegrityError, MethodError, ParameterError, ShapeError
from .metrics import MetricsReport, evaluate, mse, psnr, sam, snr_db
from .noise import (
    AugmentConfig,
    NoiseSpec,
    add_deadline,
    add_gaussian_noise_snr,
    add_noniid_gaussian,
    add_salt_pepper,
    add_stripes,
    augment_sample,
)
from .synth import synth_cube
from .denoisers import (
    METHODS,
    DenoiseParams,
    denoise,
    estimate_noise,
    forpdn,
    hyminor,
    hyres,
    hysime,
    otvca,
    wsrrr,
)
from .tiling import TilePlan, plan_tiles, tiled_apply
from .bench import BenchmarkConfig, BenchmarkReport, olympic_mean, run_benchmark
