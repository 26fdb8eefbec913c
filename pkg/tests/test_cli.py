import json

import numpy as np
import pytest

from hydenoise.cli import main
from hydenoise.cube import HsiCube, load_cube, save_cube
from hydenoise.metrics import psnr


@pytest.fixture
def workdir(tmp_path):
    assert main(["synth", "--rows", "32", "--cols", "32", "--bands", "16", "--rank", "3",
                 "--seed", "2", "--output", str(tmp_path / "clean.hyde")]) == 0
    return tmp_path


def test_synth_writes_cube(workdir):
    c = load_cube(workdir / "clean.hyde")
    assert (c.rows, c.cols, c.bands) == (32, 32, 16)


def test_pipeline(workdir, capsys):
    spec = '{"kind":"gaussian_snr","target_snr_db":20,"seed":1234}'
    assert main(["simulate", "--input", str(workdir / "clean.hyde"), "--noise", spec,
                 "--output", str(workdir / "noisy.hyde")]) == 0
    assert main(["denoise", "--method", "hyres", "--input", str(workdir / "noisy.hyde"),
                 "--output", str(workdir / "den.hyde")]) == 0
    capsys.readouterr()
    assert main(["metrics", "--reference", str(workdir / "clean.hyde"), "--estimate", str(workdir / "den.hyde")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report) == {"psnr_db", "sam_rad", "snr_db", "mse"}
    clean, noisy = load_cube(workdir / "clean.hyde"), load_cube(workdir / "noisy.hyde")
    assert report["psnr_db"] > psnr(clean, noisy)


def test_tiled_normalized_denoise(workdir):
    out = workdir / "t.hyde"
    assert main(["denoise", "--method", "identity", "--input", str(workdir / "clean.hyde"), "--output", str(out),
                 "--tile", "16x16", "--overlap", "4x4", "--tile-workers", "2", "--normalize"]) == 0
    np.testing.assert_allclose(load_cube(out).data, load_cube(workdir / "clean.hyde").data, rtol=1e-5, atol=1e-6)


def test_benchmark(workdir, capsys):
    cfg = workdir / "cfg.json"
    cfg.write_text(json.dumps({"reference": "clean.hyde", "methods": ["hyres"], "snr_levels_db": [20],
                               "runs": 3, "output": "res.jsonl"}))
    assert main(["benchmark", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "hyres" in out and "PSNR(dB)" in out
    assert len((workdir / "res.jsonl").read_text().splitlines()) == 3
    assert main(["benchmark", "--config", str(cfg), "--output", str(workdir / "other.jsonl")]) == 0
    assert (workdir / "other.jsonl").exists()


@pytest.mark.parametrize("argv_tail,code", [
    (["--params", '{"rank": 99}', "--method", "wsrrr"], 2),
    (["--params", '{"lambda": 0}', "--method", "forpdn"], 2),
    (["--params", "{", "--method", "forpdn"], 2),
    (["--tile", "64x64x16", "--method", "identity"], 2),
])
def test_denoise_usage_errors(workdir, argv_tail, code):
    argv = ["denoise", "--input", str(workdir / "clean.hyde"), "--output", str(workdir / "x.hyde")] + argv_tail
    assert main(argv) == code


def test_missing_input_is_data_error(workdir):
    assert main(["denoise", "--method", "hyres", "--input", str(workdir / "nope.hyde"),
                 "--output", str(workdir / "x.hyde")]) == 3


def test_corrupt_input_is_data_error(workdir):
    (workdir / "bad.hyde").write_bytes(b'{"magic": "HYDE1"}\n')
    assert main(["metrics", "--reference", str(workdir / "bad.hyde"), "--estimate", str(workdir / "clean.hyde")]) == 3


def test_metrics_shape_mismatch(workdir):
    save_cube(HsiCube(np.ones((2, 2, 2))), workdir / "small.hyde")
    assert main(["metrics", "--reference", str(workdir / "small.hyde"), "--estimate", str(workdir / "clean.hyde")]) == 2


def test_bad_noise_spec(workdir):
    assert main(["simulate", "--input", str(workdir / "clean.hyde"), "--noise", '{"kind":"pink","seed":1}',
                 "--output", str(workdir / "n.hyde")]) == 2


def test_method_failure_exit_code(workdir, tmp_path):
    # HyMiNoR requires three bands; a two-band cube makes the method fail inside the benchmark cell
    save_cube(HsiCube(np.random.default_rng(0).uniform(size=(2, 16, 16))), tmp_path / "two.hyde")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"reference": "two.hyde", "methods": ["hyminor"], "snr_levels_db": [20], "runs": 3}))
    assert main(["benchmark", "--config", str(cfg)]) == 4


def test_unknown_method_rejected_by_parser(workdir):
    with pytest.raises(SystemExit) as exc:
        main(["denoise", "--method", "bm3d", "--input", "a", "--output", "b"])
    assert exc.value.code == 2
