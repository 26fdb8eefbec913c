import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hydenoise.bench import BenchmarkConfig, format_table, olympic_mean, peak_rss_bytes, run_benchmark
from hydenoise.cube import HsiCube, save_cube
from hydenoise.denoisers import METHODS, register_method
from hydenoise.errors import FormatError, MethodError, ParameterError
from hydenoise.synth import synth_cube


def _brute_olympic(values):
    s = sorted(values)[1:-1]
    total = 0.0
    for v in s:
        total += v
    return total / len(s)


@pytest.fixture(scope="module")
def small_ref():
    return synth_cube(32, 32, 16, 4, seed=3)


class TestOlympicMean:
    def test_examples(self):
        assert olympic_mean([1, 2, 3, 4, 5]) == 3
        assert olympic_mean([7, 7, 7]) == 7
        assert olympic_mean([5, 1, 100, 2]) == 3.5

    def test_exhaustive_lengths(self):
        rng = np.random.default_rng(11)
        for n in range(3, 101):
            vals = list(rng.normal(scale=10, size=n))
            assert olympic_mean(vals) == pytest.approx(_brute_olympic(vals), rel=1e-12, abs=1e-12)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=40))
    def test_property(self, vals):
        assert olympic_mean(vals) == pytest.approx(_brute_olympic(vals), rel=1e-9, abs=1e-6)
        assert min(vals) <= olympic_mean(vals) <= max(vals)

    @pytest.mark.parametrize("vals", [[], [1.0], [1.0, 2.0]])
    def test_too_short(self, vals):
        with pytest.raises(ParameterError):
            olympic_mean(vals)


class TestConfig:
    def test_runs_must_allow_olympic_scoring(self, small_ref):
        with pytest.raises(ParameterError):
            BenchmarkConfig(small_ref, [("hyres", None)], runs=2)

    @pytest.mark.parametrize("kw", [
        dict(methods=[]),
        dict(methods=[("bm3d", None)]),
        dict(methods=[("hyres", None)], snr_levels_db=[float("inf")]),
        dict(methods=[("wsrrr", {"lambda": -1})]),
    ])
    def test_invalid(self, small_ref, kw):
        with pytest.raises(ParameterError):
            BenchmarkConfig(small_ref, **kw)

    def test_from_file(self, tmp_path, small_ref):
        save_cube(small_ref, tmp_path / "ref.hyde")
        (tmp_path / "cfg.json").write_text(json.dumps({
            "reference": "ref.hyde",
            "methods": ["hyres", {"name": "forpdn", "params": {"lambda": 10}}],
            "snr_levels_db": [25],
            "runs": 3,
            "tile": "16x16x16",
            "overlap": [4, 4, 0],
            "output": "out.jsonl",
        }))
        cfg = BenchmarkConfig.from_file(tmp_path / "cfg.json")
        assert cfg.reference == str(tmp_path / "ref.hyde")
        assert cfg.output == str(tmp_path / "out.jsonl")
        assert cfg.tile == (16, 16, 16) and cfg.overlap == (4, 4, 0)
        assert [n for n, _ in cfg.methods] == ["hyres", "forpdn"]
        assert cfg.methods[1][1].lam == 10
        assert cfg.snr_levels_db == [25] and cfg.normalize is True

    def test_bad_files(self, tmp_path):
        (tmp_path / "a.json").write_text("{oops")
        with pytest.raises(FormatError):
            BenchmarkConfig.from_file(tmp_path / "a.json")
        (tmp_path / "b.json").write_text('{"reference": "x", "methods": ["hyres"], "color": 1}')
        with pytest.raises(ParameterError):
            BenchmarkConfig.from_file(tmp_path / "b.json")


class TestRun:
    def test_hyres_smoke(self, small_ref, tmp_path):
        out = tmp_path / "r.jsonl"
        cfg = BenchmarkConfig(small_ref, [("hyres", None)], snr_levels_db=[20], runs=3, output=out)
        rep = run_benchmark(cfg)
        assert len(rep.cells) == 1
        c = rep.cell("hyres", 20)
        assert c.time_s > 0 and len(c.times_s) == 3
        assert c.psnr_db > c.input_psnr_db
        assert c.sam_rad < c.input_sam_rad
        assert c.error is None
        recs = [json.loads(line) for line in out.read_text().splitlines()]
        assert [r["run"] for r in recs] == [0, 1, 2]
        for r in recs:
            assert r["method"] == "hyres" and r["snr_db"] == 20 and r["seed"] == 0
            assert r["peak_rss_approximate"] is True and r["version"] == rep.version
            assert r["psnr_db"] == c.psnr_db and r["params"] == {}
        assert c.time_s == olympic_mean([r["time_s"] for r in recs])

    def test_fixed_seed_reproducible(self, small_ref):
        cfg = dict(methods=[("hyres", None), ("forpdn", {"lambda": 10})], snr_levels_db=[20, 30], runs=3, seed=5)
        a = run_benchmark(BenchmarkConfig(small_ref, **cfg))
        b = run_benchmark(BenchmarkConfig(small_ref, **cfg))
        assert [(c.psnr_db, c.sam_rad) for c in a.cells] == [(c.psnr_db, c.sam_rad) for c in b.cells]

    def test_methods_see_identical_noisy_input(self, small_ref):
        seen = {}

        def make(tag):
            def fn(cube, params):
                seen.setdefault(tag, []).append(cube.data.tobytes())
                return cube
            return fn

        register_method("probe_a_for_test", make("a"))
        register_method("probe_b_for_test", make("b"))
        try:
            run_benchmark(BenchmarkConfig(small_ref, [("probe_a_for_test", None), ("probe_b_for_test", None)],
                                          snr_levels_db=[20], runs=3))
        finally:
            METHODS.pop("probe_a_for_test")
            METHODS.pop("probe_b_for_test")
        assert len(set(seen["a"] + seen["b"])) == 1

    def test_failing_cell_is_recorded(self, small_ref):
        def broken(cube, params):
            raise MethodError("kaput")

        register_method("broken_bench_for_test", broken)
        try:
            rep = run_benchmark(BenchmarkConfig(small_ref, [("broken_bench_for_test", None), ("identity", None)],
                                                snr_levels_db=[20], runs=3))
        finally:
            METHODS.pop("broken_bench_for_test")
        bad = rep.cell("broken_bench_for_test", 20)
        assert "kaput" in bad.error and bad.psnr_db is None and bad.time_s is None
        assert rep.cell("identity", 20).error is None
        assert any(r["error"] and "kaput" in r["error"] for r in rep.records)
        assert "kaput" in format_table(rep)

    def test_tiled_cells(self, small_ref):
        cfg = BenchmarkConfig(small_ref, [("identity", None)], snr_levels_db=[20], runs=3,
                              tile=(16, 16, 16), overlap=(4, 4, 0))
        c = run_benchmark(cfg).cell("identity", 20)
        assert c.psnr_db == pytest.approx(c.input_psnr_db)

    def test_table_layout(self, small_ref):
        rep = run_benchmark(BenchmarkConfig(small_ref, [("hyres", None)], snr_levels_db=[20, 40], runs=3))
        lines = format_table(rep).splitlines()
        assert lines[0].split()[:5] == ["Method", "SNR(dB)", "PSNR(dB)", "SAM(rad)", "Time(s)"]
        assert sum(line.startswith("hyres") for line in lines) == 2


def test_peak_rss_positive():
    assert peak_rss_bytes() is None or peak_rss_bytes() > 0
