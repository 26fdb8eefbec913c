import math
import threading
import tracemalloc

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hydenoise.cube import HsiCube
from hydenoise.denoisers import forpdn, hyres
from hydenoise.errors import DataError, MethodError, ParameterError, ShapeError
from hydenoise.metrics import psnr
from hydenoise.noise import add_gaussian_noise_snr
from hydenoise.synth import synth_cube
from hydenoise.tiling import axis_weights, parse_triple, plan_tiles, tile_count, tiled_apply


@st.composite
def plans(draw, max_dim=24):
    dims, tile, overlap = [], [], []
    for _ in range(3):
        d = draw(st.integers(1, max_dim))
        t = draw(st.integers(1, d))
        o = draw(st.integers(0, t - 1))
        dims.append(d)
        tile.append(t)
        overlap.append(o)
    return tuple(dims), tuple(tile), tuple(overlap)


def _brute_count(dim, tile, overlap):
    starts, s = [], 0
    while True:
        starts.append(min(s, dim - tile))
        if s + tile >= dim:
            return len(starts)
        s += tile - overlap


class TestPlan:
    def test_single_tile(self):
        p = plan_tiles((4, 4, 2), (4, 4, 2))
        assert len(p) == 1
        t = p.tiles[0]
        assert (t.rows, t.cols, t.bands) == ((0, 4), (0, 4), (0, 2))
        assert (t.core_rows, t.core_cols, t.core_bands) == ((0, 4), (0, 4), (0, 2))

    def test_ten_rows(self):
        p = plan_tiles((10, 1, 1), (4, 1, 1), (2, 0, 0))
        assert [t.rows[0] for t in p.tiles] == [0, 2, 4, 6]
        assert tile_count(10, 4, 2) == 4 == math.ceil((10 - 2) / (4 - 2))

    def test_properties(self):
        p = plan_tiles((10, 12, 6), (4, 5, 3), (1, 2, 0))
        assert (p.tile_rows, p.tile_cols, p.tile_bands) == (4, 5, 3)
        assert (p.overlap_rows, p.overlap_cols, p.overlap_bands) == (1, 2, 0)
        # band-outer, then row, then column
        idx = [t.index for t in p.tiles]
        assert idx == sorted(idx)

    @pytest.mark.parametrize("tile,overlap", [
        ((4, 4, 2), (4, 0, 0)),
        ((0, 4, 2), (0, 0, 0)),
        ((4, 4, 2), (-1, 0, 0)),
        ((5, 4, 2), (0, 0, 0)),
        ((4, 4), (0, 0, 0)),
    ])
    def test_invalid(self, tile, overlap):
        with pytest.raises(ParameterError):
            plan_tiles((4, 4, 2), tile, overlap)

    def test_count_formula_200_triples(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            dims = tuple(int(v) for v in rng.integers(1, 200, 3))
            tile = tuple(int(rng.integers(1, d + 1)) for d in dims)
            overlap = tuple(int(rng.integers(0, t)) for t in tile)
            want = math.prod(math.ceil((d - o) / (t - o)) for d, t, o in zip(dims, tile, overlap))
            assert len(plan_tiles(dims, tile, overlap)) == want
            assert want == math.prod(_brute_count(*a) for a in zip(dims, tile, overlap))

    @given(plans())
    def test_cores_partition_and_bounds(self, args):
        dims, tile, overlap = args
        p = plan_tiles(dims, tile, overlap)
        cover = np.zeros((dims[2], dims[0], dims[1]), dtype=int)
        for t in p.tiles:
            for (s, e), (cs, ce), d in zip((t.rows, t.cols, t.bands), (t.core_rows, t.core_cols, t.core_bands), dims):
                assert 0 <= s <= cs < ce <= e <= d
            assert (t.rows[1] - t.rows[0], t.cols[1] - t.cols[0], t.bands[1] - t.bands[0]) == tile
            cover[t.core_bands[0]:t.core_bands[1], t.core_rows[0]:t.core_rows[1], t.core_cols[0]:t.core_cols[1]] += 1
        assert np.all(cover == 1)

    @given(plans(max_dim=60))
    def test_axis_weights_partition_of_unity(self, args):
        dims, tile, overlap = args
        p = plan_tiles(dims, tile, overlap)
        spans = sorted({t.rows for t in p.tiles})
        total = np.zeros(dims[0])
        for (s, e), w in zip(spans, axis_weights(spans, dims[0])):
            assert np.all(w > 0)
            total[s:e] += w
        np.testing.assert_allclose(total, 1.0, rtol=1e-12)

    def test_parse_triple(self):
        assert parse_triple("32x16x8") == (32, 16, 8)
        assert parse_triple("32X16", full_bands=30) == (32, 16, 30)
        for bad in ("32x16", "axbxc", "1x2x3x4"):
            with pytest.raises(ParameterError):
                parse_triple(bad)


class TestTiledApply:
    def test_identity_bit_exact_50_plans(self):
        rng = np.random.default_rng(3)
        for i in range(50):
            dims = tuple(int(v) for v in rng.integers(1, 30, 3))
            tile = tuple(int(rng.integers(1, d + 1)) for d in dims)
            overlap = tuple(int(rng.integers(0, t)) for t in tile)
            cube = HsiCube(rng.normal(scale=100, size=(dims[2], dims[0], dims[1])))
            plan = plan_tiles(dims, tile, overlap)
            out = tiled_apply("identity", cube, plan, workers=1 + i % 3)
            assert out.data.tobytes() == cube.data.tobytes()

    def test_forpdn_spatial_tiles_match_untiled(self):
        clean = synth_cube(64, 64, 16, 3, seed=4)
        noisy = add_gaussian_noise_snr(clean, 20, seed=5)
        # db8 support is 16 taps; overlap 32 is twice that
        plan = plan_tiles(noisy.dims, (48, 48, 16), (32, 32, 0))
        tiled = tiled_apply("forpdn", noisy, plan, {"lambda": 10.0})
        full = forpdn(noisy, lam=10.0)
        assert np.abs(tiled.data.astype(np.float64) - full.data).max() <= 1e-3

    def test_hyres_band_slices_improve(self, lowrank6):
        clean, noisy = lowrank6
        plan = plan_tiles(noisy.dims, (64, 64, 16), (0, 0, 4))
        out = tiled_apply("hyres", noisy, plan)
        assert psnr(clean, out) > psnr(clean, noisy)

    def test_workers_do_not_change_result(self, lowrank6):
        _, noisy = lowrank6
        plan = plan_tiles(noisy.dims, (40, 40, 31), (8, 8, 0))
        a = tiled_apply("hyres", noisy, plan, workers=1)
        b = tiled_apply("hyres", noisy, plan, workers=4)
        assert a.data.tobytes() == b.data.tobytes()

    def test_workers_run_concurrently(self, rng):
        cube = HsiCube(rng.normal(size=(2, 8, 8)))
        seen = set()
        barrier = threading.Barrier(2, timeout=10)

        def method(c):
            seen.add(threading.get_ident())
            barrier.wait()
            return c

        tiled_apply(method, cube, plan_tiles(cube.dims, (4, 8, 2)), workers=2)
        assert len(seen) == 2

    def test_wavelengths_kept(self, rng):
        cube = HsiCube(rng.normal(size=(4, 6, 6)), [1.0, 2.0, 3.0, 4.0])
        out = tiled_apply("identity", cube, plan_tiles(cube.dims, (3, 3, 2), (1, 1, 1)))
        assert out.wavelengths == cube.wavelengths

    def test_plan_mismatch(self, rng):
        cube = HsiCube(rng.normal(size=(2, 8, 8)))
        with pytest.raises(ShapeError):
            tiled_apply("identity", cube, plan_tiles((8, 9, 2), (4, 4, 2)))

    def test_failure_names_tile(self, rng):
        cube = HsiCube(rng.normal(size=(2, 8, 8)))

        def fails_on_second_column(c):
            if c.data[0, 0, 0] == cube.data[0, 0, 4]:
                raise RuntimeError("bad tile")
            return c

        with pytest.raises(MethodError, match="rows 0:4, cols 4:8, bands 0:2"):
            tiled_apply(fails_on_second_column, cube, plan_tiles(cube.dims, (4, 4, 2)))

    def test_library_error_keeps_class(self, rng):
        cube = HsiCube(rng.normal(size=(2, 8, 8)))

        def method(c):
            raise DataError("no good")

        with pytest.raises(DataError, match="rows 0:4"):
            tiled_apply(method, cube, plan_tiles(cube.dims, (4, 4, 2)))

    def test_registered_method_errors_name_tile(self, rng):
        cube = HsiCube(rng.normal(size=(4, 8, 8)))
        with pytest.raises(ParameterError, match="rows 0:8"):
            tiled_apply("wsrrr", cube, plan_tiles(cube.dims, (8, 8, 2)), {"rank": 3})

    def test_memory_bound(self, rng):
        cube = HsiCube(rng.normal(size=(16, 128, 128)))
        plan = plan_tiles(cube.dims, (32, 32, 16), (8, 8, 0))
        tile_bytes = 4 * max(t.volume for t in plan.tiles)
        out_bytes = cube.data.nbytes
        tracemalloc.start()
        try:
            tiled_apply("identity", cube, plan)
            _, peak = tracemalloc.get_traced_memory()
        finally:
            tracemalloc.stop()
        assert peak <= out_bytes + 8 * tile_bytes
