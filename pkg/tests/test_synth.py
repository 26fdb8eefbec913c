import numpy as np
import pytest

from hydenoise.errors import ParameterError
from hydenoise.synth import SYNTH_KINDS, abundance_maps, endmember_spectra, synth_cube
from hydenoise.cube import unfold
from hydenoise.noise import make_rng


@pytest.mark.parametrize("kind", SYNTH_KINDS)
@pytest.mark.parametrize("rank", [1, 3, 6])
def test_exact_rank(kind, rank):
    c = synth_cube(32, 30, 20, rank, seed=4, kind=kind)
    s = np.linalg.svd(unfold(c).matrix.astype(np.float64), compute_uv=False)
    assert np.sum(s > 1e-5 * s[0]) == rank


@pytest.mark.parametrize("kind", SYNTH_KINDS)
def test_abundances_simplex(kind):
    a = abundance_maps(20, 24, 4, kind, make_rng(3, "synth"))
    assert a.shape == (4, 20, 24)
    assert a.min() >= 0
    np.testing.assert_allclose(a.sum(axis=0), 1.0, atol=1e-12)


def test_piecewise_has_few_levels():
    a = abundance_maps(40, 40, 3, "piecewise", make_rng(1, "synth"))
    assert len(np.unique(a[0])) <= 6


def test_spectra_positive_peak_one():
    e = endmember_spectra(50, 5, make_rng(2, "synth"))
    assert e.shape == (5, 50) and e.min() > 0
    np.testing.assert_allclose(e.max(axis=1), 1.0)


def test_deterministic_and_seeded():
    a = synth_cube(16, 16, 8, 2, seed=9)
    assert a.data.tobytes() == synth_cube(16, 16, 8, 2, seed=9).data.tobytes()
    assert a.data.tobytes() != synth_cube(16, 16, 8, 2, seed=10).data.tobytes()
    assert len(a.wavelengths) == 8


@pytest.mark.parametrize("args,kw", [
    ((4, 4, 3, 4), {}),
    ((4, 4, 3, 0), {}),
    ((4, 4, 3, 2), {"kind": "speckle"}),
])
def test_invalid(args, kw):
    with pytest.raises(ParameterError):
        synth_cube(*args, **kw)
