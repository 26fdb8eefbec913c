import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hydenoise.cube import HsiCube
from hydenoise.noise import add_gaussian_noise_snr
from hydenoise.synth import synth_cube

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    """Append a one-line verdict that is echoed in the terminal summary."""

    def log(line: str):
        print(line)
        request.config.acceptance_lines.append(line)

    return log


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_cube(rng, bands, rows, cols, scale=1.0):
    return HsiCube(rng.normal(scale=scale, size=(bands, rows, cols)))


@pytest.fixture(scope="session")
def lowrank6():
    """Rank-6, 64x64x31 ground truth plus a 20 dB noisy copy."""
    clean = synth_cube(64, 64, 31, 6, seed=11, kind="lowrank")
    return clean, add_gaussian_noise_snr(clean, 20.0, seed=101)
