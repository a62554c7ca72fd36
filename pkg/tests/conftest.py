import numpy as np
import pytest

from rotowave.fields import gaussian_envelope, random_state
from rotowave.grid import Grid

# criterion lines collected by test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def grid8():
    return Grid(8, 2 * np.pi)


@pytest.fixture(scope="session")
def grid16():
    return Grid(16, 4 * np.pi)


@pytest.fixture(scope="session")
def grid32():
    return Grid(32, 8 * np.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def smooth_state(grid, seed=0, peak=0.1, width=1.5, ncomp=4):
    """Band-limited real field used across the nonlinear tests."""
    return random_state(grid, seed, ncomp=ncomp, envelope=gaussian_envelope(width), peak=peak)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_LINES, key=lambda k: int(k[1:])):
        terminalreporter.write_line(ACCEPTANCE_LINES[name])
