import numpy as np
import pytest

from filament_noise.grid import make_grid


@pytest.fixture(scope="session")
def grid():
    # 4096 points, dt = 2 fs: the frequency axis stays clear of zero at 805 nm
    return make_grid(4096, 8192.0, 805.0)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(1024, 8192.0, 805.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
