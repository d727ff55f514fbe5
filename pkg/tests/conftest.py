import numpy as np
import pytest

from cqnls.dynamics import StepperConfig, evolve
from cqnls.grid import RadialField, RadialGrid
from cqnls.variational import thresholds


@pytest.fixture(scope="session")
def grid64():
    return RadialGrid(64.0, 2**12 - 1)


@pytest.fixture(scope="session")
def grid128():
    return RadialGrid(128.0, 2**13 - 1)


@pytest.fixture(scope="session")
def grid_default():
    return RadialGrid(256.0, 2**14 - 1)


@pytest.fixture(scope="session")
def grid_bubble():
    """Fine grid for integrals of the slowly decaying bubble (r^-4 tails)."""
    return RadialGrid(4096.0, 2**16 - 1)


@pytest.fixture(scope="session")
def th1024():
    return thresholds(RadialGrid(1024.0, 2**16))


def gaussian(grid, amplitude=1.0, width=1.0):
    return RadialField(grid, amplitude * np.exp(-((grid.nodes / width) ** 2)).astype(complex))


def random_smooth_field(grid, rng, n_bumps=3, max_amp=1.0, chirp=True):
    r = grid.nodes
    vals = np.zeros(grid.n, dtype=complex)
    for _ in range(rng.integers(1, n_bumps + 1)):
        amp = rng.uniform(0.1, max_amp) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        width = rng.uniform(0.5, 4.0)
        vals += amp * np.exp(-((r / width) ** 2)) * (1 + rng.uniform(0, 2) * (r / width) ** 2)
    if chirp and rng.uniform() < 0.5:
        vals *= np.exp(1j * rng.uniform(-0.5, 0.5) * r**2)
    return RadialField(grid, vals)


@pytest.fixture(scope="session")
def kplus_run():
    """Amplitude-0.1 gaussian, dt = 1e-3, T = 10, sponge off (shared by several tests)."""
    grid = RadialGrid(128.0, 2**13 - 1)
    u0 = gaussian(grid, amplitude=0.1)
    cfg = StepperConfig(dt=1e-3, t_end=10.0, snapshot_stride=2000, sponge=False)
    traj, outcome = evolve(u0, cfg)
    return u0, cfg, traj, outcome
