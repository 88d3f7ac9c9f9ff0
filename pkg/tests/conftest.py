import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qhjlab.schrodinger import Grid, free, harmonic, linear, solve_basis

settings.register_profile(
    "qhjlab", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qhjlab")


@pytest.fixture(scope="session")
def free_grid():
    return Grid.from_spacing(-10.0, 10.0, 1e-3)


@pytest.fixture(scope="session")
def harmonic_grid():
    return Grid.from_spacing(-4.0, 4.0, 1e-3)


@pytest.fixture(scope="session")
def free_basis(free_grid):
    return solve_basis(free(), 0.5, free_grid)


@pytest.fixture(scope="session")
def harmonic_basis(harmonic_grid):
    return solve_basis(harmonic(), 0.5, harmonic_grid)


@pytest.fixture(scope="session")
def linear_basis():
    return solve_basis(linear(), 0.3, Grid.from_spacing(-5.0, 5.0, 1e-3))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
