"""Shared fixtures: small grids and reproducible random data."""

import math

from collections.abc import Callable

import numpy as np
import pytest

from backend.stratsim.core.experiments import random_band_field
from backend.stratsim.core.numerics.model import SqgState
from backend.stratsim.core.numerics.model import VorticityState
from backend.stratsim.core.numerics.model import ZState
from backend.stratsim.core.numerics.spectral import GridSpec
from backend.stratsim.core.numerics.spectral import SpectralField
from backend.stratsim.core.numerics.spectral import forward_transform
from backend.stratsim.core.numerics.spectral import make_grid


@pytest.fixture
def grid() -> GridSpec:
    """32 x 32 lattice on the 2 pi box, integer frequencies."""
    return make_grid(32, 2.0 * math.pi)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return np.random.default_rng(20240607)


@pytest.fixture
def random_field(grid: GridSpec, rng: np.random.Generator) -> Callable[..., SpectralField]:
    """Factory of real, mean-zero, dealiased random fields on the fixture grid."""

    def factory(n_regularity: float = 1.0) -> SpectralField:
        return random_band_field(grid, rng, n_regularity=n_regularity)

    return factory


@pytest.fixture
def sampled(grid: GridSpec) -> Callable[[Callable], SpectralField]:
    """Factory transforming f(x1, x2) sampled on the fixture grid."""

    def factory(function: Callable) -> SpectralField:
        x1, x2 = grid.coordinates
        return forward_transform(function(x1, x2), grid)

    return factory


@pytest.fixture
def zstate(random_field: Callable[..., SpectralField]) -> ZState:
    """Random dispersive state."""
    return ZState(z_plus=random_field(), z_minus=random_field(), kappa=1.5)


@pytest.fixture
def vorticity_state(random_field: Callable[..., SpectralField]) -> VorticityState:
    """Random vorticity state."""
    return VorticityState(omega=random_field(), rho=random_field(), kappa=2.0)


@pytest.fixture
def sqg_state(random_field: Callable[..., SpectralField]) -> SqgState:
    """Random SQG state."""
    return SqgState(theta=random_field(), kappa=2.0)
