import numpy as np
import pytest

from kgpoint import Grid, OscillatorModel
from kgpoint.solitary import SolitaryWave


@pytest.fixture(scope="session")
def cubic_model():
    """The standard strictly nonlinear example: U = -|psi|^2 + |psi|^4, m = 1."""
    return OscillatorModel.polynomial(1.0, (0.0, -1.0, 1.0))


@pytest.fixture(scope="session")
def linear_model():
    return OscillatorModel.linear(1.0, 1.0)


@pytest.fixture(scope="session")
def half_wave(cubic_model):
    """The C = 0.5 solitary wave: kappa = 1/2, omega = sqrt(3)/2."""
    return SolitaryWave(0.5, 0.0, 0.5, float(np.sqrt(0.75)))


@pytest.fixture(scope="session")
def small_grid():
    return Grid(half_extent=40.0, n_points=4097)
