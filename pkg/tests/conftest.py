import numpy as np
import pytest

from steklov.conformal import band_coefficients, rfe_map
from steklov.disk import solve_disk


@pytest.fixture(scope="session")
def rfe():
    return rfe_map(0.8, 20)


@pytest.fixture(scope="session")
def rfe_spectrum(rfe):
    return solve_disk(band_coefficients(rfe))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
