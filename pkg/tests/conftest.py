import numpy as np
import pytest

from freudgrid.interp1d import DyadicFamily
from freudgrid.orthopoly import build_recurrence
from freudgrid.spectral import build_spectral_table
from freudgrid.weights import WeightSpec


@pytest.fixture(scope="session")
def hermite():
    return WeightSpec.hermite()


@pytest.fixture(scope="session")
def quartic():
    return WeightSpec.quartic()


@pytest.fixture(scope="session")
def hermite_table(hermite):
    return build_recurrence(hermite, 80)


@pytest.fixture(scope="session")
def quartic_table(quartic):
    return build_recurrence(quartic, 80)


@pytest.fixture(scope="session")
def hermite_spectral(hermite):
    return build_spectral_table(hermite, 120)


@pytest.fixture(scope="session")
def quartic_spectral(quartic):
    return build_spectral_table(quartic, 120)


@pytest.fixture(scope="session")
def hermite_family(hermite_table):
    return DyadicFamily(hermite_table, rho=0.9)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260826)
