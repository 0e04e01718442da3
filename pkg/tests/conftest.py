import numpy as np
import pytest

from hkreduce import coords


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def reduced_grid():
    return coords.default_reduced_grid(200, seed=3)


@pytest.fixture(scope="session")
def full_grid():
    return coords.default_full_grid(200, seed=3)


@pytest.fixture(scope="session")
def calabi_grid():
    return coords.default_calabi_grid(50, seed=0)
