import numpy as np
import pytest

from app.critical import CriticalLocator, critical_locator


@pytest.fixture(scope="module")
def locator():
    """A fresh locator (empty continuation cache) per test module"""
    return CriticalLocator()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def tau_infinity():
    return critical_locator.find_tau_infinity().tau


@pytest.fixture
def random_taus(rng):
    def draw(count, im=(0.8, 3.0)):
        re = rng.uniform(0.0, 1.0, count)
        ims = rng.uniform(im[0], im[1], count)
        return [complex(x, y) for x, y in zip(re, ims)]
    return draw
