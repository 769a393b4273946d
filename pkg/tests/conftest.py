import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rdars.channel import Scenario

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# lambda at 28 GHz, spelled out so tests do not lean on the package for it
LAM = 299_792_458.0 / 28e9


@pytest.fixture
def lam():
    return LAM


@pytest.fixture
def default_scenario():
    return Scenario(ue_positions=((10.0, 50.0, 2.0), (12.0, 47.0, 2.0), (7.0, 53.0, 2.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def grid(res):
    """Bin centres -1 + (2i - 1)/res, recomputed locally."""
    return np.array([-1.0 + (2 * i - 1) / res for i in range(1, res + 1)])
