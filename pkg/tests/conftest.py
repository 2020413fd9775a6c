import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def square():
    from rbfmix.geometry import unit_square
    return unit_square()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
