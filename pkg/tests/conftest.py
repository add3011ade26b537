import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def profile3():
    """Three-intersection shrinker profile at J = 512 (about 8 s to find)."""
    from axismcf.shrinker import find_profile
    return find_profile(3, J=512)
