import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rrtperc.trees import RootedTree

# numba compiles on first call, so per-example deadlines are meaningless
settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def eleven_vertex_tree():
    """Tree on 0..10 whose marks {2, 3, 5, 10} give clusters
    {0,1,4,6}, {2}, {3,7,8}, {5,9}, {10}."""
    return RootedTree.from_parents([0, 0, 1, 1, 3, 0, 3, 7, 5, 8])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
