import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from surromod.design import DesignSpace, Parameter
from surromod.simulator import default_space, generate_dataset

settings.register_profile(
    "repo", deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def space2d() -> DesignSpace:
    return DesignSpace((Parameter("a", 0.0, 1.0, "m"),
                        Parameter("b", -2.0, 3.0)))


@pytest.fixture(scope="session")
def sim_train():
    """Small simulator dataset shared by model tests."""
    return generate_dataset(default_space(), 120, seed=11)


@pytest.fixture(scope="session")
def sim_test():
    return generate_dataset(default_space(), 50, seed=12)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
