import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from aperiodica import builtin, model_set_points, random_tiling, seq_to_delone

settings.register_profile(
    "default",
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

TAU = (1 + math.sqrt(5)) / 2


def integer_line(half: int):
    return seq_to_delone(("a" * half, "a" * half), {"a": 1.0})


@pytest.fixture(scope="session")
def fib():
    return builtin("fibonacci")


@pytest.fixture(scope="session")
def octa():
    return builtin("octagonal")


@pytest.fixture(scope="session")
def fib_2000(fib):
    return model_set_points(fib, 2000.0)


@pytest.fixture(scope="session")
def z_100():
    return integer_line(100)


@pytest.fixture(scope="session")
def rand_tiling():
    return random_tiling(3000, seed=11)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20261018)
