import numpy as np
import pytest

from v2vzones.scenario import build_manhattan_grid


@pytest.fixture(scope="session")
def grid():
    return build_manhattan_grid()


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
