import numpy as np
import pytest

from hhsimplex import make_simplex


@pytest.fixture
def unit2():
    return make_simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def interval():
    return make_simplex([[-1.0], [1.0]])


@pytest.fixture
def unit3():
    return make_simplex(np.vstack([np.zeros(3), np.eye(3)]))


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))
