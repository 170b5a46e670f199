import numpy as np
import pytest

from cycleagg.instances import Graph


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    return Graph.cycle(3)


@pytest.fixture
def c5():
    return Graph.cycle(5)
