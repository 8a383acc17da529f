import numpy as np
import pytest

from sdelab import make_grid, preset_field


@pytest.fixture
def grid1d():
    return make_grid(1, (-4.0, 4.0), 512)


@pytest.fixture
def grid1d_periodic():
    return make_grid(1, (-4.0, 4.0), 512, periodic=True)


@pytest.fixture
def grid2d():
    return make_grid(2, ((-2.0, 2.0), (-3.0, 3.0)), 64)


@pytest.fixture
def ou_field(grid1d):
    return preset_field("ou", {}, grid1d)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
