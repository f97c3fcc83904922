import math

import pytest

from phasespace.numerics import make_grid
from phasespace.states import OscillatorFrame


@pytest.fixture
def frame():
    return OscillatorFrame()


@pytest.fixture(scope='session')
def desk_grid():
    return make_grid(-8, 8, 512)


@pytest.fixture(scope='session')
def wide_grid():
    return make_grid(-12, 12, 512)


@pytest.fixture(scope='session')
def cat_grid():
    return make_grid(-16, 16, 512)


@pytest.fixture(scope='session')
def square_grid():
    # Δq = Δp, so rotations by multiples of π/2 move whole cells
    half = 0.5 * math.sqrt(2.0 * math.pi * 256)
    return make_grid(-half, half, 256)


@pytest.fixture(scope='session')
def small_grid():
    return make_grid(-7, 7, 128)
