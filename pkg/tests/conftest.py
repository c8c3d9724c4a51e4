import numpy as np
import pytest

from eiko.field import GridSpec, ScalarField, SourceSet


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_grid(n0=8, n1=8, origin=(0.0, 0.0), spacing=1.0):
    return GridSpec((n0, n1), origin, (spacing, spacing))


def make_field(grid, values):
    return ScalarField(grid, values)


@pytest.fixture
def grid8():
    return make_grid(8, 8)


@pytest.fixture
def center_source():
    def _make(grid):
        return SourceSet((grid.center_index(),))

    return _make
