import pytest

from horopoisson.builtins import gaussian
from horopoisson.field import SpectralGrid


@pytest.fixture(scope="session")
def grid1():
    return SpectralGrid(1, 16.0, 1024)


@pytest.fixture(scope="session")
def grid1_fine():
    return SpectralGrid(1, 16.0, 4096)


@pytest.fixture(scope="session")
def grid2():
    return SpectralGrid(2, 16.0, 128)


@pytest.fixture(scope="session")
def gauss1(grid1):
    return gaussian(grid1)


@pytest.fixture(scope="session")
def gauss1_fine(grid1_fine):
    return gaussian(grid1_fine)
