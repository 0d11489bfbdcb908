import pytest

from lplab.grid import Grid, SpectrumProfile
from lplab.random_fields import random_scalar, random_solenoidal


@pytest.fixture(scope="session")
def grid8():
    return Grid(3, 8)


@pytest.fixture(scope="session")
def grid16():
    return Grid(3, 16)


@pytest.fixture(scope="session")
def grid32():
    return Grid(3, 32)


@pytest.fixture(scope="session")
def grid2d():
    return Grid(2, 32)


@pytest.fixture(scope="session")
def profile16():
    return SpectrumProfile(alpha=2.0, k_lo=1, k_hi=5)


@pytest.fixture
def u16(grid16, profile16):
    return random_solenoidal(grid16, profile16, seed=101)


@pytest.fixture
def scalar16(grid16, profile16):
    return random_scalar(grid16, profile16, seed=202)


def assert_close(a, b, rel, scale=None):
    scale = max(abs(a), abs(b)) if scale is None else scale
    assert abs(a - b) <= rel * scale, f"{a} vs {b} (rel {abs(a - b) / max(scale, 1e-300):.3e})"
