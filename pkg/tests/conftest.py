import numpy as np
import pytest

from scalesteg import PixelGrid


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


@pytest.fixture
def cover128(rng):
    return PixelGrid(rng.integers(0, 256, size=(128, 128), dtype=np.uint8))


@pytest.fixture
def cover64(rng):
    return PixelGrid(rng.integers(0, 256, size=(64, 64), dtype=np.uint8))
