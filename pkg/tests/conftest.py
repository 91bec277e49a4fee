import numpy as np
import pytest

from pdlab import Image, make_rng
from pdlab.synthdata import synthetic_scene


@pytest.fixture
def rng():
    return make_rng(1234)


@pytest.fixture
def scene(rng):
    return synthetic_scene(rng, 96, 96)


@pytest.fixture
def gray_scene(rng):
    return synthetic_scene(rng, 96, 96, channels=1)


def random_image(rng, h=32, w=32, c=3):
    return Image(rng.random((c, h, w), dtype=np.float32))
