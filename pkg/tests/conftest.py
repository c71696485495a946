import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def digit_like_image():
    """A sharp synthetic image with a few bright rectangles on black."""
    image = np.zeros((28, 28))
    image[4:12, 6:10] = 1.0
    image[14:24, 12:22] = 0.6
    image[8:10, 16:26] = 0.9
    return image
