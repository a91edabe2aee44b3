import numpy as np
import pytest

from flsolve.dense import RngStream


class FixedSampler:
    """Sampler stub returning a preset index sequence."""

    def __init__(self, *indices):
        self.indices = list(indices)
        self.pos = 0

    def sample(self, rng):
        i = self.indices[self.pos % len(self.indices)]
        self.pos += 1
        return i


class FixedUniformRng:
    """Rng stub whose random() walks a preset sequence of uniforms."""

    def __init__(self, *values):
        self.values = list(values)
        self.pos = 0

    def random(self):
        v = self.values[self.pos % len(self.values)]
        self.pos += 1
        return v


@pytest.fixture
def rng():
    return RngStream(12345)


@pytest.fixture
def np_rng():
    return np.random.default_rng(12345)
