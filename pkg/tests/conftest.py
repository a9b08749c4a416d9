import numpy as np
import pytest


class ZeroNoise:
    """rng stand-in whose Gaussian draws are all zero."""

    def standard_normal(self, size=None):
        return np.zeros(size if size is not None else ())


@pytest.fixture
def zero_noise():
    return ZeroNoise()


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
