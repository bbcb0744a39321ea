import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_symmetric(rng, p, scale=1.0):
    a = rng.standard_normal((p, p)) * scale
    return (a + a.T) / 2.0


def random_spd(rng, p):
    g = rng.standard_normal((p, p))
    return g @ g.T / p + 0.1 * np.eye(p)
