import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_symplectic(rng, max_squeeze=1.0):
    def rot(t):
        return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])

    r = rng.uniform(-max_squeeze, max_squeeze)
    return rot(rng.uniform(0, 2 * np.pi)) @ np.diag([np.exp(r), np.exp(-r)]) @ rot(rng.uniform(0, 2 * np.pi))


def random_spd(rng, scale=2.0):
    q, _ = np.linalg.qr(rng.normal(size=(2, 2)))
    return q @ np.diag(rng.uniform(0.05, scale, size=2)) @ q.T
