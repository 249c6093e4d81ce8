import numpy as np
import pytest

from oscoal.ho1d import OscParams


@pytest.fixture
def params():
    """Matched-scale defaults: nu = 1, delta = 1/2 (zeta = 1), hbar = 1."""
    return OscParams(nu=1.0, delta=0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240815)


def random_rotation(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
