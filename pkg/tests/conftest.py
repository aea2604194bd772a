import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=30)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def two_bumps(t, deriv=0):
    """Peak at 0.35 (width 0.08) plus a trough at 0.7 (width 0.12, depth 0.7)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for c, w, a in ((0.35, 0.08, 1.0), (0.7, 0.12, -0.7)):
        x = (t - c) / w
        g = a * np.exp(-0.5 * x * x)
        if deriv == 0:
            out += g
        elif deriv == 1:
            out += -x * g / w
        elif deriv == 2:
            out += (x * x - 1) * g / w ** 2
        else:
            out += (3 * x - x ** 3) * g / w ** 3
    return out
