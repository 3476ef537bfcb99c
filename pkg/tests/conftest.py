import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def central_difference_gradient(fn, x, rel_step=1e-6):
    """Independent derivative oracle: central differences with a step
    scaled by 1 + ||x||."""
    x = np.asarray(x, dtype=float)
    h = rel_step * (1.0 + float(np.linalg.norm(x)))
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2.0 * h)
    return g
