import numpy as np
import pytest

from fica import SignalSample, fit_coefficients, make_basis


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def cubic_basis():
    return make_basis((0.0, 1.0), 12, 4)


def smooth_rough_sample(seed, n=24, m=300, noise=0.8):
    """Band-limited random curves plus white noise on a shared grid."""
    rng = np.random.default_rng(seed)
    ts = np.linspace(0.0, 1.0, m)
    X = np.zeros((n, m))
    for k in range(1, 5):
        amp = rng.standard_normal(n)[:, None] / k
        phase = rng.uniform(0, 2 * np.pi, (n, 1))
        X += amp * np.sin(2 * np.pi * k * ts[None, :] + phase)
    X += noise * rng.standard_normal((n, m))
    return SignalSample.from_matrix(X, times=ts)


@pytest.fixture
def fitted_expansion(cubic_basis):
    sample = smooth_rough_sample(7)
    return fit_coefficients(sample, cubic_basis, center=True)
