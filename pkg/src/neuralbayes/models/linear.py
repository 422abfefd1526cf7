import numpy as np

from ..errors import ConfigurationError
from ..rng import stream


def linear_gaussian_sample(mu, gamma, sigma, m, n, seed):
    """Training pairs for the normal-mean model with a normal prior.

    Returns ``(z, theta)`` with shapes ``(n, m)`` and ``(n, 1)``:
    ``theta ~ N(mu, gamma^2)`` and ``z_j | theta ~ N(theta, sigma^2)``.
    Record ``i`` uses its own stream so the result does not depend on how
    records are batched.
    """
    if not (gamma > 0 and sigma > 0):
        raise ConfigurationError("gamma and sigma must be positive")
    if m < 1 or n < 1:
        raise ConfigurationError("m and n must be >= 1")
    z = np.empty((n, m))
    theta = np.empty((n, 1))
    for i in range(n):
        rng = stream(seed, "linear-gaussian", i)
        t = mu + gamma * rng.standard_normal()
        theta[i, 0] = t
        z[i] = t + sigma * rng.standard_normal(m)
    return z, theta
