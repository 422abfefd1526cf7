"""Max-stable models with unit Fréchet margins.

Logistic model
    CDF ``exp(-(sum_j z_j^(-1/theta))^theta)``, exact sampling through a
    positive-stable mixture, and the full density as a sum over set partitions.
Brown-Resnick process
    Log-Gaussian spectral functions ``exp(V(s) - gamma(s))`` with
    semivariogram ``gamma(h) = c * |h|^alpha`` (so ``Var V(s) = 2 gamma(s)``),
    simulated exactly with the extremal-functions algorithm.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, ModelError, UnsupportedDimensionError
from ..rng import as_generator
from .partitions import MAX_DIM, block_profiles

Z_FLOOR = 1e-12


def _check_theta(theta, allow_one=False):
    theta = np.asarray(theta, dtype=float)
    upper_ok = theta <= 1 if allow_one else theta < 1
    if not np.all((theta > 0) & upper_ok):
        raise DomainError(f"logistic dependence parameter must lie in (0, 1), got {theta}")
    return theta


def _log_t(logz, theta):
    """log(sum_j z_j^(-1/theta)) computed stably along the last axis."""
    a = -logz / theta[..., None]
    amax = a.max(axis=-1)
    s = np.zeros_like(amax)
    for j in range(a.shape[-1]):
        s = s + np.exp(a[..., j] - amax)
    return amax + np.log(s)


def logistic_cdf(z, theta):
    """Joint CDF of the logistic model; ``z`` has coordinates on the last axis."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("logistic CDF needs strictly positive arguments")
    theta = _check_theta(theta, allow_one=True)
    logz = np.log(np.maximum(z, Z_FLOOR))
    return np.exp(-np.exp(theta * _log_t(logz, np.broadcast_to(theta, logz.shape[:-1]))))


def _log_block_coef(k, theta):
    # log prod_{i=1}^{k-1} (i - theta) / theta
    out = np.zeros_like(theta)
    for i in range(1, k):
        out = out + np.log(i - theta) - np.log(theta)
    return out


def logistic_logdensity(z, theta):
    """Log-density of the logistic model.

    Uses ``p(z) = exp(-V) * sum_P prod_{b in P} (-d_b V)`` over all set
    partitions ``P`` of the coordinates.  For block ``b`` of size ``k``::

        -d_b V = T^(theta - k) * prod_{j in b} z_j^(-1/theta - 1)
                 * prod_{i=1}^{k-1} (i - theta) / theta

    with ``T = sum_j z_j^(-1/theta)``.  The ``z`` product over all blocks is
    the same for every partition, so the sum collapses onto block-size
    profiles, which are taken from the restricted-growth enumeration.
    Everything is evaluated in log space.

    ``z`` has shape ``(..., d)`` and ``theta`` broadcasts against ``z.shape[:-1]``.
    """
    z = np.asarray(z, dtype=float)
    d = z.shape[-1]
    if d > MAX_DIM:
        raise UnsupportedDimensionError(f"logistic density supports d <= {MAX_DIM}, got {d}")
    if np.any(z <= 0):
        raise DomainError("logistic density needs strictly positive arguments")
    theta = _check_theta(theta, allow_one=True)
    logz = np.log(np.maximum(z, Z_FLOOR))
    shape = np.broadcast_shapes(logz.shape[:-1], theta.shape)
    logz = np.broadcast_to(logz, shape + (d,))
    theta = np.broadcast_to(theta, shape)

    log_t = _log_t(logz, theta)
    sum_logz = np.zeros(shape)
    for j in range(d):
        sum_logz = sum_logz + logz[..., j]
    base = -np.exp(theta * log_t) - (1.0 / theta + 1.0) * sum_logz - d * log_t

    terms = []
    for sizes, count in block_profiles(d):
        t = math.log(count) + len(sizes) * theta * log_t
        for k in sizes:
            t = t + _log_block_coef(k, theta)
        terms.append(t)
    tmax = terms[0]
    for t in terms[1:]:
        tmax = np.maximum(tmax, t)
    acc = np.zeros(shape)
    for t in terms:
        acc = acc + np.exp(t - tmax)
    return base + tmax + np.log(acc)


def log_positive_stable(alpha, size, seed):
    """Logarithm of positive alpha-stable variables (Laplace transform ``exp(-s^alpha)``).

    Kanter's representation with ``U ~ Unif(0, pi)`` and ``E ~ Exp(1)``::

        S = sin(alpha U) / sin(U)^(1/alpha) * (sin((1 - alpha) U) / E)^((1 - alpha) / alpha)

    evaluated in log space; for small ``alpha`` the factors under/overflow.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"stable index must lie in (0, 1), got {alpha}")
    rng = as_generator(seed)
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    return (np.log(np.sin(alpha * u)) - np.log(np.sin(u)) / alpha
            + (1.0 - alpha) / alpha * (np.log(np.sin((1.0 - alpha) * u)) - np.log(e)))


def positive_stable(alpha, size, seed):
    return np.exp(log_positive_stable(alpha, size, seed))


def logistic_sample(d, theta, m, seed):
    """``m`` exact draws from the ``d``-variate logistic model, shape ``(m, d)``.

    ``Z_j = (S / E_j)^theta`` with ``S`` positive theta-stable and ``E_j``
    i.i.d. unit exponential.
    """
    if d < 1:
        raise DomainError("dimension must be >= 1")
    theta = float(theta)
    _check_theta(theta)
    rng = as_generator(seed)
    log_s = log_positive_stable(theta, m, rng)
    e = rng.standard_exponential((m, d))
    return np.exp(theta * (log_s[:, None] - np.log(e)))


# --------------------------------------------------------------------------
# Brown-Resnick


@dataclass(frozen=True)
class BrownResnickSpec:
    locations: tuple

    def __post_init__(self):
        locs = np.asarray(self.locations, dtype=float)
        if locs.ndim == 1:
            locs = locs[:, None]
        object.__setattr__(self, "locations", tuple(map(tuple, locs)))

    @property
    def d(self):
        return len(self.locations)

    p = 2


def semivariogram(h, c, alpha):
    return c * np.asarray(h, dtype=float) ** alpha


def _check_br_theta(theta):
    c, alpha = np.asarray(theta, dtype=float)
    if not (c > 0 and 0 < alpha < 2):
        raise DomainError(f"Brown-Resnick needs c > 0 and alpha in (0, 2), got {theta}")
    return c, alpha


def _anchored_factor(locs, anchor, c, alpha, theta):
    """Cholesky factor of V(s - anchor) at all locations where it is non-degenerate.

    Returns ``(free, chol, shift)``: indices with positive variance, their
    lower factor, and ``gamma(s - anchor)`` at every location.
    """
    g = semivariogram(np.linalg.norm(locs - anchor, axis=1), c, alpha)
    free = np.flatnonzero(g > 0)
    sub = locs[free]
    gij = semivariogram(np.linalg.norm(sub[:, None, :] - sub[None, :, :], axis=-1), c, alpha)
    cov = g[free][:, None] + g[free][None, :] - gij
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ModelError("degenerate Brown-Resnick covariance (duplicate locations?)",
                         theta=theta) from None
    return free, chol, g


def _spectral_draws(factor, d, n, rng):
    free, chol, shift = factor
    v = np.zeros((n, d))
    v[:, free] = rng.standard_normal((n, free.size)) @ chol.T
    return np.exp(v - shift)


def brown_resnick_spectral(spec, theta, n, seed, anchor=None):
    """``n`` draws of the spectral function at the locations.

    ``anchor=None`` gives ``Y(s) = exp(V(s) - gamma(s))`` with ``V(0) = 0``;
    an integer ``k`` gives the law of the extremal function rooted at
    location ``k`` (``Y(s_k) = 1``).
    """
    c, alpha = _check_br_theta(theta)
    locs = np.asarray(spec.locations)
    point = np.zeros(locs.shape[1]) if anchor is None else locs[anchor]
    factor = _anchored_factor(locs, point, c, alpha, theta)
    return _spectral_draws(factor, spec.d, n, as_generator(seed))


def brown_resnick_sample(spec, theta, m, seed):
    """``m`` exact draws of the process at ``spec.locations``, shape ``(m, d)``.

    Extremal-functions algorithm: for each location in turn, Poisson points
    ``zeta`` are generated in decreasing order and extremal functions rooted at
    that location are added while they can still exceed the current value
    there; a candidate is kept only if it does not exceed the running maximum
    at the locations already processed.
    """
    c, alpha = _check_br_theta(theta)
    locs = np.asarray(spec.locations)
    d = spec.d
    factors = [_anchored_factor(locs, locs[k], c, alpha, theta) for k in range(d)]
    if any(f[0].size != d - 1 for f in factors):
        raise ModelError("duplicate Brown-Resnick locations", theta=theta)
    rng = as_generator(seed)
    out = np.empty((m, d))
    for r in range(m):
        z = np.zeros(d)
        for k in range(d):
            e = rng.standard_exponential()
            zeta = 1.0 / e
            while zeta > z[k]:
                y = _spectral_draws(factors[k], d, 1, rng)[0]
                if k == 0 or np.all(zeta * y[:k] < z[:k]):
                    np.maximum(z, zeta * y, out=z)
                e += rng.standard_exponential()
                zeta = 1.0 / e
        out[r] = z
    return out
