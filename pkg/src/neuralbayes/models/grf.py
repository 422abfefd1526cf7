"""Zero-mean isotropic Gaussian random fields observed at fixed locations."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..errors import ConfigurationError, DomainError, ModelError
from ..rng import as_generator

FAMILIES = ("powered-exponential", "matern")
_HALF_INTEGER_NU = (0.5, 1.5, 2.5)


@dataclass(frozen=True)
class GrfSpec:
    """Locations, covariance family and parameter layout.

    Parameter vector layout: ``(tau, lam, alpha)`` for powered exponential and
    ``(tau, lam)`` for Matérn, with ``tau`` dropped when ``nugget`` is False.
    Matérn smoothness ``nu`` is fixed; values other than 1/2, 3/2, 5/2 need
    ``general_nu=True`` (Bessel-K evaluation).
    """

    locations: tuple
    family: str = "matern"
    nu: float = 1.5
    nugget: bool = False
    general_nu: bool = False

    def __post_init__(self):
        locs = np.asarray(self.locations, dtype=float)
        if locs.ndim == 1:
            locs = locs[:, None]
        object.__setattr__(self, "locations", tuple(map(tuple, locs)))
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown covariance family {self.family!r}")
        if self.family == "matern":
            if self.nu <= 0:
                raise ConfigurationError("Matérn smoothness must be positive")
            if self.nu not in _HALF_INTEGER_NU and not self.general_nu:
                raise ConfigurationError(
                    f"nu={self.nu} needs general_nu=True (only 1/2, 3/2, 5/2 have closed forms)")
        dist = np.unique(np.round(pdist(locs), 12))
        if np.count_nonzero(dist > 0) < 2:
            raise ConfigurationError("locations need at least two distinct non-zero distances")

    @property
    def d(self):
        return len(self.locations)

    @property
    def p(self):
        base = 2 if self.family == "powered-exponential" else 1
        return base + int(self.nugget)

    def distances(self):
        return squareform(pdist(np.asarray(self.locations)))

    def unpack(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.p,):
            raise DomainError(f"expected {self.p} parameters, got shape {theta.shape}")
        tau = 0.0
        if self.nugget:
            tau, theta = theta[0], theta[1:]
        if self.family == "powered-exponential":
            lam, alpha = theta
            if not (lam > 0 and 0 < alpha < 2):
                raise DomainError(f"powered exponential needs lam > 0, alpha in (0, 2): {theta}")
            return tau, {"lam": lam, "alpha": alpha}
        (lam,) = theta
        if not lam > 0:
            raise DomainError(f"Matérn range must be positive, got {lam}")
        return tau, {"lam": lam}


def powered_exponential(h, lam, alpha):
    return np.exp(-((np.asarray(h, dtype=float) / lam) ** alpha))


def matern(h, lam, nu):
    """Matérn correlation with the sqrt(2 nu) h / lam scaling."""
    h = np.asarray(h, dtype=float)
    r = np.sqrt(2.0 * nu) * h / lam
    if nu == 0.5:
        return np.exp(-r)
    if nu == 1.5:
        return (1.0 + r) * np.exp(-r)
    if nu == 2.5:
        return (1.0 + r + r * r / 3.0) * np.exp(-r)
    from scipy.special import gamma, kv

    out = np.ones_like(r)
    pos = r > 0
    rp = r[pos]
    out[pos] = 2.0 ** (1.0 - nu) / gamma(nu) * rp ** nu * kv(nu, rp)
    return out


def correlation(spec, h, params):
    if spec.family == "powered-exponential":
        return powered_exponential(h, params["lam"], params["alpha"])
    return matern(h, params["lam"], spec.nu)


def grf_covariance(spec, theta):
    """Covariance matrix of the field at ``spec.locations``.

    Built from the upper triangle and mirrored, so it is exactly symmetric.
    Raises ModelError if the matrix is not numerically positive definite.
    """
    tau, params = spec.unpack(theta)
    h = spec.distances()
    iu = np.triu_indices(spec.d, k=1)
    cov = np.zeros((spec.d, spec.d))
    upper = correlation(spec, h[iu], params)
    cov[iu] = upper
    cov = cov + cov.T
    np.fill_diagonal(cov, 1.0 + tau * tau)
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ModelError(f"covariance not positive definite at theta={theta}", theta=theta) from None
    return cov


def grf_sample(spec, theta, m, seed):
    """``m`` i.i.d. draws of the field, shape ``(m, d)``.

    Rows are ``L @ eps`` with ``L`` the lower Cholesky factor of the covariance.
    """
    cov = grf_covariance(spec, theta)
    chol = np.linalg.cholesky(cov)
    eps = as_generator(seed).standard_normal((m, spec.d))
    return eps @ chol.T


def grid_locations(n_side, spacing=1.0, k=2):
    """Regular grid with ``n_side**k`` points."""
    axes = [np.arange(n_side) * spacing] * k
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)
