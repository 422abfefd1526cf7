from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from ..rng import as_generator


@dataclass(frozen=True)
class Prior:
    """Prior on the parameter vector.

    ``kind`` is ``"uniform"`` (box ``[lower, upper]``) or ``"gaussian"``
    (independent normals with ``mean`` and ``stdev``).
    """

    kind: str
    lower: tuple = ()
    upper: tuple = ()
    mean: tuple = ()
    stdev: tuple = ()

    def __post_init__(self):
        if self.kind == "uniform":
            lo = np.asarray(self.lower, dtype=float)
            hi = np.asarray(self.upper, dtype=float)
            if lo.ndim != 1 or lo.shape != hi.shape or lo.size == 0:
                raise ConfigurationError("uniform prior needs matching non-empty bounds")
            if not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
                raise ConfigurationError("uniform prior must have a compact support")
            if not np.all(lo < hi):
                raise ConfigurationError(f"uniform prior needs lower < upper, got {lo} and {hi}")
        elif self.kind == "gaussian":
            mu = np.asarray(self.mean, dtype=float)
            sd = np.asarray(self.stdev, dtype=float)
            if mu.ndim != 1 or mu.shape != sd.shape or mu.size == 0:
                raise ConfigurationError("gaussian prior needs matching non-empty mean/stdev")
            if not np.all(sd > 0):
                raise ConfigurationError("gaussian prior needs stdev > 0")
        else:
            raise ConfigurationError(f"unknown prior kind {self.kind!r}")

    @classmethod
    def uniform(cls, lower, upper):
        return cls("uniform", lower=tuple(np.atleast_1d(lower).astype(float)),
                   upper=tuple(np.atleast_1d(upper).astype(float)))

    @classmethod
    def gaussian(cls, mean, stdev):
        return cls("gaussian", mean=tuple(np.atleast_1d(mean).astype(float)),
                   stdev=tuple(np.atleast_1d(stdev).astype(float)))

    @property
    def p(self):
        return len(self.lower) if self.kind == "uniform" else len(self.mean)

    @property
    def prior_mean(self):
        if self.kind == "uniform":
            return 0.5 * (np.asarray(self.lower) + np.asarray(self.upper))
        return np.asarray(self.mean, dtype=float)

    @property
    def prior_variance(self):
        """Per-coordinate variance; the risk of the constant prior-mean predictor."""
        if self.kind == "uniform":
            return (np.asarray(self.upper) - np.asarray(self.lower)) ** 2 / 12.0
        return np.asarray(self.stdev, dtype=float) ** 2

    def contains(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "gaussian":
            return np.all(np.isfinite(theta), axis=-1)
        return np.all((theta >= self.lower) & (theta <= self.upper), axis=-1)

    def draw(self, rng, size=None):
        """Draw from the prior with an existing generator.

        Returns shape ``(p,)`` when ``size`` is None else ``(size, p)``.
        """
        shape = (self.p,) if size is None else (size, self.p)
        if self.kind == "uniform":
            lo = np.asarray(self.lower)
            hi = np.asarray(self.upper)
            return lo + (hi - lo) * rng.random(shape)
        return np.asarray(self.mean) + np.asarray(self.stdev) * rng.standard_normal(shape)

    def to_dict(self):
        if self.kind == "uniform":
            return {"kind": "uniform", "lower": list(self.lower), "upper": list(self.upper)}
        return {"kind": "gaussian", "mean": list(self.mean), "stdev": list(self.stdev)}

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind")
        if kind == "uniform":
            return cls.uniform(d["lower"], d["upper"])
        if kind == "gaussian":
            return cls.gaussian(d["mean"], d["stdev"])
        raise ConfigurationError(f"unknown prior kind {kind!r}")


def sample_prior(prior, n, seed):
    """Draw ``n`` i.i.d. parameter vectors, shape ``(n, p)``."""
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    return prior.draw(as_generator(seed), size=n)
