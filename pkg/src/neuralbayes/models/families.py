"""Uniform model interface used by the estimation pipeline."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DomainError
from .grf import GrfSpec, grf_sample
from .maxstable import (
    BrownResnickSpec,
    brown_resnick_sample,
    logistic_logdensity,
    logistic_sample,
)
from .priors import Prior


@dataclass(frozen=True)
class LinearGaussianModel:
    """``Z^j ~ N(theta, sigma^2)`` with scalar ``theta``."""

    sigma: float = 1.0
    name = "linear-gaussian"
    d = 1
    p = 1

    def sample(self, theta, m, rng):
        return float(np.asarray(theta).reshape(-1)[0]) + self.sigma * rng.standard_normal((m, 1))

    def to_dict(self):
        return {"family": self.name, "sigma": self.sigma}


@dataclass(frozen=True)
class GaussianFieldModel:
    spec: GrfSpec
    name = "gaussian-field"

    @property
    def d(self):
        return self.spec.d

    @property
    def p(self):
        return self.spec.p

    def sample(self, theta, m, rng):
        return grf_sample(self.spec, theta, m, rng)

    def to_dict(self):
        s = self.spec
        return {"family": s.family, "locations": [list(x) for x in s.locations],
                "nu": s.nu, "nugget": s.nugget, "general_nu": s.general_nu}


@dataclass(frozen=True)
class LogisticModel:
    d: int = 5
    name = "logistic"
    p = 1

    def sample(self, theta, m, rng):
        return logistic_sample(self.d, float(np.asarray(theta).reshape(-1)[0]), m, rng)

    def logdensity(self, z, theta):
        return logistic_logdensity(z, theta)

    def to_dict(self):
        return {"family": self.name, "d": self.d}


@dataclass(frozen=True)
class BrownResnickModel:
    spec: BrownResnickSpec
    name = "brown-resnick"
    p = 2

    @property
    def d(self):
        return self.spec.d

    def sample(self, theta, m, rng):
        return brown_resnick_sample(self.spec, theta, m, rng)

    def to_dict(self):
        return {"family": self.name, "locations": [list(x) for x in self.spec.locations]}


def _points(locations):
    arr = np.asarray(locations, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return tuple(map(tuple, arr))


def model_from_config(cfg):
    """Build ``(model, prior)`` from a config mapping.

    Keys: ``family`` (linear-gaussian | powered-exponential | matern |
    logistic | brown-resnick), ``locations``, ``nu``, ``nugget``, ``d``,
    ``sigma`` and a ``prior`` mapping (see ``Prior.from_dict``).
    """
    family = cfg.get("family")
    try:
        if family == "linear-gaussian":
            model = LinearGaussianModel(sigma=float(cfg.get("sigma", 1.0)))
        elif family in ("powered-exponential", "matern"):
            model = GaussianFieldModel(GrfSpec(
                locations=_points(cfg["locations"]),
                family=family, nu=float(cfg.get("nu", 1.5)),
                nugget=bool(cfg.get("nugget", False)),
                general_nu=bool(cfg.get("general_nu", False))))
        elif family == "logistic":
            model = LogisticModel(d=int(cfg.get("d", 5)))
        elif family == "brown-resnick":
            model = BrownResnickModel(BrownResnickSpec(_points(cfg["locations"])))
        else:
            raise ConfigurationError(f"unknown model family {family!r}")
    except (KeyError, TypeError, DomainError) as exc:
        raise ConfigurationError(f"bad model config: {exc}") from exc
    prior = Prior.from_dict(cfg.get("prior", {"kind": "uniform", "lower": [0.0], "upper": [1.0]}))
    if prior.p != model.p:
        raise ConfigurationError(f"prior has {prior.p} parameters, model needs {model.p}")
    return model, prior
