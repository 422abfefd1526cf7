import math

import numpy as np
import pytest

from neuralbayes.errors import ConfigurationError, DomainError, ModelError
from neuralbayes.models.grf import GrfSpec, grf_covariance, grf_sample, grid_locations, matern, powered_exponential
from oracles import matern_bessel

LINE = ((0.0,), (1.0,), (3.0,))


def test_nugget_on_diagonal():
    spec = GrfSpec(LINE, family="powered-exponential", nugget=True)
    cov = grf_covariance(spec, [0.3, 1.0, 1.0])
    np.testing.assert_allclose(np.diag(cov), 1.09, rtol=0, atol=1e-15)


def test_matern_half_entry():
    spec = GrfSpec(LINE, family="matern", nu=0.5)
    cov = grf_covariance(spec, [2.0])
    assert cov[0, 1] == pytest.approx(0.6065306597, abs=1e-10)


def test_powered_exponential_ln2():
    assert powered_exponential(math.log(2), 1.0, 1.0) == pytest.approx(0.5, abs=1e-15)


def test_matern_half_equals_exponential():
    h = np.linspace(0, 5, 101)
    for lam in (0.2, 1.0, 3.5):
        np.testing.assert_allclose(matern(h, lam, 0.5), np.exp(-h / lam), rtol=1e-12, atol=0)


@pytest.mark.parametrize("nu", [0.5, 1.5, 2.5])
def test_closed_forms_match_bessel(nu):
    h = np.linspace(0.01, 4, 50)
    np.testing.assert_allclose(matern(h, 0.7, nu), matern_bessel(h, 0.7, nu), rtol=1e-10)


def test_general_nu_is_gated():
    with pytest.raises(ConfigurationError):
        GrfSpec(LINE, nu=1.2)
    spec = GrfSpec(LINE, nu=1.2, general_nu=True)
    h = np.array([0.5, 1.7])
    np.testing.assert_allclose(matern(h, 0.9, 1.2), matern_bessel(h, 0.9, 1.2), rtol=1e-10)
    assert spec.p == 1


def test_symmetric_and_pd_over_prior():
    spec = GrfSpec(grid_locations(3, 0.25), family="powered-exponential", nugget=True)
    rng = np.random.default_rng(0)
    for _ in range(50):
        theta = [rng.uniform(0, 1), rng.uniform(0.05, 2), rng.uniform(0.1, 1.9)]
        cov = grf_covariance(spec, theta)
        assert np.array_equal(cov, cov.T)
        np.linalg.cholesky(cov)


def test_needs_two_distinct_distances():
    with pytest.raises(ConfigurationError):
        GrfSpec(((0.0,), (1.0,)))
    with pytest.raises(ConfigurationError):
        GrfSpec(((0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)))


def test_bad_parameters():
    spec = GrfSpec(LINE, family="powered-exponential")
    with pytest.raises(DomainError):
        grf_covariance(spec, [1.0, 2.0])
    with pytest.raises(DomainError):
        grf_covariance(spec, [1.0])


def test_cholesky_failure_carries_theta():
    # near-duplicate locations with a huge range: numerically singular
    spec = GrfSpec(((0.0,), (1e-9,), (1.0,), (2.5,)), family="matern", nu=2.5)
    with pytest.raises(ModelError) as exc:
        grf_covariance(spec, [1e6])
    assert exc.value.theta is not None


def test_sample_shape_and_determinism():
    spec = GrfSpec(grid_locations(2, 0.1), family="matern", nu=1.5)
    a = grf_sample(spec, [0.2], 1, seed=3)
    assert a.shape == (1, 4)
    np.testing.assert_array_equal(grf_sample(spec, [0.2], 5, seed=3), grf_sample(spec, [0.2], 5, seed=3))


def test_empirical_covariance():
    spec = GrfSpec(grid_locations(2, 0.1), family="matern", nu=1.5)
    z = grf_sample(spec, [0.2], 20_000, seed=4)
    np.testing.assert_allclose(np.cov(z, rowvar=False), grf_covariance(spec, [0.2]), atol=0.05)
