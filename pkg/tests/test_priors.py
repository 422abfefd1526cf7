import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuralbayes.errors import ConfigurationError
from neuralbayes.models.priors import Prior, sample_prior


def test_uniform_draws_in_support_and_reproducible():
    prior = Prior.uniform([0.0], [1.0])
    a = sample_prior(prior, 3, seed=11)
    assert a.shape == (3, 1)
    assert np.all((a > 0) & (a < 1))
    np.testing.assert_array_equal(a, sample_prior(prior, 3, seed=11))


def test_gaussian_moments():
    x = sample_prior(Prior.gaussian([0.0], [1.0]), 100_000, seed=1)[:, 0]
    assert abs(x.mean()) < 0.02
    assert abs(x.std() - 1) < 0.02


def test_uniform_mean():
    x = sample_prior(Prior.uniform([0.0], [1.0]), 100_000, seed=2)[:, 0]
    assert abs(x.mean() - 0.5) < 0.01


@pytest.mark.parametrize("lower, upper", [([1.0], [0.0]), ([0.0], [0.0]), ([0.0, 0.0], [1.0])])
def test_invalid_uniform(lower, upper):
    with pytest.raises(ConfigurationError):
        Prior.uniform(lower, upper)


def test_invalid_gaussian():
    with pytest.raises(ConfigurationError):
        Prior.gaussian([0.0], [0.0])


def test_n_must_be_positive():
    with pytest.raises(ConfigurationError):
        sample_prior(Prior.uniform([0.0], [1.0]), 0, seed=0)


def test_dict_roundtrip():
    for prior in (Prior.uniform([0.0, -1.0], [1.0, 2.0]), Prior.gaussian([0.5], [2.0])):
        assert Prior.from_dict(prior.to_dict()) == prior


@settings(max_examples=30, deadline=None)
@given(lo=st.floats(-5, 5), width=st.floats(0.01, 5), seed=st.integers(0, 2**31))
def test_uniform_support_property(lo, width, seed):
    prior = Prior.uniform([lo], [lo + width])
    x = sample_prior(prior, 50, seed)
    assert np.all(x >= lo) and np.all(x <= lo + width)
    assert all(prior.contains(t) for t in x)
