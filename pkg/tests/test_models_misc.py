import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuralbayes.errors import ConfigurationError
from neuralbayes.models import io
from neuralbayes.models.families import (
    BrownResnickModel,
    GaussianFieldModel,
    LinearGaussianModel,
    LogisticModel,
    model_from_config,
)
from neuralbayes.models.linear import linear_gaussian_sample
from oracles import FROZEN


class TestLinearSampler:
    def test_moments(self):
        z, theta = linear_gaussian_sample(0.0, 1.0, 1.0, 1, 100_000, seed=1)
        assert abs(z.var() - 2.0) < 0.05
        assert abs(np.corrcoef(z[:, 0], theta[:, 0])[0, 1] - FROZEN["linear_corr_m1"]) < 0.01

    def test_shapes_and_determinism(self):
        z, theta = linear_gaussian_sample(1.0, 2.0, 0.5, 3, 7, seed=4)
        assert z.shape == (7, 3) and theta.shape == (7, 1)
        z2, theta2 = linear_gaussian_sample(1.0, 2.0, 0.5, 3, 7, seed=4)
        np.testing.assert_array_equal(z, z2)
        np.testing.assert_array_equal(theta, theta2)

    def test_prefix_stable(self):
        # per-record streams: the first rows do not depend on n
        z_small, _ = linear_gaussian_sample(0.0, 1.0, 1.0, 2, 5, seed=4)
        z_big, _ = linear_gaussian_sample(0.0, 1.0, 1.0, 2, 50, seed=4)
        np.testing.assert_array_equal(z_small, z_big[:5])

    @pytest.mark.parametrize("gamma, sigma", [(0.0, 1.0), (1.0, -1.0)])
    def test_validation(self, gamma, sigma):
        with pytest.raises(ConfigurationError):
            linear_gaussian_sample(0.0, gamma, sigma, 1, 1, seed=0)


class TestIo:
    def test_binary_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        theta, z = rng.random((6, 2)), rng.random((6, 12))
        io.write_binary(tmp_path / "a.bin", theta, z, d=4, m=3, seed=17)
        raw = io.read_binary(tmp_path / "a.bin")
        assert (raw["d"], raw["m"], raw["N"], raw["p"], raw["seed"]) == (4, 3, 6, 2, 17)
        np.testing.assert_array_equal(raw["theta"], theta)
        np.testing.assert_array_equal(raw["z"], z)

    def test_header_layout(self, tmp_path):
        io.write_binary(tmp_path / "a.bin", np.zeros((1, 1)), np.ones((1, 2)), d=2, m=1, seed=5)
        blob = (tmp_path / "a.bin").read_bytes()
        assert blob[:5] == b"NEBL1"
        assert np.frombuffer(blob[5:45], dtype="<i8").tolist() == [2, 1, 1, 1, 5]
        assert len(blob) == 5 + 40 + 8 * 3

    def test_bad_magic_and_trailing_bytes(self, tmp_path):
        path = tmp_path / "a.bin"
        path.write_bytes(b"XXXXX" + bytes(40))
        with pytest.raises(ConfigurationError):
            io.read_binary(path)
        io.write_binary(path, np.zeros((1, 1)), np.ones((1, 2)), d=2, m=1, seed=5)
        path.write_bytes(path.read_bytes() + b"\0")
        with pytest.raises(ConfigurationError):
            io.read_binary(path)

    def test_shape_mismatch(self, tmp_path):
        with pytest.raises(ConfigurationError):
            io.write_binary(tmp_path / "a.bin", np.zeros((2, 1)), np.zeros((2, 3)), d=2, m=1, seed=0)

    def test_csv_mirror(self, tmp_path):
        io.write_csv(tmp_path / "a.csv", np.array([[0.25]]), np.array([[1.0, 2.0, 3.0, 4.0]]), d=2, m=2)
        lines = (tmp_path / "a.csv").read_text().splitlines()
        assert lines[0] == "theta0,z0_0,z0_1,z1_0,z1_1"
        assert lines[1] == "0.25,1.0,2.0,3.0,4.0"

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(1, 5), m=st.integers(1, 3), d=st.integers(1, 3), seed=st.integers(0, 2**40))
    def test_roundtrip_property(self, tmp_path_factory, n, m, d, seed):
        path = tmp_path_factory.mktemp("io") / "x.bin"
        rng = np.random.default_rng(seed)
        theta, z = rng.standard_normal((n, 1)), rng.standard_normal((n, m * d))
        io.write_binary(path, theta, z, d, m, seed)
        raw = io.read_binary(path)
        assert raw["z"].tobytes() == z.tobytes()


class TestFamilies:
    def test_logistic_from_config(self):
        model, prior = model_from_config({"family": "logistic", "d": 3})
        assert isinstance(model, LogisticModel) and model.d == 3 and prior.p == 1
        assert model.sample([0.5], 4, np.random.default_rng(0)).shape == (4, 3)

    def test_linear_from_config(self):
        model, prior = model_from_config({"family": "linear-gaussian", "sigma": 2.0,
                                          "prior": {"kind": "gaussian", "mean": [0.0], "stdev": [1.0]}})
        assert isinstance(model, LinearGaussianModel) and model.sigma == 2.0

    def test_field_from_config(self):
        model, _ = model_from_config({"family": "powered-exponential", "locations": [0.0, 0.5, 2.0],
                                      "prior": {"kind": "uniform", "lower": [0.1, 0.1], "upper": [1.0, 1.9]}})
        assert isinstance(model, GaussianFieldModel) and model.d == 3 and model.p == 2

    def test_brown_resnick_from_config(self):
        model, _ = model_from_config({"family": "brown-resnick", "locations": [[0, 0], [1, 0], [0, 1]],
                                      "prior": {"kind": "uniform", "lower": [0.1, 0.1], "upper": [2.0, 1.9]}})
        assert isinstance(model, BrownResnickModel) and model.d == 3

    @pytest.mark.parametrize("cfg", [
        {"family": "schlather"},
        {"family": "matern"},
        {"family": "logistic", "prior": {"kind": "uniform", "lower": [0, 0], "upper": [1, 1]}},
    ])
    def test_bad_configs(self, cfg):
        with pytest.raises(ConfigurationError):
            model_from_config(cfg)
