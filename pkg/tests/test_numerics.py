import numpy as np
import pytest

from core.errors import ConfigurationError, PreconditionError
from core.numerics import (
    RngStream, all_finite, as_matrix, logistic, matmul, sample_bernoulli, sample_gaussian, softplus,
)


class TestMatmul:
    def test_identity(self):
        m = np.arange(12, dtype=float).reshape(3, 4)
        np.testing.assert_array_equal(matmul(np.eye(3), m), m)

    def test_hand_example(self):
        np.testing.assert_array_equal(matmul([[1, 2], [3, 4]], [[0], [1]]), [[2], [4]])

    def test_against_triple_loop(self):
        rng = RngStream(5)
        a, b = rng.normal((5, 7)), rng.normal((7, 3))
        expected = np.zeros((5, 3))
        for i in range(5):
            for j in range(3):
                for k in range(7):
                    expected[i, j] += a[i, k] * b[k, j]
        assert np.max(np.abs(matmul(a, b) - expected)) < 1e-12

    def test_mismatch_raises(self):
        with pytest.raises(ConfigurationError):
            matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_vector_becomes_row(self):
        assert as_matrix([1.0, 2.0]).shape == (1, 2)


class TestLogistic:
    def test_zero(self):
        assert abs(logistic(0.0) - 0.5) < 1e-15

    def test_saturation(self):
        assert abs(logistic(500.0) - 1.0) < 1e-12
        assert logistic(-500.0) >= 0.0

    def test_one(self):
        assert abs(logistic(1.0) - 0.7310585786) < 1e-9

    def test_no_overflow_warning(self):
        with np.errstate(over='raise'):
            values = logistic(np.array([-1e4, 1e4]))
        assert all_finite(values)

    def test_softplus_matches_log1p(self):
        x = np.linspace(-5, 5, 11)
        np.testing.assert_allclose(softplus(x), np.log1p(np.exp(x)), atol=1e-12)


class TestBernoulliSampling:
    def test_extremes(self, rng):
        assert np.all(sample_bernoulli(np.zeros((3, 4)), rng) == 0.0)
        assert np.all(sample_bernoulli(np.ones((3, 4)), rng) == 1.0)

    def test_mean(self, rng):
        draws = sample_bernoulli(np.full(100_000, 0.3), rng)
        assert abs(draws.mean() - 0.3) < 3 * np.sqrt(0.3 * 0.7 / 1e5)

    def test_out_of_range(self, rng):
        with pytest.raises(PreconditionError):
            sample_bernoulli(np.array([0.5, 1.2]), rng)


class TestGaussianSampling:
    def test_moments(self, rng):
        draws = sample_gaussian(np.zeros(100_000), 1.0, rng)
        assert abs(draws.mean()) < 3 / np.sqrt(1e5)
        assert abs(draws.var() - 1.0) < 0.05

    def test_deterministic(self):
        a = sample_gaussian(np.zeros(10), 1.0, RngStream(9))
        b = sample_gaussian(np.zeros(10), 1.0, RngStream(9))
        np.testing.assert_array_equal(a, b)

    def test_non_positive_sigma(self, rng):
        with pytest.raises(PreconditionError):
            sample_gaussian(np.zeros(3), 0.0, rng)


class TestRngStream:
    def test_substreams_are_independent_of_order(self):
        first = RngStream(42)
        weights_a = first.substream('weights').uniform(5)
        first.substream('gibbs').uniform(100)
        weights_b = RngStream(42).substream('weights').uniform(5)
        np.testing.assert_array_equal(weights_a, weights_b)

    def test_purposes_differ(self):
        root = RngStream(42)
        assert not np.array_equal(root.substream('weights').uniform(5), root.substream('gibbs').uniform(5))

    def test_custom_purpose(self):
        a = RngStream(1).substream('pretrain').uniform(3)
        b = RngStream(1).substream('pretrain').uniform(3)
        np.testing.assert_array_equal(a, b)

    def test_negative_seed(self):
        with pytest.raises(ConfigurationError):
            RngStream(-1)
