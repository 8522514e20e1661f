import numpy as np
import pytest

from gspto import InvalidParameterError, RngStream, sample_gaussian, sample_unit_sphere


class TestRngStream:
    def test_same_pair_same_sequence(self):
        a = RngStream(42, 3).generator().standard_normal(100)
        b = RngStream(42, 3).generator().standard_normal(100)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(42, 0).generator().standard_normal(100)
        b = RngStream(42, 1).generator().standard_normal(100)
        assert not np.array_equal(a, b)

    def test_streams_uncorrelated(self):
        n = 50_000
        a = RngStream(9, 0).generator().standard_normal(n)
        b = RngStream(9, 1).generator().standard_normal(n)
        corr = float(np.corrcoef(a, b)[0, 1])
        assert abs(corr) < 0.02


class TestSampleGaussian:
    def test_parameter_validation(self):
        with pytest.raises(InvalidParameterError):
            sample_gaussian(np.zeros(2), 0.0, 10, RngStream(0))
        with pytest.raises(InvalidParameterError):
            sample_gaussian(np.zeros(2), -1.0, 10, RngStream(0))
        with pytest.raises(InvalidParameterError):
            sample_gaussian(np.zeros(2), 1.0, 0, RngStream(0))

    def test_degenerate_sigma(self):
        mu = np.array([2.0, -3.0])
        samples = sample_gaussian(mu, 1e-9, 1000, RngStream(1))
        assert np.all(np.abs(samples - mu) < 1e-7)

    def test_mean_within_clt_bound(self):
        mu, sigma, count = np.array([1.0, 2.0]), 3.0, 100_000
        samples = sample_gaussian(mu, sigma, count, RngStream(2))
        bound = 3.0 * sigma / np.sqrt(count)
        assert np.all(np.abs(samples.mean(axis=0) - mu) < bound)

    def test_empirical_covariance(self):
        sigma, count = 0.7, 100_000
        samples = sample_gaussian(np.zeros(3), sigma, count, RngStream(3))
        cov = np.cov(samples.T)
        target = sigma * sigma
        assert np.all(np.abs(np.diag(cov) - target) < 0.05 * target)
        off = cov[~np.eye(3, dtype=bool)]
        assert np.all(np.abs(off) < 0.05 * target)

    def test_deterministic_per_stream(self):
        a = sample_gaussian(np.zeros(4), 2.0, 50, RngStream(7, 5))
        b = sample_gaussian(np.zeros(4), 2.0, 50, RngStream(7, 5))
        assert np.array_equal(a, b)


class TestSampleUnitSphere:
    def test_unit_norms(self):
        v = sample_unit_sphere(6, 5000, RngStream(4))
        np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-12)

    def test_one_dimension_is_signs(self):
        v = sample_unit_sphere(1, 1000, RngStream(5))
        assert set(np.unique(v)) == {-1.0, 1.0}

    def test_mean_near_zero(self):
        v = sample_unit_sphere(3, 100_000, RngStream(6))
        assert np.all(np.abs(v.mean(axis=0)) < 0.02)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_second_moment_is_identity_over_d(self, d):
        v = sample_unit_sphere(d, 100_000, RngStream(8, d))
        second = v.T @ v / v.shape[0]
        assert np.max(np.abs(second - np.eye(d) / d)) < 0.01

    def test_parameter_validation(self):
        with pytest.raises(InvalidParameterError):
            sample_unit_sphere(0, 10, RngStream(0))
        with pytest.raises(InvalidParameterError):
            sample_unit_sphere(2, 0, RngStream(0))


def test_rng_type_rejected():
    with pytest.raises(InvalidParameterError):
        sample_gaussian(np.zeros(1), 1.0, 1, rng="not-a-stream")
