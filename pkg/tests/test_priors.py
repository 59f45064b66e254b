import numpy as np
import pytest
from scipy import stats

import wassbayes as wb


class TestUniformBox:
    def test_log_density_inside(self):
        prior = wb.UniformBoxPrior(bounds=[[2.0, 8.0]])
        assert prior.log_density(np.array([5.0])) == pytest.approx(-np.log(6.0))

    def test_outside_is_minus_inf(self):
        prior = wb.UniformBoxPrior(bounds=[[2.0, 8.0], [-1.0, 1.0]])
        assert prior.log_density(np.array([5.0, 2.0])) == -np.inf
        assert prior.log_density(np.array([1.0, 0.0])) == -np.inf

    def test_boundary_is_inside(self):
        prior = wb.UniformBoxPrior(bounds=[[2.0, 8.0]])
        assert prior.contains(np.array([2.0]))
        assert prior.contains(np.array([8.0]))

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            wb.UniformBoxPrior(bounds=[[3.0, 2.0]])


class TestGammaSampling:
    def test_moments(self):
        rng = np.random.default_rng(17)
        draws = np.array([wb.sample_gamma(102.0, 0.5, rng) for _ in range(20000)])
        assert draws.mean() == pytest.approx(204.0, rel=0.01)
        assert draws.var(ddof=1) == pytest.approx(102.0 / 0.25, rel=0.05)

    def test_distribution_matches_gamma(self):
        rng = np.random.default_rng(4)
        draws = np.array([wb.sample_gamma(3.0, 2.0, rng) for _ in range(5000)])
        # KS against the rate-parameterized Gamma
        stat, pval = stats.kstest(draws, "gamma", args=(3.0, 0.0, 0.5))
        assert pval > 1e-3

    def test_rejects_bad_params(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            wb.sample_gamma(-1.0, 1.0, rng)
        with pytest.raises(ValueError):
            wb.sample_gamma(1.0, 0.0, rng)


class TestProposal:
    def test_requires_positive_definite(self):
        with pytest.raises(ValueError):
            wb.ProposalSpec(covariance=[[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(ValueError):
            wb.ProposalSpec(covariance=[[1.0, 0.0], [0.5, 1.0]])

    def test_deterministic_given_seed(self):
        spec = wb.ProposalSpec(covariance=np.diag([0.005, 0.02]))
        theta = np.array([3.0, -1.0])
        a = wb.propose(theta, spec, np.random.default_rng(8))
        b = wb.propose(theta, spec, np.random.default_rng(8))
        np.testing.assert_array_equal(a, b)

    def test_empirical_covariance(self):
        cov = np.array([[0.04, 0.01], [0.01, 0.09]])
        spec = wb.ProposalSpec(covariance=cov)
        rng = np.random.default_rng(15)
        theta = np.zeros(2)
        steps = np.array([wb.propose(theta, spec, rng) for _ in range(40000)])
        np.testing.assert_allclose(steps.mean(axis=0), 0.0, atol=4 * 0.3 / np.sqrt(40000))
        np.testing.assert_allclose(np.cov(steps, rowvar=False), cov, rtol=0.08)

    def test_default_scale(self):
        spec = wb.ProposalSpec(covariance=np.eye(4))
        assert spec.effective_scale() == pytest.approx(2.38 ** 2 / 4)
        spec2 = wb.ProposalSpec(covariance=np.eye(4), adapt_scale=0.5)
        assert spec2.effective_scale() == 0.5


class TestAdaptCovariance:
    def test_matches_sample_covariance(self):
        rng = np.random.default_rng(21)
        history = rng.normal(size=(500, 3)) @ np.diag([1.0, 2.0, 0.5])
        out = wb.adapt_covariance(history, scale=1.0, jitter=0.0)
        np.testing.assert_allclose(out, np.cov(history, rowvar=False, ddof=1),
                                   rtol=1e-12)

    def test_identical_points_yield_jitter_only(self):
        history = np.ones((10, 2))
        out = wb.adapt_covariance(history, scale=2.0, jitter=1e-6)
        np.testing.assert_allclose(out, 1e-6 * np.eye(2), atol=1e-18)

    def test_default_jitter_scales_with_trace(self):
        rng = np.random.default_rng(2)
        history = rng.normal(size=(200, 2)) * 3.0
        cov = np.cov(history, rowvar=False, ddof=1)
        expected = 1.0 * cov + (1e-10 * np.trace(cov) / 2) * np.eye(2)
        np.testing.assert_allclose(wb.adapt_covariance(history, scale=1.0),
                                   expected, rtol=1e-12)

    def test_too_short_history_rejected(self):
        with pytest.raises(ValueError):
            wb.adapt_covariance(np.ones((3, 2)), scale=1.0)
