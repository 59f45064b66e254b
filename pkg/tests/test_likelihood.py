import math

import numpy as np
import pytest

import wassbayes as wb


def flat_gather(values, n=101, labels=None):
    grid = wb.make_grid(0.0, 5.0, n)
    if labels is None:
        labels = [(0, r, 0) for r in range(len(values))]
    traces = [wb.Trace(grid=grid, values=np.full(n, v)) for v in values]
    return wb.Gather(traces=traces, labels=labels)


class TestLogLikelihoodValues:
    def test_exp_w2_zero_misfit(self):
        # simulated equals observed: log L = N log s exactly
        model = wb.LikelihoodModel(kind=wb.KIND_EXP_W2, n_obs=101,
                                   scaling=wb.Scaling(kind="square"))
        g = flat_gather([1.0, 2.0])
        ll, cache = wb.log_likelihood(model, g, g, s=70.0)
        assert cache.total == 0.0
        assert ll == pytest.approx(101 * math.log(70.0), rel=0, abs=1e-12)

    def test_exp_w2_frozen_formula(self):
        model = wb.LikelihoodModel(kind=wb.KIND_EXP_W2, n_obs=3,
                                   scaling=wb.Scaling(kind="square"))
        ll = wb.log_likelihood_from_misfit(model, total_misfit=0.5, s=2.0)
        assert ll == pytest.approx(3 * math.log(2.0) - 1.0, abs=1e-14)

    def test_gauss_l2_zero_misfit(self):
        model = wb.LikelihoodModel(kind=wb.KIND_GAUSS_L2, n_obs=2)
        ll = wb.log_likelihood_from_misfit(model, total_misfit=0.0, s=1.0)
        assert ll == pytest.approx(-math.log(2.0 * math.pi), abs=1e-14)

    def test_gauss_l2_matches_gaussian_density(self):
        # one trace, n samples: log L must equal the sum of normal log pdfs
        from scipy import stats
        rng = np.random.default_rng(5)
        n = 17
        grid = wb.make_grid(0.0, 1.0, n)
        f = rng.normal(size=n)
        g = rng.normal(size=n)
        sim = wb.Gather(traces=[wb.Trace(grid=grid, values=f)], labels=[(0, 0, 0)])
        obs = wb.Gather(traces=[wb.Trace(grid=grid, values=g)], labels=[(0, 0, 0)])
        model = wb.LikelihoodModel(kind=wb.KIND_GAUSS_L2, n_obs=n)
        s = 2.5
        ll, _ = wb.log_likelihood(model, sim, obs, s=s)
        expected = stats.norm.logpdf(g, loc=f, scale=1.0 / math.sqrt(s)).sum()
        assert ll == pytest.approx(expected, rel=1e-12)

    def test_nonpositive_precision_rejected(self):
        model = wb.LikelihoodModel(kind=wb.KIND_GAUSS_L2, n_obs=4)
        with pytest.raises(ValueError):
            wb.log_likelihood_from_misfit(model, 1.0, s=0.0)

    def test_exp_w2_requires_scaling(self):
        with pytest.raises(ValueError):
            wb.LikelihoodModel(kind=wb.KIND_EXP_W2, n_obs=10)


class TestMisfits:
    def test_multi_trace_total_is_sum(self):
        model = wb.LikelihoodModel(kind=wb.KIND_GAUSS_L2, n_obs=101)
        sim = flat_gather([0.0, 0.0, 0.0])
        obs = flat_gather([1.0, 2.0, 3.0])
        cache = wb.compute_misfits(model, sim, obs)
        np.testing.assert_allclose(cache.per_trace, [101.0, 404.0, 909.0])
        assert cache.total == pytest.approx(1414.0)

    def test_label_mismatch_rejected(self):
        model = wb.LikelihoodModel(kind=wb.KIND_GAUSS_L2, n_obs=101)
        sim = flat_gather([1.0], labels=[(0, 0, 0)])
        obs = flat_gather([1.0], labels=[(0, 1, 0)])
        with pytest.raises(ValueError):
            wb.compute_misfits(model, sim, obs)

    def test_wrong_sample_count_rejected(self):
        model = wb.LikelihoodModel(kind=wb.KIND_GAUSS_L2, n_obs=50)
        g = flat_gather([1.0])
        with pytest.raises(ValueError):
            wb.compute_misfits(model, g, g)

    def test_misfit_order_follows_sim_labels(self):
        model = wb.LikelihoodModel(kind=wb.KIND_GAUSS_L2, n_obs=101)
        sim = flat_gather([0.0, 0.0], labels=[(0, 5, 0), (0, 1, 0)])
        obs_traces = {(0, 5, 0): 1.0, (0, 1, 0): 2.0}
        obs = flat_gather([obs_traces[(0, 5, 0)], obs_traces[(0, 1, 0)]],
                          labels=[(0, 5, 0), (0, 1, 0)])
        cache = wb.compute_misfits(model, sim, obs)
        np.testing.assert_allclose(cache.per_trace, [101.0, 404.0])


class TestConjugateIncrements:
    def test_exp_w2_increments(self):
        model = wb.LikelihoodModel(kind=wb.KIND_EXP_W2, n_obs=101,
                                   scaling=wb.Scaling(kind="square"))
        assert wb.conjugate_gamma_increments(model, 0.4) == (101.0, 0.4)

    def test_gauss_l2_increments(self):
        model = wb.LikelihoodModel(kind=wb.KIND_GAUSS_L2, n_obs=100)
        assert wb.conjugate_gamma_increments(model, 0.8) == (50.0, 0.4)

    def test_increments_consistent_with_density(self):
        # The conjugate increments must reproduce the s-dependence of the
        # log likelihood: log L(s) - log L(s') = da*(log s - log s')
        #                                        - db*(s - s')
        for kind, scaling in [(wb.KIND_EXP_W2, wb.Scaling(kind="square")),
                              (wb.KIND_GAUSS_L2, None)]:
            model = wb.LikelihoodModel(kind=kind, n_obs=37, scaling=scaling)
            total = 1.7
            da, db = wb.conjugate_gamma_increments(model, total)
            s1, s2 = 3.0, 11.0
            lhs = (wb.log_likelihood_from_misfit(model, total, s1)
                   - wb.log_likelihood_from_misfit(model, total, s2))
            rhs = da * (math.log(s1) - math.log(s2)) - db * (s1 - s2)
            assert lhs == pytest.approx(rhs, abs=1e-12)


class TestLandscape:
    def test_quadratic_landscape_peaks_at_truth(self):
        grid = wb.make_grid(0.0, 1.0, 11)

        def forward(theta):
            tr = wb.Trace(grid=grid, values=np.full(11, theta[0]))
            return wb.Gather(traces=[tr], labels=[(0, 0, 0)])

        obs = forward(np.array([4.0]))
        model = wb.LikelihoodModel(kind=wb.KIND_GAUSS_L2, n_obs=11)
        scan = np.linspace(2.0, 6.0, 21)
        vals = wb.landscape_scan_1d(model, forward, obs, 0, scan,
                                    np.array([0.0]), s_ref=1.0)
        assert np.isfinite(vals).all()
        assert scan[np.argmax(vals)] == pytest.approx(4.0)

    def test_forward_failure_yields_nan(self):
        grid = wb.make_grid(0.0, 1.0, 11)

        def forward(theta):
            if theta[0] > 3.0:
                raise RuntimeError("unstable")
            tr = wb.Trace(grid=grid, values=np.full(11, theta[0]))
            return wb.Gather(traces=[tr], labels=[(0, 0, 0)])

        obs = forward(np.array([2.0]))
        model = wb.LikelihoodModel(kind=wb.KIND_GAUSS_L2, n_obs=11)
        vals = wb.landscape_scan_1d(model, forward, obs, 0, [2.0, 5.0],
                                    np.array([0.0]), s_ref=1.0)
        assert np.isfinite(vals[0])
        assert np.isnan(vals[1])
