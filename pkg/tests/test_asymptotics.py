import numpy as np
import pytest
from scipy import stats

import oracles
from equivboot.asymptotics import CovMatrix, covariance_sigma, limit_quantile, sample_limit_T
from equivboot.errors import BadWeights
from equivboot.sampling import RngStream


def random_pair(rng, k):
    return rng.dirichlet(np.ones(k) * 2), rng.dirichlet(np.ones(k) * 2)


class TestCovariance:
    def test_uniform_example(self):
        s = covariance_sigma([0.5, 0.5], [0.5, 0.5], 0.5, 0.5)
        np.testing.assert_allclose(s.entries, [[1, -1], [-1, 1]], atol=1e-15)
        assert s.rank == 1

    def test_point_mass_contributes_nothing(self):
        s = covariance_sigma([1.0, 0.0], [1.0, 0.0], 0.3, 0.7)
        assert np.all(s.entries == 0) and s.rank == 0

    def test_matches_closed_form_and_rows_sum_to_zero(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            p, q = random_pair(rng, 5)
            s = covariance_sigma(p, q, 0.4, 0.6)
            np.testing.assert_allclose(s.entries, oracles.sigma_closed_form(p, q, 0.4), atol=1e-14)
            assert np.abs(s.entries.sum(axis=1)).max() <= 1e-10
            assert np.abs(s.factor @ s.factor.T - s.entries).max() <= 1e-8

    def test_empirical_covariance(self):
        # sqrt(n)(p_hat - q_hat - theta) at n1 = n2 = 2000, 20000 draws
        rng = np.random.default_rng(2)
        p, q = np.array([0.2, 0.5, 0.3]), np.array([0.4, 0.4, 0.2])
        n1 = n2 = 2000
        z = (rng.multinomial(n1, p, 20_000) / n1 - rng.multinomial(n2, q, 20_000) / n2 - (p - q)) * np.sqrt(n1 + n2)
        s = covariance_sigma(p, q, 0.5, 0.5)
        np.testing.assert_allclose(np.cov(z.T), s.entries, atol=0.05)

    @pytest.mark.parametrize("l1,l2", [(0.0, 1.0), (0.5, 0.6), (-0.2, 1.2)])
    def test_bad_weights(self, l1, l2):
        with pytest.raises(BadWeights):
            covariance_sigma([0.5, 0.5], [0.5, 0.5], l1, l2)

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError):
            CovMatrix.from_matrix([[1.0, 0.0], [0.0, -1.0]])


class TestLimitLaw:
    def test_zero_sigma_gives_zero(self):
        s = covariance_sigma([1.0, 0.0], [1.0, 0.0], 0.5, 0.5)
        assert np.all(sample_limit_T("l1", [0.0, 0.0], s, 50, RngStream(0)) == 0)

    def test_l2_normal_variance_and_quantile(self):
        p, q = np.array([0.5, 0.3, 0.2]), np.array([0.3, 0.3, 0.4])
        th = p - q
        s = covariance_sigma(p, q, 0.5, 0.5)
        var = th @ s.entries @ th / (th @ th)
        t = sample_limit_T("l2", th, s, 100_000, RngStream(3))
        assert t.var() == pytest.approx(var, rel=0.03)
        qa = limit_quantile("l2", th, s, 0.05, 100_000, RngStream(4))
        exact = stats.norm.ppf(0.05) * np.sqrt(var)
        # standard error of an order statistic: sqrt(a(1-a)/m) / density
        se = np.sqrt(0.05 * 0.95 / 100_000) / stats.norm.pdf(stats.norm.ppf(0.05)) * np.sqrt(var)
        assert abs(qa - exact) <= 2 * se

    def test_median_of_symmetric_case(self):
        th = np.array([0.2, -0.1, -0.1])
        s = covariance_sigma([0.5, 0.2, 0.3], [0.3, 0.3, 0.4], 0.5, 0.5)
        assert abs(limit_quantile("linf", th, s, 0.5, 100_000, RngStream(5))) < 0.02

    def test_l1_all_zero_is_nonnegative(self):
        s = covariance_sigma([0.2, 0.3, 0.5], [0.2, 0.3, 0.5], 0.5, 0.5)
        assert np.all(sample_limit_T("l1", [0.0, 0.0, 0.0], s, 10_000, RngStream(6)) >= 0)

    def test_two_extremes_dominate_one(self):
        p = np.array([0.375, 0.375, 0.0625, 0.0625, 0.0625, 0.0625])
        q = np.array([0.125, 0.125, 0.1875, 0.1875, 0.1875, 0.1875])
        s = covariance_sigma(p, q, 0.5, 0.5)
        both = limit_quantile("linf", p - q, s, 0.05, 100_000, RngStream(7))
        for j in (0, 1):
            z = sample_limit_T("l2", np.eye(6)[j], s, 100_000, RngStream(7))
            assert both > np.sort(z)[4999]

    def test_matches_independent_oracle(self):
        rng = np.random.default_rng(8)
        p, q = random_pair(rng, 4)
        for kind in ("l1", "linf", "l2"):
            s = covariance_sigma(p, q, 0.5, 0.5)
            ours = limit_quantile(kind, p - q, s, 0.1, 200_000, RngStream(9))
            ref = oracles.order_statistic_quantile(
                oracles.limit_draws(kind, p - q, oracles.sigma_closed_form(p, q, 0.5), 200_000, rng), 0.1)
            assert ours == pytest.approx(ref, abs=0.02)

    def test_no_atoms(self):
        s = covariance_sigma([0.4, 0.3, 0.3], [0.3, 0.3, 0.4], 0.5, 0.5)
        t = sample_limit_T("linf", [0.1, 0.0, -0.1], s, 100_000, RngStream(10))
        _, counts = np.unique(t, return_counts=True)
        assert counts.max() <= 3

    def test_draw_count_floor(self):
        s = covariance_sigma([0.5, 0.5], [0.5, 0.5], 0.5, 0.5)
        with pytest.raises(ValueError):
            limit_quantile("l1", [0.0, 0.0], s, 0.05, 100, RngStream(0))
