import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from equivboot.config import SolverConfig
from equivboot.errors import DimensionMismatch, DomainError, EpsilonInfeasible, InvalidConfig
from equivboot.estimation import constrained_mle, log_likelihood, mle, select_bootstrap_params
from equivboot.norms import norm_eval

KINDS = ["l1", "linf", "l2"]


class TestLogLikelihood:
    def test_uniform(self):
        assert log_likelihood([0.5, 0.5], [0.5, 0.5], [5, 5], [5, 5]) == pytest.approx(20 * math.log(0.5))

    def test_zero_times_log_zero(self):
        assert log_likelihood([1.0, 0.0], [0.5, 0.5], [10, 0], [0, 0]) == 0.0

    def test_positive_count_at_zero_probability(self):
        with pytest.raises(DomainError):
            log_likelihood([1.0, 0.0], [0.5, 0.5], [9, 1], [1, 1])

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            log_likelihood([0.5, 0.5], [0.5, 0.5], [1, 1, 1], [1, 1])


class TestMLE:
    def test_relative_frequencies(self):
        p, q = mle([3, 7], [0, 10])
        np.testing.assert_allclose(p.entries, [0.3, 0.7])
        np.testing.assert_allclose(q.entries, [0.0, 1.0])

    def test_dominates_random_search(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            x = rng.integers(0, 20, 4) + 1
            y = rng.integers(0, 20, 4) + 1
            p, q = mle(x, y)
            best = oracles.random_search_best(x, y, 1000, rng)
            assert log_likelihood(p, q, x, y) >= best


class TestConstrainedExamples:
    def test_symmetric_linf_example(self):
        fit = constrained_mle([5, 5], [5, 5], 0.2, "linf")
        # of the two mirrored optima the lexicographically larger is returned
        np.testing.assert_allclose(fit.p_tilde.entries, [0.6, 0.4], atol=1e-9)
        np.testing.assert_allclose(fit.q_tilde.entries, [0.4, 0.6], atol=1e-9)
        assert fit.log_likelihood == pytest.approx(10 * (math.log(0.6) + math.log(0.4)), abs=1e-9)
        assert fit.log_likelihood == pytest.approx(oracles.grid_k2([5, 5], [5, 5], 0.2, "linf", step=1e-5), abs=1e-8)

    def test_already_on_sphere(self):
        fit = constrained_mle([6, 4], [4, 6], 0.2, "linf")
        assert fit.method == "mle"
        np.testing.assert_allclose(fit.p_tilde.entries, [0.6, 0.4])

    @pytest.mark.parametrize("kind,eps", [("l1", 2.0), ("linf", 1.0), ("l2", 1.5), ("l1", 0.0), ("linf", -0.1)])
    def test_infeasible_epsilon(self, kind, eps):
        with pytest.raises(EpsilonInfeasible):
            constrained_mle([3, 3], [3, 3], eps, kind)

    def test_floor_above_one_over_k(self):
        with pytest.raises(InvalidConfig):
            constrained_mle([1, 1, 1], [1, 1, 1], 0.2, "l1", SolverConfig(interior_floor=0.4))

    @pytest.mark.parametrize("kind", KINDS)
    def test_residual_and_simplex(self, kind):
        fit = constrained_mle([12, 0, 3, 5], [2, 9, 4, 5], 0.3, kind)
        assert fit.constraint_residual <= 1e-8
        assert abs(norm_eval(kind, fit.p_tilde.entries - fit.q_tilde.entries) - 0.3) <= 1e-8
        assert np.all(fit.p_tilde.entries >= 0) and np.all(fit.q_tilde.entries >= 0)


class TestGridOracle:
    @pytest.mark.parametrize("kind", KINDS)
    def test_k2_fine_grid(self, kind):
        rng = np.random.default_rng(21)
        for _ in range(10):
            x = rng.integers(0, 31, 2)
            y = rng.integers(0, 31, 2)
            x[0] += x.sum() == 0
            y[1] += y.sum() == 0
            eps = float(rng.choice([0.1, 0.2, 0.3]))
            fit = constrained_mle(x, y, eps, kind)
            grid = oracles.grid_k2(x, y, eps, kind, step=1e-5)
            assert fit.log_likelihood >= grid - 1e-6
            assert fit.log_likelihood <= grid + 1e-3

    @pytest.mark.parametrize("kind", KINDS)
    def test_k3_grid_and_refinement(self, kind):
        rng = np.random.default_rng({"l1": 31, "linf": 32, "l2": 33}[kind])
        for _ in range(3):
            x = rng.integers(0, 31, 3) + 1
            y = rng.integers(0, 31, 3)
            y[0] += 1
            eps = float(rng.choice([0.1, 0.2, 0.3]))
            fit = constrained_mle(x, y, eps, kind)
            grid, p0, q0 = oracles.grid_k3(x, y, eps, kind)
            fine = oracles.refine_k3(x, y, eps, kind, p0, q0)
            assert fit.log_likelihood >= max(grid, fine) - 1e-6
            # the oracle gets close to the solver once refined
            assert fit.log_likelihood - fine <= 5e-3


class TestStructure:
    @pytest.mark.parametrize("kind", KINDS)
    def test_below_unconstrained(self, kind):
        x, y = [7, 2, 9], [3, 8, 4]
        p, q = mle(x, y)
        fit = constrained_mle(x, y, 0.15, kind)
        assert fit.log_likelihood <= log_likelihood(p, q, x, y) + 1e-12

    @pytest.mark.parametrize("kind", KINDS)
    def test_permutation_invariance(self, kind):
        rng = np.random.default_rng(41)
        for _ in range(5):
            x = rng.integers(0, 25, 5) + 1
            y = rng.integers(0, 25, 5)
            y[2] += 1
            perm = rng.permutation(5)
            a = constrained_mle(x, y, 0.3, kind)
            b = constrained_mle(x[perm], y[perm], 0.3, kind)
            assert a.log_likelihood == pytest.approx(b.log_likelihood, abs=1e-8)

    @pytest.mark.parametrize("kind", KINDS)
    def test_deterministic(self, kind):
        a = constrained_mle([4, 0, 9, 2], [5, 5, 1, 7], 0.4, kind)
        b = constrained_mle([4, 0, 9, 2], [5, 5, 1, 7], 0.4, kind)
        assert a == b

    def test_local_search_matches_enumeration(self):
        # max_pieces=1 forces the local search used for large k
        rng = np.random.default_rng(51)
        for _ in range(40):
            x = rng.integers(0, 15, 6)
            y = rng.integers(0, 15, 6)
            x[0] += 1
            y[1] += 1
            full = constrained_mle(x, y, 0.6, "l1")
            if full.method != "pieces":
                continue
            cut = constrained_mle(x, y, 0.6, "l1", SolverConfig(max_pieces=1))
            assert cut.log_likelihood == pytest.approx(full.log_likelihood, abs=1e-9)


class TestSelectBootstrapParams:
    def test_far_apart_uses_mle(self):
        bp = select_bootstrap_params([100, 0], [0, 100], 0.25, "linf")
        assert bp.d_hat == 1.0 and not bp.used_constrained
        np.testing.assert_array_equal(bp.p.entries, [1.0, 0.0])

    def test_close_uses_constrained_fit(self):
        bp = select_bootstrap_params([5, 5], [5, 5], 0.2, "linf")
        assert bp.used_constrained and bp.d_hat == 0.0
        np.testing.assert_allclose(bp.p.entries, [0.6, 0.4], atol=1e-9)

    def test_tie_goes_to_mle(self):
        bp = select_bootstrap_params([3, 1], [1, 3], 0.5, "linf")
        assert bp.d_hat == 0.5 and not bp.used_constrained


counts = st.lists(st.integers(0, 30), min_size=3, max_size=5)


class TestNullConstrainedProperty:
    @settings(max_examples=60, deadline=None)
    @given(x=counts, y=counts, eps=st.sampled_from([0.05, 0.2, 0.5]), kind=st.sampled_from(KINDS))
    def test_resampling_pair_in_null(self, x, y, eps, kind):
        k = min(len(x), len(y))
        x, y = np.array(x[:k]), np.array(y[:k])
        x[0] += x.sum() == 0
        y[0] += y.sum() == 0
        bp = select_bootstrap_params(x, y, eps, kind)
        assert norm_eval(kind, bp.p.entries - bp.q.entries) >= eps - 1e-8
