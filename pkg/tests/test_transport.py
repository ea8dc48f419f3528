import math

import numpy as np
import pytest

from cae import (
    NumericalStabilityError,
    SinkhornConfig,
    cost_matrix,
    counterpart,
    sinkhorn,
    softmax_counterpart,
    transport_cost,
)

from oracles import sinkhorn_fixed_point


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


class TestCostMatrix:
    def test_identical_vectors(self):
        x = np.array([[1.0, 0.0]])
        assert cost_matrix(x, x)[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal(self):
        assert cost_matrix(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]))[0, 0] == 1.0

    def test_antipodal(self):
        assert cost_matrix(np.array([[1.0, 0.0]]), np.array([[-1.0, 0.0]]))[0, 0] == 2.0

    def test_range(self, rng):
        costs = cost_matrix(rng.standard_normal((20, 5)), rng.standard_normal((30, 5)))
        assert costs.min() >= -1e-6 and costs.max() <= 2 + 1e-6


class TestSinkhorn:
    def test_uniform_cost_gives_independent_coupling(self, rng):
        for eps in (0.01, 0.5, 10.0):
            plan = sinkhorn(np.full((4, 6), 0.7), SinkhornConfig(epsilon=eps))
            np.testing.assert_allclose(plan.values, 1.0 / 24, atol=1e-15, rtol=0)

    def test_one_by_one(self):
        plan = sinkhorn(np.array([[0.3]]))
        np.testing.assert_allclose(plan.values, [[1.0]], atol=1e-12)

    def test_matches_fixed_point_oracle_2x2(self):
        cost = np.array([[0.0, 1.0], [1.0, 0.0]])
        plan = sinkhorn(cost, SinkhornConfig(epsilon=0.1, marginal_tol=1e-12))
        expected = sinkhorn_fixed_point(cost, epsilon=0.1)
        np.testing.assert_allclose(plan.values, expected, atol=1e-8, rtol=0)
        assert plan.values[0, 0] > plan.values[0, 1]  # diagonal dominant

    def test_matches_fixed_point_oracle_random(self, rng):
        for trial in range(20):
            shape = (int(rng.integers(1, 6)), int(rng.integers(1, 6)))
            cost = rng.random(shape) * 2
            eps = float(rng.uniform(0.05, 1.0))
            plan = sinkhorn(cost, SinkhornConfig(epsilon=eps, marginal_tol=1e-13, max_iter=20000))
            expected = sinkhorn_fixed_point(cost, epsilon=eps)
            np.testing.assert_allclose(plan.values, expected, atol=1e-8, rtol=0)

    def test_marginals_within_tolerance(self, rng):
        cost = rng.random((50, 20)) * 2
        cfg = SinkhornConfig(epsilon=0.05, marginal_tol=1e-6)
        plan = sinkhorn(cost, cfg)
        assert plan.iterations_used < cfg.max_iter
        assert plan.marginal_error <= cfg.marginal_tol
        np.testing.assert_allclose(plan.values.sum(axis=1), 1 / 50, atol=1e-6)
        np.testing.assert_allclose(plan.values.sum(axis=0), 1 / 20, atol=1e-6)
        assert plan.values.sum() == pytest.approx(1.0, abs=1e-9)
        assert (plan.values >= 0).all()

    def test_gibbs_separability(self, rng):
        # log t + c/eps must decompose as f_i + g_j
        cost = rng.random((12, 8)) * 2
        eps = 0.2
        plan = sinkhorn(cost, SinkhornConfig(epsilon=eps, marginal_tol=1e-10))
        log_scaled = np.log(plan.values) + cost / eps
        recon = (
            log_scaled.mean(axis=1, keepdims=True)
            + log_scaled.mean(axis=0, keepdims=True)
            - log_scaled.mean()
        )
        np.testing.assert_allclose(log_scaled, recon, atol=1e-6)

    def test_permutation_equivariance(self, rng):
        cost = rng.random((9, 7)) * 2
        perm = rng.permutation(7)
        cfg = SinkhornConfig(epsilon=0.1)
        plan = sinkhorn(cost, cfg)
        plan_permuted = sinkhorn(cost[:, perm], cfg)
        np.testing.assert_allclose(plan_permuted.values, plan.values[:, perm], atol=1e-12)

    def test_large_epsilon_approaches_independent(self, rng):
        cost = rng.random((15, 10)) * 2
        plan = sinkhorn(cost, SinkhornConfig(epsilon=50.0))
        assert np.abs(plan.values - 1.0 / 150).max() <= 1e-3

    def test_deterministic(self, rng):
        cost = rng.random((20, 10))
        a = sinkhorn(cost, SinkhornConfig(epsilon=0.05))
        b = sinkhorn(cost, SinkhornConfig(epsilon=0.05))
        np.testing.assert_array_equal(a.values, b.values)
        assert a.iterations_used == b.iterations_used

    def test_budget_exhaustion_reports_error(self, rng):
        cost = rng.random((3, 5)) * 2
        plan = sinkhorn(cost, SinkhornConfig(epsilon=0.05, max_iter=1, marginal_tol=1e-15))
        assert plan.iterations_used == 1
        assert plan.marginal_error > 1e-15
        np.testing.assert_allclose(plan.values.sum(axis=1), 1 / 3, atol=1e-12)  # rows projected last

    def test_plain_scaling_matches_log_domain(self, rng):
        cost = rng.random((10, 6))
        log_plan = sinkhorn(cost, SinkhornConfig(epsilon=0.5, log_domain=True))
        lin_plan = sinkhorn(cost, SinkhornConfig(epsilon=0.5, log_domain=False))
        np.testing.assert_allclose(lin_plan.values, log_plan.values, atol=1e-10)

    def test_plain_scaling_underflow_raises(self):
        # first row's kernel underflows entirely to zero
        cost = np.array([[2.0, 2.0], [0.0, 1.0]])
        with pytest.raises(NumericalStabilityError, match="log_domain"):
            sinkhorn(cost, SinkhornConfig(epsilon=1e-3, log_domain=False))

    def test_non_finite_cost(self):
        with pytest.raises(ValueError, match="non-finite"):
            sinkhorn(np.array([[np.inf, 0.0]]))


class TestCounterpart:
    def test_single_text_single_image(self):
        text = unit([3.0, 4.0])[None, :]
        image = unit([1.0, 0.0])[None, :]
        sims = image @ text.T
        plan = sinkhorn(1 - sims)
        raw = counterpart(image, text, plan, sims, normalize_output=False)
        np.testing.assert_allclose(raw, sims[0, 0] * text, atol=1e-12)
        normalized = counterpart(image, text, plan, sims, normalize_output=True)
        np.testing.assert_allclose(normalized, text, atol=1e-12)

    def test_single_text_two_images_hand_evaluated(self):
        # with one text the only feasible plan has rows 1/2, column 1
        text = unit([0.0, 1.0])[None, :]
        images = np.array([unit([1.0, 1.0]), unit([0.2, 1.0])])
        sims = images @ text.T
        plan = sinkhorn(1 - sims)
        np.testing.assert_allclose(plan.values, [[0.5], [0.5]], atol=1e-12)
        raw = counterpart(images, text, plan, sims, normalize_output=False)
        np.testing.assert_allclose(raw, 0.5 * sims * text, atol=1e-12)
        normalized = counterpart(images, text, plan, sims)
        np.testing.assert_allclose(normalized, np.vstack([text, text]), atol=1e-12)

    def test_aligned_image_pulls_toward_matching_text(self):
        texts = np.eye(2)
        image = unit([0.9, 0.1])[None, :]
        sims = image @ texts.T
        plan = sinkhorn(1 - sims, SinkhornConfig(epsilon=0.01))
        result = counterpart(image, texts, plan, sims)
        cos_first = float(result[0] @ texts[0])
        cos_second = float(result[0] @ texts[1])
        assert cos_first > cos_second

    def test_zero_counterpart_errors(self):
        # orthogonal image and text: similarity 0 kills the whole row
        image = np.array([[1.0, 0.0]])
        text = np.array([[0.0, 1.0]])
        sims = image @ text.T
        plan = sinkhorn(1 - sims)
        with pytest.raises(ValueError, match="instance 0"):
            counterpart(image, text, plan, sims)

    def test_shape_mismatch(self, rng):
        images = rng.standard_normal((4, 3))
        texts = rng.standard_normal((5, 3))
        sims = images @ texts.T
        plan = sinkhorn(1 - sims)
        with pytest.raises(ValueError, match="sims shape"):
            counterpart(images, texts, plan, sims[:, :4])


class TestSoftmaxCounterpart:
    def test_single_text(self, rng):
        texts = unit([1.0, 2.0, 2.0])[None, :]
        images = rng.standard_normal((3, 3))
        vectors, weights = softmax_counterpart(images, texts)
        np.testing.assert_allclose(weights, 1.0)
        np.testing.assert_allclose(vectors, np.repeat(texts, 3, axis=0))

    def test_equidistant_texts_average(self):
        texts = np.eye(2)
        image = unit([1.0, 1.0])[None, :]
        vectors, weights = softmax_counterpart(image, texts)
        np.testing.assert_allclose(weights, [[0.5, 0.5]], atol=1e-12)
        np.testing.assert_allclose(vectors, [[0.5, 0.5]], atol=1e-12)

    def test_temperature_one_matches_exp_weighting(self):
        # similarity row (1, 0) must weight e/(e+1), 1/(e+1)
        texts = np.eye(2)
        image = np.array([[1.0, 0.0]])
        _, weights = softmax_counterpart(image, texts, temperature=1.0)
        e = math.e
        np.testing.assert_allclose(weights, [[e / (e + 1), 1 / (e + 1)]], atol=1e-12)

    def test_rows_sum_to_one(self, rng):
        vectors, weights = softmax_counterpart(
            rng.standard_normal((10, 4)), rng.standard_normal((7, 4)), temperature=0.3
        )
        np.testing.assert_allclose(weights.sum(axis=1), 1.0, atol=1e-12)

    def test_rejects_bad_temperature(self):
        with pytest.raises(ValueError, match="temperature"):
            softmax_counterpart(np.ones((1, 2)), np.ones((1, 2)), temperature=0.0)


class TestTransportCost:
    def test_zero_cost(self, rng):
        plan = sinkhorn(rng.random((4, 4)))
        assert transport_cost(plan, np.zeros((4, 4))) == 0.0

    def test_uniform_plan_gives_mean_cost(self, rng):
        cost = rng.random((6, 8))
        uniform = np.full((6, 8), 1.0 / 48)
        assert transport_cost(uniform, cost) == pytest.approx(cost.mean(), abs=1e-12)

    def test_matches_oracle_evaluation(self):
        cost = np.array([[0.0, 1.0], [1.0, 0.0]])
        plan = sinkhorn(cost, SinkhornConfig(epsilon=0.1, marginal_tol=1e-12))
        oracle_plan = sinkhorn_fixed_point(cost, epsilon=0.1)
        assert transport_cost(plan, cost) == pytest.approx(
            float((oracle_plan * cost).sum()), abs=1e-8
        )

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            transport_cost(np.ones((2, 2)), np.ones((2, 3)))

    def test_rejects_negative_mass(self):
        with pytest.raises(ValueError, match="nonnegative"):
            transport_cost(np.array([[-0.1, 1.1]]), np.ones((1, 2)))


class TestPlanVersusSoftmax:
    """Structural facts behind the plan/softmax comparison."""

    def _instance(self, seed, n=100, m=30, d=16):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((n, d))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        u = rng.standard_normal((m, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        return x, u

    def test_softmax_violates_column_marginals(self):
        violations = 0
        for seed in range(100):
            x, u = self._instance(seed)
            _, weights = softmax_counterpart(x, u, temperature=1.0)
            col_err = np.abs((weights / x.shape[0]).sum(axis=0) - 1.0 / u.shape[0]).max()
            violations += col_err > 1e-3
        assert violations >= 95

    def test_sharp_plan_beats_smooth_softmax(self):
        # the verbatim exp(similarity) weighting pays a much higher
        # transport cost than a sharp plan on the same cost matrix
        wins = 0
        gaps = []
        for seed in range(100):
            x, u = self._instance(seed)
            cost = cost_matrix(x, u)
            plan = sinkhorn(cost, SinkhornConfig(epsilon=0.05))
            _, weights = softmax_counterpart(x, u, temperature=1.0)
            gap = transport_cost(weights / x.shape[0], cost) - transport_cost(plan, cost)
            gaps.append(gap)
            wins += gap >= 0
        assert wins == 100
        assert np.mean(gaps) > 0.1

    def test_matched_temperature_softmax_is_row_relaxed_optimum(self):
        # at matched temperature the softmax/N coupling solves the same
        # entropic objective without the column constraint, so its
        # regularized objective can never exceed the plan's
        eps = 1.0
        for seed in range(20):
            x, u = self._instance(seed, n=40, m=10)
            cost = cost_matrix(x, u)
            plan = sinkhorn(cost, SinkhornConfig(epsilon=eps, marginal_tol=1e-10))
            _, weights = softmax_counterpart(x, u, temperature=eps)
            coupling = weights / x.shape[0]

            def objective(t):
                return float((t * cost).sum() + eps * (t * np.log(t)).sum())

            assert objective(coupling) <= objective(plan.values) + 1e-9
