"""SVM dual solver: analytic cases, the brute-force QP oracle, and KKT invariants."""

import numpy as np
import numpy.testing as npt
import pytest

from groversvm.errors import ContractViolationError, DegenerateProblemError, StructuralError
from groversvm.grover import IndicatorOracle
from groversvm.kernel import KernelMode, gram_matrix
from groversvm.svm import brute_force_qp, decide, dual_objective, kkt_gap, train


def random_instance(rng, size=None, N=64, M=8):
    """Random exact-Gram training problem with both classes present."""
    m = size or int(rng.integers(3, 9))
    while True:
        marks = rng.choice(N, size=m, replace=False)
        labels = np.where(marks < N // 2, 1, -1)
        if labels.max() == 1 and labels.min() == -1:
            break
    gram = gram_matrix([IndicatorOracle(N, int(v)) for v in marks], M, KernelMode.exact())
    return gram.entries, labels


class TestTwoPointCases:
    def test_correlated_pair(self):
        model = train(np.array([[1.0, 0.5], [0.5, 1.0]]), [1, -1], box_bound=10.0, tol=1e-8)
        npt.assert_allclose(model.dual_coeffs, [2.0, 2.0], atol=1e-8)
        assert abs(model.bias) < 1e-8
        for row, expected in [([1.0, 0.5], 1.0), ([0.5, 1.0], -1.0)]:
            score, label = decide(model, row)
            assert score == pytest.approx(expected, abs=1e-8)
            assert label == (1 if expected > 0 else -1)

    def test_identity_gram(self):
        model = train(np.eye(2), [1, -1], box_bound=10.0)
        npt.assert_allclose(model.dual_coeffs, [1.0, 1.0], atol=1e-8)
        assert abs(model.bias) < 1e-8

    def test_brute_force_agrees_on_two_point_case(self):
        gram = np.array([[1.0, 0.5], [0.5, 1.0]])
        oracle = brute_force_qp(gram, [1, -1], box_bound=10.0)
        npt.assert_allclose(oracle.dual_coeffs, [2.0, 2.0], atol=1e-6)
        assert abs(oracle.bias) < 1e-6


class TestFeasibilityInvariants:
    def test_box_and_equality_constraints(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            K, y = random_instance(rng)
            C = float(rng.choice([0.5, 1.0, 10.0]))
            model = train(K, y, box_bound=C)
            assert np.all(model.dual_coeffs >= 0.0)
            assert np.all(model.dual_coeffs <= C)
            assert abs(np.dot(model.dual_coeffs, model.labels)) <= 1e-8

    def test_kkt_gap_below_tolerance(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            K, y = random_instance(rng)
            model = train(K, y, box_bound=5.0, tol=1e-10)
            assert kkt_gap(K, y, model.dual_coeffs, 5.0) <= 1e-8

    def test_free_support_vectors_sit_on_margin(self):
        rng = np.random.default_rng(3)
        K, y = random_instance(rng, size=8)
        model = train(K, y, box_bound=10.0, tol=1e-10)
        u = K @ (model.dual_coeffs * model.labels) + model.bias
        free = (model.dual_coeffs > 1e-9) & (model.dual_coeffs < 10.0 - 1e-9)
        assert np.all(y[free] * u[free] >= 1.0 - 1e-6)


class TestOracleEquivalence:
    def test_decision_values_match_on_50_instances(self):
        rng = np.random.default_rng(7)
        checked = 0
        while checked < 50:
            K, y = random_instance(rng)
            C = float(rng.choice([0.5, 1.0, 10.0]))
            fast = train(K, y, box_bound=C, tol=1e-10)
            slow = brute_force_qp(K, y, C, tol=1e-10)
            u_fast = K @ (fast.dual_coeffs * fast.labels) + fast.bias
            u_slow = K @ (slow.dual_coeffs * slow.labels) + slow.bias
            npt.assert_allclose(u_fast, u_slow, atol=1e-4)
            checked += 1

    def test_labels_match_on_unseen_rows(self):
        rng = np.random.default_rng(8)
        K, y = random_instance(rng, size=6)
        fast = train(K, y, box_bound=1.0, tol=1e-10)
        slow = brute_force_qp(K, y, 1.0)
        for _ in range(20):
            row = rng.uniform(0.0, 1.0, size=6)
            score_f, label_f = decide(fast, row)
            score_s, label_s = decide(slow, row)
            assert abs(score_f - score_s) < 1e-4
            if abs(score_f) > 1e-3:
                assert label_f == label_s


class TestBruteForceOracle:
    def test_refuses_large_problems(self):
        with pytest.raises(StructuralError):
            brute_force_qp(np.eye(9), [1] * 8 + [-1], 1.0)

    def test_zero_box_bound_returns_zero_vector(self):
        with pytest.warns(UserWarning):
            model = brute_force_qp(np.eye(4), [1, 1, -1, -1], 0.0)
        npt.assert_array_equal(model.dual_coeffs, np.zeros(4))
        assert model.support_count == 0


class TestSolverProperties:
    def test_objective_monotone_nondecreasing(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            K, y = random_instance(rng, size=8)
            history = []
            train(K, y, box_bound=5.0, objective_history=history)
            assert len(history) >= 1
            diffs = np.diff(history)
            assert np.all(diffs >= -1e-10)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(10)
        K, y = random_instance(rng, size=7)
        model = train(K, y, box_bound=2.0, tol=1e-10)
        perm = rng.permutation(7)
        model_p = train(K[np.ix_(perm, perm)], y[perm], box_bound=2.0, tol=1e-10)
        npt.assert_allclose(model_p.dual_coeffs, model.dual_coeffs[perm], atol=1e-6)
        for _ in range(10):
            row = rng.uniform(0.0, 1.0, size=7)
            assert decide(model, row)[1] == decide(model_p, row[perm])[1]

    def test_deterministic_rerun(self):
        rng = np.random.default_rng(11)
        K, y = random_instance(rng, size=8)
        a = train(K, y, box_bound=3.0)
        b = train(K, y, box_bound=3.0)
        npt.assert_array_equal(a.dual_coeffs, b.dual_coeffs)
        assert a.bias == b.bias

    def test_indefinite_sampled_gram_trains_to_feasible_point(self):
        oracles = [IndicatorOracle(32, v) for v in (0, 2, 4, 6, 16, 18, 20, 22)]
        gram = gram_matrix(oracles, 8, KernelMode.sampled(2), rng_seed=1)
        labels = np.array([1, 1, 1, 1, -1, -1, -1, -1])
        assert np.linalg.eigvalsh(gram.entries)[0] < 0  # genuinely indefinite input
        model = train(gram, labels, box_bound=1.0)
        assert np.all(model.dual_coeffs >= 0) and np.all(model.dual_coeffs <= 1.0)
        assert abs(np.dot(model.dual_coeffs, model.labels)) <= 1e-8

    def test_objective_matches_helper(self):
        rng = np.random.default_rng(12)
        K, y = random_instance(rng, size=5)
        history = []
        model = train(K, y, box_bound=4.0, objective_history=history)
        assert history[-1] == pytest.approx(dual_objective(K, y, model.dual_coeffs), abs=1e-9)


class TestDecide:
    def test_zero_row_returns_bias(self):
        model = train(np.array([[1.0, 0.5], [0.5, 1.0]]), [1, -1], box_bound=10.0)
        score, label = decide(model, [0.0, 0.0])
        assert score == model.bias
        assert label == 1  # bias 0, ties go positive

    def test_scaling_preserves_labels(self):
        model = train(np.array([[1.0, 0.25], [0.25, 1.0]]), [1, -1], box_bound=10.0)
        scaled = type(model)(
            dual_coeffs=3.0 * model.dual_coeffs,
            labels=model.labels,
            bias=3.0 * model.bias,
            support_indices=model.support_indices,
            box_bound=model.box_bound,
        )
        rng = np.random.default_rng(13)
        for _ in range(25):
            row = rng.uniform(0.0, 1.0, size=2)
            assert decide(model, row)[1] == decide(scaled, row)[1]

    def test_length_mismatch_rejected(self):
        model = train(np.eye(2), [1, -1], box_bound=1.0)
        with pytest.raises(StructuralError):
            decide(model, [1.0, 0.0, 0.0])


class TestValidation:
    def test_single_class_rejected(self):
        with pytest.raises(DegenerateProblemError):
            train(np.eye(3), [1, 1, 1], box_bound=1.0)

    def test_asymmetric_gram_rejected(self):
        with pytest.raises(ContractViolationError):
            train(np.array([[1.0, 0.2], [0.4, 1.0]]), [1, -1], box_bound=1.0)

    def test_nonpositive_box_bound_rejected(self):
        with pytest.raises(StructuralError):
            train(np.eye(2), [1, -1], box_bound=0.0)

    def test_bad_labels_rejected(self):
        with pytest.raises(StructuralError):
            train(np.eye(2), [1, 2], box_bound=1.0)
