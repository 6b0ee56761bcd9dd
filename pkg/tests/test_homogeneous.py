import math

import numpy as np
import pytest

from hsda.errors import MaxItersExceeded
from hsda.homogeneous import (HomogenizedOperator, build_G,
                              check_optimality, classify_direction,
                              conditioning_report, lanczos_min_eigenpair,
                              solve_exact)

GOLDEN_DELTA = (1.0 + math.sqrt(5.0)) / 2.0


def _matrix_op(H, g, alpha):
    return HomogenizedOperator(h_action=lambda v: H @ v,
                               g=np.asarray(g, dtype=float), alpha=alpha)


def _random_instance(rng, n, scale=1.0):
    A = rng.standard_normal((n, n))
    H = 0.5 * (A + A.T) * scale
    g = rng.standard_normal(n) * scale
    alpha = float(rng.uniform(0.05, 1.0))
    return H, g, alpha


class TestSolveExact:
    def test_gradient_free_psd_block(self):
        p = solve_exact(np.diag([1.0, 2.0]), np.zeros(2), alpha=3.0)
        assert p.delta == pytest.approx(3.0, abs=1e-12)
        np.testing.assert_allclose(p.u, np.zeros(2), atol=1e-12)
        assert p.v == pytest.approx(1.0, abs=1e-12)

    def test_gradient_free_negative_curvature(self):
        p = solve_exact(np.diag([-2.0, 1.0]), np.zeros(2), alpha=1.0)
        assert p.delta == pytest.approx(2.0, abs=1e-12)
        # v = 0: sign convention makes the first nonzero entry of u positive
        np.testing.assert_allclose(p.u, [1.0, 0.0], atol=1e-12)
        assert p.v == pytest.approx(0.0, abs=1e-12)

    def test_golden_ratio_2x2(self):
        # G = [[0, 1], [1, -1]]: characteristic root gives delta=(1+sqrt5)/2
        p = solve_exact(np.zeros((1, 1)), np.array([1.0]), alpha=1.0)
        assert p.delta == pytest.approx(GOLDEN_DELTA, abs=1e-12)
        assert p.delta > 1.0

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(ValueError):
            solve_exact(np.eye(2), np.zeros(2), alpha=0.0)

    def test_delta_dominates_alpha(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            H, g, alpha = _random_instance(rng, 8)
            p = solve_exact(H, g, alpha)
            assert p.delta >= alpha - 1e-12
            if np.linalg.norm(g) > 1e-12:
                assert p.delta > alpha
            assert p.v >= 0.0

    def test_gradient_free_delta_is_max(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            H, _, alpha = _random_instance(rng, 6)
            p = solve_exact(H, np.zeros(6), alpha)
            lam1 = np.linalg.eigvalsh(H)[0]
            assert p.delta == pytest.approx(max(alpha, -lam1), abs=1e-10)


class TestCheckOptimality:
    def test_exact_solutions_have_tiny_residuals(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            H, g, alpha = _random_instance(rng, 7)
            p = solve_exact(H, g, alpha)
            rep = check_optimality(p, H, g, alpha)
            assert rep.within(1e-8)
            assert rep.delta_ge_alpha
            assert rep.delta_gt_alpha

    def test_golden_ratio_analytic(self):
        p = solve_exact(np.zeros((1, 1)), np.array([1.0]), alpha=1.0)
        rep = check_optimality(p, np.zeros((1, 1)), np.array([1.0]), 1.0)
        assert rep.r1 <= 1e-14 and rep.r2 <= 1e-14

    def test_detects_perturbed_vector(self):
        H = np.zeros((1, 1))
        g = np.array([1.0])
        p = solve_exact(H, g, alpha=1.0)
        from hsda.homogeneous import ExactEigenpair
        bad = ExactEigenpair(delta=p.delta, u=p.u + 1e-2, v=p.v)
        rep = check_optimality(bad, H, g, 1.0)
        assert rep.r1 >= 1e-3

    def test_accepts_callable_action(self):
        H = np.diag([1.0, -0.5])
        g = np.array([0.3, 0.1])
        p = solve_exact(H, g, alpha=0.2)
        rep = check_optimality(p, lambda v: H @ v, g, 0.2)
        assert rep.within(1e-8)


class TestOperator:
    def test_apply_matches_dense(self):
        rng = np.random.default_rng(3)
        H, g, alpha = _random_instance(rng, 9)
        op = _matrix_op(H, g, alpha)
        G = build_G(H, g, alpha)
        for _ in range(10):
            w = rng.standard_normal(10)
            np.testing.assert_allclose(op.apply(w), G @ w, atol=1e-12)

    def test_symmetry_probe(self):
        rng = np.random.default_rng(4)
        H, g, alpha = _random_instance(rng, 6)
        op = _matrix_op(H, g, alpha)
        for _ in range(20):
            a = rng.standard_normal(7)
            b = rng.standard_normal(7)
            assert abs(a @ op.apply(b) - b @ op.apply(a)) <= 1e-10 * (
                np.linalg.norm(a) * np.linalg.norm(b))


class TestLanczos:
    def test_identity_block_terminates_fast(self):
        n = 12
        op = _matrix_op(np.eye(n), np.zeros(n), alpha=1.0)
        pair = lanczos_min_eigenpair(op, e_budget=1e-10, seed=0)
        assert pair.lanczos_iters <= 2
        assert pair.zeta == pytest.approx(1.0, abs=1e-10)
        assert pair.v_hat == pytest.approx(1.0, abs=1e-8)
        assert np.linalg.norm(pair.k) <= 1e-10
        assert abs(pair.rho) <= 1e-10

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(5)
        for trial in range(30):
            n = int(rng.integers(2, 51))
            H, g, alpha = _random_instance(rng, n)
            pair = lanczos_min_eigenpair(_matrix_op(H, g, alpha),
                                         e_budget=1e-8, seed=trial)
            dense = solve_exact(H, g, alpha)
            assert abs(pair.zeta - dense.delta) <= 1e-8

    def test_ritz_identity_and_orthogonality(self):
        rng = np.random.default_rng(6)
        for trial in range(30):
            n = int(rng.integers(2, 40))
            H, g, alpha = _random_instance(rng, n)
            op = _matrix_op(H, g, alpha)
            pair = lanczos_min_eigenpair(op, e_budget=1e-6, seed=trial)
            z = np.concatenate([pair.u_hat, [pair.v_hat]])
            res = np.concatenate([pair.k, [pair.rho]])
            np.testing.assert_allclose(op.apply(z) + pair.zeta * z, res,
                                       atol=1e-10)
            assert abs(pair.k @ pair.u_hat + pair.rho * pair.v_hat) <= 1e-10
            assert abs(np.linalg.norm(z) - 1.0) <= 1e-12
            assert pair.v_hat >= 0.0

    def test_gap_certificate_with_floor(self):
        rng = np.random.default_rng(7)
        H = np.diag(np.concatenate([[-2.0], rng.uniform(0.0, 1.0, 29)]))
        g = rng.standard_normal(30) * 0.1
        op = _matrix_op(H, g, alpha=0.5)
        pair = lanczos_min_eigenpair(op, e_budget=1e-10, seed=1,
                                     gap_floor=0.5)
        dense = solve_exact(H, g, 0.5)
        assert abs(pair.zeta - dense.delta) <= 1e-8

    def test_iteration_count_against_conditioning(self):
        # separated bottom eigenvalue: gap-dependent convergence bound
        rng = np.random.default_rng(8)
        n = 30
        H = np.diag(np.concatenate([[-1.5], rng.uniform(0.5, 1.0, n - 1)]))
        g = rng.standard_normal(n) * 0.2
        alpha = 0.3
        e_budget = 1e-8
        pair = lanczos_min_eigenpair(_matrix_op(H, g, alpha), e_budget, seed=2)
        rep = conditioning_report(H, g, alpha, eps_N=1e-8)
        bound = math.ceil(math.sqrt(rep.kappa_L)
                          * math.log(2.0 * (n + 1) / e_budget)) + 5
        assert pair.lanczos_iters <= bound

    def test_max_iters_carries_best_pair(self):
        rng = np.random.default_rng(9)
        H, g, alpha = _random_instance(rng, 40)
        with pytest.raises(MaxItersExceeded) as excinfo:
            lanczos_min_eigenpair(_matrix_op(H, g, alpha), e_budget=1e-14,
                                  max_iters=3, seed=0)
        best = excinfo.value.best
        assert best is not None
        assert best.lanczos_iters == 3

    def test_rejects_nonpositive_budget(self):
        op = _matrix_op(np.eye(2), np.zeros(2), 1.0)
        with pytest.raises(ValueError):
            lanczos_min_eigenpair(op, e_budget=0.0)

    def test_bulk_accuracy_rate(self):
        # at least 99% of seeded desk-scale instances within the budget
        rng = np.random.default_rng(10)
        hits = 0
        total = 200
        for trial in range(total):
            n = int(rng.integers(2, 51))
            H, g, alpha = _random_instance(rng, n)
            pair = lanczos_min_eigenpair(_matrix_op(H, g, alpha),
                                         e_budget=1e-8, seed=1000 + trial)
            dense = solve_exact(H, g, alpha)
            if abs(pair.zeta - dense.delta) <= 1e-8:
                hits += 1
        assert hits >= math.ceil(0.99 * total)


class TestClassifyDirection:
    def test_ratio_branch(self):
        s, branch = classify_direction(np.array([0.6, 0.0]), 0.8,
                                       np.zeros(2), omega=0.4)
        np.testing.assert_allclose(s, [0.75, 0.0])
        assert branch == "ratio"

    def test_curvature_branch_sign(self):
        u = np.array([0.99499, 0.0])
        s, branch = classify_direction(u, 0.1, np.array([1.0, 0.0]),
                                       omega=0.4)
        np.testing.assert_allclose(s, -u)
        assert branch == "curvature"

    def test_sign_tie_is_positive(self):
        u = np.array([0.3, -0.1])
        s, _ = classify_direction(u, 0.0, np.zeros(2), omega=0.4)
        np.testing.assert_allclose(s, u)

    def test_zero_direction_case(self):
        s, branch = classify_direction(np.zeros(2), 1.0, np.ones(2),
                                       omega=0.4)
        np.testing.assert_allclose(s, np.zeros(2))
        assert branch == "ratio"


class TestConditioningReport:
    def test_hand_computed_spectrum(self):
        rep = conditioning_report(np.diag([0.0, 1.0]), np.zeros(2),
                                  alpha=1.0, eps_N=0.5)
        assert rep.kappa_L == pytest.approx(2.0, abs=1e-12)

    def test_newton_blows_up_kappa_L_stays_finite(self):
        H = np.diag([0.0, 1.0])
        g = np.array([0.3, 0.2])
        rep = conditioning_report(H, g, alpha=0.2, eps_N=0.0)
        assert rep.kappa_newton == np.inf
        assert np.isfinite(rep.kappa_L)

    def test_identity_is_perfectly_conditioned(self):
        rep = conditioning_report(np.eye(2), np.zeros(2), alpha=1.0,
                                  eps_N=1.0)
        assert rep.kappa_newton == pytest.approx(1.0)
        assert rep.kappa_L == pytest.approx(1.0)

    def test_degenerate_spectrum_reports_inf(self):
        rep = conditioning_report(-np.eye(2), np.zeros(2), alpha=1.0,
                                  eps_N=1e-8)
        assert rep.degenerate
        assert rep.kappa_L == np.inf

    def test_upper_bound_in_operating_regime(self):
        # lambda_1(H) = 0, alpha = sqrt(L2 eps) scale, Gaussian gradient
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(2, 40))
            evals = np.sort(np.concatenate([[0.0],
                                            rng.uniform(0.1, 5.0, n - 1)]))
            basis, _ = np.linalg.qr(rng.standard_normal((n, n)))
            H = basis @ np.diag(evals) @ basis.T
            H = 0.5 * (H + H.T)
            g = rng.standard_normal(n)
            alpha = math.sqrt(2.0 * rng.uniform(1e-3, 1e-2))
            rep = conditioning_report(H, g, alpha, eps_N=1e-8)
            assert rep.kappa_L <= rep.kappa_L_bound * (1.0 + 1e-6)
