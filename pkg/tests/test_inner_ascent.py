import math

import numpy as np
import pytest

from hsda.errors import NumericalOverflow
from hsda.inner_ascent import AscentSchedule, iteration_count, run_ascent
from hsda.oracle import H_dense, ProblemOracle, SmoothnessConstants
from hsda.problems import QuadraticMinimaxParams, make_quadratic


def _schedule(mu, ell1, ell2, eps1, eps2):
    return AscentSchedule.from_constants(
        SmoothnessConstants(mu=mu, ell1=ell1, ell2=ell2), eps1, eps2)


def _concave_quadratic(ell, c):
    # f = -(ell/2) |y - c|^2
    c = np.asarray(c, dtype=float)
    return ProblemOracle(
        dim_x=1, dim_y=c.shape[0],
        f=lambda x, y: -0.5 * ell * float((y - c) @ (y - c)),
        grad_x=lambda x, y: np.zeros(1),
        grad_y=lambda x, y: -ell * (y - c),
        hess_xx_vec=lambda x, y, v: np.zeros(1),
        hess_xy_vec=lambda x, y, w: np.zeros(1),
        hess_yx_vec=lambda x, y, v: np.zeros(c.shape[0]),
        hess_yy_vec=lambda x, y, w: -ell * w,
        constants=SmoothnessConstants(mu=ell, ell1=ell, ell2=0.0))


class TestSchedule:
    def test_momentum_and_budget(self):
        s = _schedule(mu=1.0, ell1=4.0, ell2=0.5, eps1=0.1, eps2=0.2)
        assert s.eta1 == 0.25
        assert s.eta2 == pytest.approx((2.0 - 1.0) / (2.0 + 1.0))
        # A = min(eps1/ell1, eps2/(2 LH)), LH = 0.5 * 25
        assert s.A == pytest.approx(min(0.1 / 4.0, 0.2 / 25.0))
        assert 0.0 <= s.eta2 < 1.0
        assert s.A > 0

    def test_zero_curvature_uses_gradient_branch(self):
        s = _schedule(mu=1.0, ell1=2.0, ell2=0.0, eps1=0.3, eps2=0.2)
        assert s.A == pytest.approx(0.15)

    def test_kappa_one_has_no_momentum(self):
        s = _schedule(mu=2.0, ell1=2.0, ell2=0.0, eps1=0.1, eps2=0.1)
        assert s.eta2 == 0.0


class TestIterationCount:
    def test_first_call_formula(self):
        # kappa=4, warm=1, A=0.1: ceil(4 ln(sqrt(5) * 10)) = 13
        s = AscentSchedule(eta1=1.0, eta2=0.0, eps1=0.1, eps2=0.1, A=0.1,
                           kappa=4.0, N_cap=10_000)
        assert iteration_count(s, is_first=True, warm_dist=1.0) == 13

    def test_zero_warm_subsequent(self):
        s = AscentSchedule(eta1=1.0, eta2=0.0, eps1=0.1, eps2=0.1, A=0.1,
                           kappa=4.0, N_cap=10_000)
        expected = math.ceil(2.0 * 2.0 * math.log(math.sqrt(5.0)))
        assert iteration_count(s, is_first=False, warm_dist=0.0) == expected

    def test_already_within_budget_clamps_to_one(self):
        s = AscentSchedule(eta1=1.0, eta2=0.0, eps1=0.1, eps2=0.1, A=10.0,
                           kappa=1.0, N_cap=10_000)
        assert iteration_count(s, is_first=True, warm_dist=1e-9) == 1

    def test_cap_applies(self):
        s = AscentSchedule(eta1=1.0, eta2=0.0, eps1=0.1, eps2=0.1, A=1e-12,
                           kappa=100.0, N_cap=17)
        assert iteration_count(s, is_first=True, warm_dist=1e6) == 17


class TestRunAscent:
    def test_single_exact_step_when_kappa_one(self):
        c = np.array([1.5, -2.0, 0.25])
        oracle = _concave_quadratic(3.0, c)
        s = AscentSchedule.from_constants(oracle.constants, 0.1, 0.1)
        info = run_ascent(oracle, np.zeros(1), np.array([5.0, 5.0, 5.0]), s, 1)
        np.testing.assert_allclose(info.y_t, c, atol=1e-14)
        assert info.N_used == 1

    def test_reaches_accuracy_budget_on_quadratic(self):
        oracle = make_quadratic(QuadraticMinimaxParams(dim_x=5, dim_y=4),
                                seed=2)
        s = AscentSchedule.from_constants(oracle.constants, 1e-4, 1e-3)
        x = np.array([0.4, -0.2, 0.1, 0.0, 0.3])
        y0 = np.zeros(4)
        warm = float(np.linalg.norm(y0 - oracle.closed_form.y_star(x)))
        N = iteration_count(s, is_first=True, warm_dist=max(warm, 1e-6))
        info = run_ascent(oracle, x, y0, s, N)
        assert np.linalg.norm(info.y_t - oracle.closed_form.y_star(x)) <= s.A

    def test_rejects_zero_steps(self, wtoy):
        s = AscentSchedule.from_constants(wtoy.constants, 0.1, 0.1)
        with pytest.raises(ValueError):
            run_ascent(wtoy, np.zeros(3), np.zeros(2), s, 0)

    def test_overflow_guard(self):
        # ascent on a convex (wrong-sign) objective diverges
        oracle = ProblemOracle(
            dim_x=1, dim_y=1,
            f=lambda x, y: float(y[0] ** 2),
            grad_x=lambda x, y: np.zeros(1),
            grad_y=lambda x, y: 2.0 * y,
            hess_xx_vec=lambda x, y, v: np.zeros(1),
            hess_xy_vec=lambda x, y, w: np.zeros(1),
            hess_yx_vec=lambda x, y, v: np.zeros(1),
            hess_yy_vec=lambda x, y, w: 2.0 * w)
        s = AscentSchedule(eta1=1.0, eta2=0.5, eps1=0.1, eps2=0.1, A=0.1,
                           kappa=4.0, N_cap=10_000)
        with pytest.raises(NumericalOverflow):
            run_ascent(oracle, np.zeros(1), np.array([1.0]), s, 200)


class TestAccuracyProperties:
    def test_gradient_and_hessian_surrogates(self):
        # eps1/eps2 accuracy once y is within A of the maximizer
        for seed in range(5):
            oracle = make_quadratic(
                QuadraticMinimaxParams(dim_x=6, dim_y=5), seed=seed)
            eps1, eps2 = 1e-3, 1e-2
            s = AscentSchedule.from_constants(oracle.constants, eps1, eps2)
            rng = np.random.default_rng(seed)
            x = rng.standard_normal(6) * 0.5
            y0 = rng.standard_normal(5) * 0.5
            warm = float(np.linalg.norm(y0 - oracle.closed_form.y_star(x)))
            N = iteration_count(s, is_first=True, warm_dist=max(warm, 1e-6))
            info = run_ascent(oracle, x, y0, s, N)
            cf = oracle.closed_form
            assert np.linalg.norm(info.y_t - cf.y_star(x)) <= s.A
            assert np.linalg.norm(cf.grad_F(x) - info.g_t) <= eps1
            H = H_dense(oracle, x, info.y_t)
            assert np.linalg.norm(cf.hess_F(x) - H, ord=2) <= eps2

    def test_contraction_rate_on_quadratics(self):
        # distance bound sqrt(kappa+1) (1 - 1/sqrt(kappa))^{N/2} d0, 2x slack
        for seed, kappa in [(0, 4.0), (1, 25.0), (2, 100.0)]:
            m = 6
            rng = np.random.default_rng(seed)
            mu, ell = 1.0, kappa
            evals = np.linspace(mu, ell, m)
            basis, _ = np.linalg.qr(rng.standard_normal((m, m)))
            P = basis @ np.diag(evals) @ basis.T
            c = rng.standard_normal(m)

            oracle = ProblemOracle(
                dim_x=1, dim_y=m,
                f=lambda x, y: -0.5 * float((y - c) @ (P @ (y - c))),
                grad_x=lambda x, y: np.zeros(1),
                grad_y=lambda x, y: -P @ (y - c),
                hess_xx_vec=lambda x, y, v: np.zeros(1),
                hess_xy_vec=lambda x, y, w: np.zeros(1),
                hess_yx_vec=lambda x, y, v: np.zeros(m),
                hess_yy_vec=lambda x, y, w: -P @ w,
                constants=SmoothnessConstants(mu=mu, ell1=ell, ell2=0.0))
            s = AscentSchedule.from_constants(oracle.constants, 1e-8, 1e-8)
            y0 = c + rng.standard_normal(m)
            d0 = float(np.linalg.norm(y0 - c))
            for N in (10, 30, 60):
                info = run_ascent(oracle, np.zeros(1), y0, s, N)
                dist = float(np.linalg.norm(info.y_t - c))
                bound = (math.sqrt(kappa + 1.0)
                         * (1.0 - 1.0 / math.sqrt(kappa)) ** (N / 2.0) * d0)
                assert dist <= 2.0 * bound
