import numpy as np
import pytest

from hsda.baselines import GdaConfig, gda_run
from hsda.problems import (QuadraticMinimaxParams, WToyParams, make_quadratic,
                           make_wtoy, wtoy_analytic_constants)
from hsda.trace import TERMINATION_MAX_OUTER


def wtoy_saddle_steps():
    """Two-timescale step sizes that reproduce saddle stagnation."""
    c = wtoy_analytic_constants(WToyParams())
    return GdaConfig(step_x=1.0 / ((1.0 + c.kappa) ** 2 * c.ell1),
                     step_y=1.0 / c.ell1, max_outer=200)


class TestConfig:
    def test_rejects_negative_steps(self):
        with pytest.raises(ValueError):
            GdaConfig(step_x=-0.1, step_y=0.1)

    def test_rejects_zero_ascent_budget(self):
        with pytest.raises(ValueError):
            GdaConfig(step_x=0.1, step_y=0.1, ascent_steps_per_descent=0)

    def test_default_steps_from_constants(self):
        c = wtoy_analytic_constants(WToyParams())
        cfg = GdaConfig.from_constants(c, max_outer=10)
        assert cfg.step_x == pytest.approx(1.0 / c.ell1)
        assert cfg.step_y == pytest.approx(1.0 / c.ell1)


class TestRuns:
    def test_converges_on_well_conditioned_quadratic(self):
        oracle = make_quadratic(
            QuadraticMinimaxParams(dim_x=3, dim_y=3), seed=17)
        cfg = GdaConfig.from_constants(oracle.constants, max_outer=3000)
        rng = np.random.default_rng(17)
        trace = gda_run(oracle, cfg, rng.standard_normal(3), np.zeros(3))
        gaps = [r.f_gap for r in trace.records]
        assert trace.final_f_gap <= 1e-6
        # monotone decrease after the y-tracking transient
        tail = gaps[len(gaps) // 2:] + [trace.final_f_gap]
        assert all(b <= a + 1e-12 for a, b in zip(tail, tail[1:]))

    def test_wtoy_stays_flat_near_saddle(self):
        oracle = make_wtoy(WToyParams())
        trace = gda_run(oracle, wtoy_saddle_steps(),
                        np.array([0.1, 0.1, 0.1]), np.zeros(2))
        gap0 = trace.records[0].f_gap
        assert trace.outer_iters == 200
        assert (gap0 - trace.final_f_gap) < 0.10 * gap0

    def test_frozen_x_when_step_is_zero(self):
        oracle = make_wtoy(WToyParams())
        cfg = GdaConfig(step_x=0.0, step_y=0.1, max_outer=50,
                        snapshots=True)
        trace = gda_run(oracle, cfg, np.array([0.3, -0.2, 0.1]), np.zeros(2))
        for r in trace.records:
            np.testing.assert_array_equal(r.x, [0.3, -0.2, 0.1])
            assert r.step_norm == 0.0

    def test_trace_schema_matches_second_order_drivers(self):
        oracle = make_wtoy(WToyParams())
        cfg = GdaConfig(step_x=0.01, step_y=0.01, max_outer=5)
        trace = gda_run(oracle, cfg, np.array([0.1, 0.1, 0.1]), np.zeros(2))
        assert trace.termination == TERMINATION_MAX_OUTER
        r = trace.records[0]
        assert r.v_abs is None and r.delta_or_zeta is None
        assert r.lanczos_iters == 0 and r.hvp_cum == 0
        assert r.inner_iters == 1
