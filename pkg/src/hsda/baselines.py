"""Plain gradient descent ascent, for comparison runs."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import NumericalOverflow
from .inner_ascent import OVERFLOW_LIMIT
from .oracle import Array, ProblemOracle, SmoothnessConstants
from .trace import (SNAPSHOT_DIM_LIMIT, TERMINATION_MAX_OUTER, IterateTrace,
                    StepRecord, f_gap_at, finalize_trace)


@dataclass(frozen=True)
class GdaConfig:
    """Step sizes and the ascent/descent interleaving."""

    step_x: float
    step_y: float
    ascent_steps_per_descent: int = 1
    max_outer: int = 200
    snapshots: bool = False

    def __post_init__(self):
        if self.step_x < 0 or self.step_y < 0:
            raise ValueError("step sizes must be nonnegative")
        if self.ascent_steps_per_descent < 1:
            raise ValueError("need at least one ascent step per descent")

    @classmethod
    def from_constants(cls, constants: SmoothnessConstants,
                       **kwargs) -> "GdaConfig":
        step = 1.0 / constants.ell1
        return cls(step_x=kwargs.pop("step_x", step),
                   step_y=kwargs.pop("step_y", step), **kwargs)


def gda_run(oracle: ProblemOracle, config: GdaConfig, x1: Array,
            y0: Array) -> IterateTrace:
    """Alternate plain ascent steps on y with one descent step on x.

    Emits the same trace schema as the second-order drivers (the
    eigen-related columns stay empty) so comparisons line up.
    """
    trace = IterateTrace(algorithm="gda")
    snapshots = config.snapshots and oracle.dim_x <= SNAPSHOT_DIM_LIMIT
    x = np.array(x1, dtype=float, copy=True)
    y = np.array(y0, dtype=float, copy=True)

    for t in range(1, config.max_outer + 1):
        tic = time.perf_counter()
        for _ in range(config.ascent_steps_per_descent):
            y = y + config.step_y * oracle.grad_y(x, y)
            if np.linalg.norm(y) > OVERFLOW_LIMIT:
                raise NumericalOverflow("ascent iterate overflow in GDA")
        g = oracle.grad_x(x, y)
        step = -config.step_x * g
        trace.records.append(StepRecord(
            t=t, f_gap=f_gap_at(oracle, x),
            grad_norm=float(np.linalg.norm(g)), v_abs=None,
            delta_or_zeta=None, step_norm=float(np.linalg.norm(step)),
            inner_iters=config.ascent_steps_per_descent, lanczos_iters=0,
            hvp_cum=0, wall_ms=(time.perf_counter() - tic) * 1e3,
            x=np.array(x, copy=True) if snapshots else None))
        x = x + step
        if np.linalg.norm(x) > OVERFLOW_LIMIT:
            raise NumericalOverflow("descent iterate overflow in GDA")

    trace.termination = TERMINATION_MAX_OUTER
    trace.certified = False
    return finalize_trace(trace, oracle, x, y)
