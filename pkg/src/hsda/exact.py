"""Outer loop with exact dense eigensolves of the homogenized subproblem.

Per iteration: warm-started accelerated ascent on y, a dense build of the
Schur surrogate, the smallest eigenpair of the lifted matrix, and either a
normalized step of length Lambda or the terminal ratio step once the
lifted component of the eigenvector crosses sqrt(1 / (1 + Lambda^2)).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .homogeneous import classify_direction, solve_exact
from .inner_ascent import AscentSchedule, iteration_count, run_ascent
from .oracle import Array, H_dense, ProblemOracle, SmoothnessConstants
from .trace import (SNAPSHOT_DIM_LIMIT, TERMINATION_MAX_OUTER,
                    TERMINATION_V_THRESHOLD, IterateTrace, StepRecord,
                    f_gap_at, finalize_trace)

#: Direction norms below this are treated as already-terminal; a zero
#: direction cannot occur for a unit eigenvector with |v| below threshold.
ZERO_DIRECTION_GUARD = 1e-14


@dataclass(frozen=True)
class HsdaConfig:
    """Target accuracy and the derived step-size schedule."""

    eps: float
    alpha: float
    Lambda: float
    omega: float
    eps1: float
    eps2: float
    max_outer: int
    warm_dist: float
    snapshots: bool

    @classmethod
    def from_accuracy(cls, eps: float, constants: SmoothnessConstants,
                      omega: float = 0.3, max_outer: int = 200,
                      warm_dist: float = 10.0,
                      snapshots: Optional[bool] = None) -> "HsdaConfig":
        L2 = constants.L2
        if L2 <= 0:
            raise ValueError("schedule requires L2 > 0; supply a positive ell2")
        if not 0 < eps <= min(L2 / 2.0, 1.0):
            raise ValueError(
                f"eps must be in (0, min(L2/2, 1)] = (0, {min(L2 / 2.0, 1.0)}], "
                f"got {eps}")
        if not 0 < omega < 0.5:
            raise ValueError(f"omega must be in (0, 1/2), got {omega}")
        if warm_dist <= 0:
            raise ValueError("warm_dist must be positive")
        Lambda = math.sqrt(eps / L2)
        assert Lambda <= math.sqrt(2.0) / 2.0 + 1e-12
        return cls(eps=eps, alpha=math.sqrt(L2 * eps), Lambda=Lambda,
                   omega=omega, eps1=eps / 12.0,
                   eps2=math.sqrt(L2 * eps) / 12.0, max_outer=max_outer,
                   warm_dist=warm_dist,
                   snapshots=bool(snapshots) if snapshots is not None else False)

    @property
    def v_threshold(self) -> float:
        return math.sqrt(1.0 / (1.0 + self.Lambda ** 2))


@dataclass
class ExactStep:
    """Everything one exact outer iteration produced.

    ``step`` is the actual displacement x_next - x_t.
    """

    x_next: Array
    info: object
    pair: object
    step: Array
    branch: str
    terminal: bool
    inner_iters: int


def hsda_step(oracle: ProblemOracle, constants: SmoothnessConstants,
              config: HsdaConfig, x_t: Array, y_prev: Array, warm: float,
              is_first: bool = False,
              schedule: Optional[AscentSchedule] = None) -> ExactStep:
    """One outer iteration: ascent, dense eigensolve, classified step."""
    if schedule is None:
        schedule = AscentSchedule.from_constants(constants, config.eps1,
                                                 config.eps2)
    N = iteration_count(schedule, is_first, warm)
    info = run_ascent(oracle, x_t, y_prev, schedule, N)
    H = H_dense(oracle, x_t, info.y_t)
    pair = solve_exact(H, info.g_t, config.alpha)
    s, branch = classify_direction(pair.u, pair.v, info.g_t, config.omega)

    if abs(pair.v) > config.v_threshold:
        return ExactStep(x_next=x_t + s, info=info, pair=pair, step=s,
                         branch=branch, terminal=True, inner_iters=N)

    s_norm = float(np.linalg.norm(s))
    if s_norm < ZERO_DIRECTION_GUARD:
        # numerical guard only: with ||[u; v]|| = 1 and |v| <= threshold < 1
        # the direction has positive norm
        return ExactStep(x_next=x_t.copy(), info=info, pair=pair,
                         step=np.zeros_like(s), branch=branch, terminal=True,
                         inner_iters=N)
    tau = config.Lambda / s_norm
    return ExactStep(x_next=x_t + tau * s, info=info, pair=pair,
                     step=tau * s, branch=branch, terminal=False,
                     inner_iters=N)


def hsda_run(oracle: ProblemOracle, constants: SmoothnessConstants,
             config: HsdaConfig, x1: Array, y0: Array) -> IterateTrace:
    """Iterate to the lifted-component stopping rule or the outer cap.

    If the cap is hit first, the returned trace is uncertified and its
    final iterate is the one with the smallest observed gradient-surrogate
    norm.
    """
    trace = IterateTrace(algorithm="hsda")
    schedule = AscentSchedule.from_constants(constants, config.eps1,
                                             config.eps2)
    snapshots = config.snapshots and oracle.dim_x <= SNAPSHOT_DIM_LIMIT

    x_t = np.array(x1, dtype=float, copy=True)
    y_prev = np.array(y0, dtype=float, copy=True)
    x_prev = None
    hvp_cum = 0
    best = None     # (grad_norm, x, y) under the outer cap

    for t in range(1, config.max_outer + 1):
        tic = time.perf_counter()
        is_first = t == 1
        warm = config.warm_dist if is_first else float(
            np.linalg.norm(x_t - x_prev))
        out = hsda_step(oracle, constants, config, x_t, y_prev, warm,
                        is_first=is_first, schedule=schedule)
        hvp_cum += oracle.dim_x    # dense surrogate build: one action per column
        grad_norm = float(np.linalg.norm(out.info.g_t))
        trace.records.append(StepRecord(
            t=t, f_gap=f_gap_at(oracle, x_t), grad_norm=grad_norm,
            v_abs=abs(out.pair.v), delta_or_zeta=out.pair.delta,
            step_norm=float(np.linalg.norm(out.step)),
            inner_iters=out.inner_iters, lanczos_iters=0, hvp_cum=hvp_cum,
            wall_ms=(time.perf_counter() - tic) * 1e3, branch=out.branch,
            x=np.array(x_t, copy=True) if snapshots else None))
        if best is None or grad_norm < best[0]:
            best = (grad_norm, np.array(x_t, copy=True), out.info.y_t)
        if out.terminal:
            trace.termination = TERMINATION_V_THRESHOLD
            trace.certified = True
            return finalize_trace(trace, oracle, out.x_next, out.info.y_t)
        x_prev, x_t, y_prev = x_t, out.x_next, out.info.y_t

    trace.termination = TERMINATION_MAX_OUTER
    trace.certified = False
    return finalize_trace(trace, oracle, best[1], best[2])
