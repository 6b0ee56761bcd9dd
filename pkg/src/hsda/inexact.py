"""Outer loop with matrix-free Lanczos eigensolves and a safeguard.

The dense surrogate is never materialized: every application of the lifted
operator costs one surrogate action (one Hessian-vector product plus one
inner y-block solve). Certification happens at a large lifted component
with a small Ritz residual; a large residual instead escalates the lift
parameter, tightens the Lanczos budget, and re-solves.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import MaxItersExceeded, RetryBudgetExceeded
from .homogeneous import HomogenizedOperator, classify_direction, lanczos_min_eigenpair
from .inner_ascent import AscentSchedule, iteration_count, run_ascent
from .oracle import Array, ProblemOracle, SmoothnessConstants
from .trace import (SNAPSHOT_DIM_LIMIT, TERMINATION_MAX_OUTER,
                    TERMINATION_RITZ_CERTIFIED, IterateTrace, StepRecord,
                    f_gap_at, finalize_trace)
from .exact import ZERO_DIRECTION_GUARD


@dataclass(frozen=True)
class IhsdaConfig:
    """Accuracy targets, gradient bound, and safeguard policy."""

    eps: float
    Lambda: float
    omega: float
    eps1: float
    eps2: float
    B_g: float
    L1: float
    L2: float
    max_outer: int
    max_safeguard_retries: int
    lanczos_max_iters: Optional[int]
    seed: int
    warm_dist: float
    snapshots: bool

    @classmethod
    def from_accuracy(cls, eps: float, constants: SmoothnessConstants,
                      B_g: float, omega: float = 0.3, max_outer: int = 200,
                      max_safeguard_retries: int = 4,
                      lanczos_max_iters: Optional[int] = None,
                      seed: int = 0, warm_dist: float = 10.0,
                      snapshots: Optional[bool] = None) -> "IhsdaConfig":
        L2 = constants.L2
        if L2 <= 0:
            raise ValueError("schedule requires L2 > 0; supply a positive ell2")
        cap = min(L2 ** 3 / 36.0, L2 / 2.0, 1.0)
        if not 0 < eps <= cap:
            raise ValueError(
                f"eps must be in (0, min(L2^3/36, L2/2, 1)] = (0, {cap}], "
                f"got {eps}")
        if not 0.25 < omega < 0.5:
            raise ValueError(f"omega must be in (1/4, 1/2), got {omega}")
        if B_g <= 0:
            raise ValueError("B_g must be positive")
        return cls(eps=eps, Lambda=math.sqrt(eps / L2), omega=omega,
                   eps1=eps / 12.0, eps2=math.sqrt(L2 * eps) / 12.0,
                   B_g=B_g, L1=constants.L1, L2=L2, max_outer=max_outer,
                   max_safeguard_retries=max_safeguard_retries,
                   lanczos_max_iters=lanczos_max_iters, seed=seed,
                   warm_dist=warm_dist,
                   snapshots=bool(snapshots) if snapshots is not None else False)

    @property
    def v_threshold(self) -> float:
        return math.sqrt(1.0 / (1.0 + self.Lambda ** 2))

    @property
    def alpha0(self) -> float:
        return math.sqrt(self.L2 * self.eps)

    @property
    def rho_target(self) -> float:
        # accuracy of the lifted residual component that certification
        # relies on; the eigensolve must deliver it before terminating
        return self.eps ** 2 / (16.0 * self.L2 ** 2)


@dataclass(frozen=True)
class SafeguardState:
    """Current lift parameter and Lanczos budget within one outer iteration."""

    alpha_t: float
    e_t: float
    retries: int
    last_zeta: float
    last_g_norm: float


@dataclass(frozen=True)
class LanczosCall:
    """Record of one eigensolve within an outer iteration."""

    iters: int
    alpha: float
    e_budget: float
    gap_floor: Optional[float]


@dataclass
class InexactStep:
    """Everything one inexact outer iteration produced."""

    x_next: Array
    info: object
    pair: object
    step: Array
    branch: str
    terminal: bool
    inner_iters: int
    lanczos_iters: int
    hvp_count: int
    state: SafeguardState
    solves: list[LanczosCall]


def initial_safeguard(config: IhsdaConfig) -> SafeguardState:
    a0 = config.alpha0
    return SafeguardState(alpha_t=a0, e_t=a0, retries=0, last_zeta=math.nan,
                          last_g_norm=math.nan)


def safeguard_update(state: SafeguardState, g_norm: float, zeta: float,
                     config: IhsdaConfig) -> SafeguardState:
    """Escalate the lift parameter and tighten the budget after a large residual.

    The new budget is computed with the escalated alpha. Raises
    :class:`RetryBudgetExceeded` past the retry cap, which signals a
    gradient bound B_g below the trajectory's reality.
    """
    retries = state.retries + 1
    if retries > config.max_safeguard_retries:
        raise RetryBudgetExceeded(
            f"{retries - 1} safeguard retries without certification; "
            "B_g may be too small for this run")
    alpha = (3.0 * math.sqrt(config.L2 * config.eps)
             + 2.0 * g_norm * config.Lambda
             + (config.L1 + zeta) * config.Lambda ** 2)
    e = min(config.eps / 4.0,
            math.sqrt(config.L2) * config.eps ** 2.5
            / (64.0 * (config.L1 + alpha + config.B_g) ** 2))
    return SafeguardState(alpha_t=alpha, e_t=e, retries=retries,
                          last_zeta=zeta, last_g_norm=g_norm)


def ihsda_step(oracle: ProblemOracle, constants: SmoothnessConstants,
               config: IhsdaConfig, x_t: Array, y_prev: Array, warm: float,
               is_first: bool = False,
               schedule: Optional[AscentSchedule] = None,
               step_seed: int = 0) -> InexactStep:
    """One outer iteration of the inexact loop.

    One Lanczos iteration cap overrun per step is tolerated (its best pair
    is used); a second aborts the step.
    """
    if schedule is None:
        schedule = AscentSchedule.from_constants(constants, config.eps1,
                                                 config.eps2)
    N = iteration_count(schedule, is_first, warm)
    info = run_ascent(oracle, x_t, y_prev, schedule, N)
    g_norm = float(np.linalg.norm(info.g_t))

    hvp_count = [0]

    def counted_h(v: Array) -> Array:
        hvp_count[0] += 1
        return info.H_t(v)

    state = initial_safeguard(config)
    gap_floor = None
    lanczos_iters = 0
    cap_overruns = 0
    solves: list[LanczosCall] = []

    def outcome(x_next, pair, step, branch, terminal):
        return InexactStep(x_next=x_next, info=info, pair=pair, step=step,
                           branch=branch, terminal=terminal, inner_iters=N,
                           lanczos_iters=lanczos_iters,
                           hvp_count=hvp_count[0], state=state, solves=solves)

    while True:
        op = HomogenizedOperator(h_action=counted_h, g=info.g_t,
                                 alpha=state.alpha_t)
        # the eigensolve must honor the lifted-residual accuracy on every
        # call, not just the eigenvalue budget: directions built from pairs
        # with a large rho dither near strict saddles and can certify there
        budget = min(state.e_t, config.rho_target)
        try:
            pair = lanczos_min_eigenpair(
                op, budget, max_iters=config.lanczos_max_iters,
                seed=step_seed * 1009 + len(solves), gap_floor=gap_floor)
        except MaxItersExceeded as err:
            cap_overruns += 1
            if cap_overruns > 1:
                raise
            pair = err.best
        lanczos_iters += pair.lanczos_iters
        solves.append(LanczosCall(iters=pair.lanczos_iters,
                                  alpha=state.alpha_t, e_budget=budget,
                                  gap_floor=gap_floor))

        if abs(pair.v_hat) <= config.v_threshold:
            s, branch = classify_direction(pair.u_hat, pair.v_hat, info.g_t,
                                           config.omega)
            s_norm = float(np.linalg.norm(s))
            if s_norm < ZERO_DIRECTION_GUARD:
                return outcome(x_t.copy(), pair, np.zeros_like(s), branch,
                               True)
            tau = config.Lambda / s_norm
            return outcome(x_t + tau * s, pair, tau * s, branch, False)

        certified = (float(np.linalg.norm(pair.k)) <= config.eps / 2.0
                     and abs(pair.rho) <= config.rho_target)
        if certified:
            # above the v-threshold the lifted component dominates omega,
            # so the certified step is always the ratio branch
            step = pair.u_hat / pair.v_hat
            return outcome(x_t + step, pair, step, "ratio", True)

        state = safeguard_update(state, g_norm, pair.zeta, config)
        gap_floor = math.sqrt(config.L2 * config.eps)


def ihsda_run(oracle: ProblemOracle, constants: SmoothnessConstants,
              config: IhsdaConfig, x1: Array, y0: Array) -> IterateTrace:
    """Iterate to certified termination or the outer cap.

    Certification means a lifted component above threshold together with a
    Ritz residual x-block within eps/2. Without a certification event the
    best-gradient iterate is returned uncertified at the cap.
    """
    trace = IterateTrace(algorithm="ihsda")
    schedule = AscentSchedule.from_constants(constants, config.eps1,
                                             config.eps2)
    snapshots = config.snapshots and oracle.dim_x <= SNAPSHOT_DIM_LIMIT

    x_t = np.array(x1, dtype=float, copy=True)
    y_prev = np.array(y0, dtype=float, copy=True)
    x_prev = None
    hvp_cum = 0
    best = None

    for t in range(1, config.max_outer + 1):
        tic = time.perf_counter()
        is_first = t == 1
        warm = config.warm_dist if is_first else float(
            np.linalg.norm(x_t - x_prev))
        out = ihsda_step(oracle, constants, config, x_t, y_prev, warm,
                         is_first=is_first, schedule=schedule,
                         step_seed=config.seed * 7919 + t)
        hvp_cum += out.hvp_count
        grad_norm = float(np.linalg.norm(out.info.g_t))
        trace.records.append(StepRecord(
            t=t, f_gap=f_gap_at(oracle, x_t), grad_norm=grad_norm,
            v_abs=abs(out.pair.v_hat), delta_or_zeta=out.pair.zeta,
            step_norm=float(np.linalg.norm(out.step)),
            inner_iters=out.inner_iters, lanczos_iters=out.lanczos_iters,
            hvp_cum=hvp_cum, wall_ms=(time.perf_counter() - tic) * 1e3,
            branch=out.branch, safeguard_retries=out.state.retries,
            x=np.array(x_t, copy=True) if snapshots else None))
        if best is None or grad_norm < best[0]:
            best = (grad_norm, np.array(x_t, copy=True), out.info.y_t)
        if out.terminal:
            trace.termination = TERMINATION_RITZ_CERTIFIED
            trace.certified = True
            return finalize_trace(trace, oracle, out.x_next, out.info.y_t)
        x_prev, x_t, y_prev = x_t, out.x_next, out.info.y_t

    trace.termination = TERMINATION_MAX_OUTER
    trace.certified = False
    return finalize_trace(trace, oracle, best[1], best[2])


def default_gradient_bound(oracle: ProblemOracle, x1: Array,
                           grid_radius: float = 1.0,
                           grid_points: int = 125, seed: int = 0) -> float:
    """Coarse gradient bound for problems with a closed form.

    Twice the largest closed-form gradient norm over a sampled box around
    the start point, plus one. For problems without a closed form the bound
    must be supplied by the caller.
    """
    cf = oracle.closed_form
    if cf is None:
        raise ValueError("no closed form; supply B_g explicitly")
    rng = np.random.default_rng(seed)
    x1 = np.asarray(x1, dtype=float)
    radius = max(grid_radius, float(np.linalg.norm(x1)) + grid_radius)
    worst = float(np.linalg.norm(cf.grad_F(x1)))
    for _ in range(grid_points):
        point = x1 + rng.uniform(-radius, radius, x1.shape[0])
        worst = max(worst, float(np.linalg.norm(cf.grad_F(point))))
    return 2.0 * worst + 1.0
