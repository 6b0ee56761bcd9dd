"""Per-iteration trace records shared by all drivers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .oracle import Array

#: Iterate snapshots are dropped by default above this dimension.
SNAPSHOT_DIM_LIMIT = 100

TERMINATION_V_THRESHOLD = "v_threshold"
TERMINATION_RITZ_CERTIFIED = "ritz_certified"
TERMINATION_MAX_OUTER = "max_outer"


@dataclass
class StepRecord:
    """One outer iteration: state at x_t plus the step taken from it."""

    t: int
    f_gap: Optional[float]
    grad_norm: float
    v_abs: Optional[float]
    delta_or_zeta: Optional[float]
    step_norm: float
    inner_iters: int
    lanczos_iters: int
    hvp_cum: int
    wall_ms: float
    branch: Optional[str] = None
    safeguard_retries: int = 0
    x: Optional[Array] = None


@dataclass
class IterateTrace:
    """Complete run history plus final-iterate diagnostics."""

    algorithm: str
    records: list[StepRecord] = field(default_factory=list)
    termination: str = TERMINATION_MAX_OUTER
    certified: bool = False
    x_final: Optional[Array] = None
    y_final: Optional[Array] = None
    final_f_gap: Optional[float] = None
    final_grad_norm: Optional[float] = None
    final_lambda_min: Optional[float] = None

    @property
    def outer_iters(self) -> int:
        return len(self.records)

    @property
    def hvp_total(self) -> int:
        return self.records[-1].hvp_cum if self.records else 0

    @property
    def inner_total(self) -> int:
        return sum(r.inner_iters for r in self.records)

    @property
    def lanczos_total(self) -> int:
        return sum(r.lanczos_iters for r in self.records)

    @property
    def wall_ms_total(self) -> float:
        return sum(r.wall_ms for r in self.records)


def finalize_trace(trace: IterateTrace, oracle, x_final: Array,
                   y_final: Array) -> IterateTrace:
    """Attach the final iterate and its closed-form diagnostics when available."""
    trace.x_final = np.array(x_final, copy=True)
    trace.y_final = np.array(y_final, copy=True)
    cf = oracle.closed_form
    if cf is not None:
        if np.isfinite(cf.F_inf):
            trace.final_f_gap = float(cf.F(x_final) - cf.F_inf)
        trace.final_grad_norm = float(np.linalg.norm(cf.grad_F(x_final)))
        trace.final_lambda_min = float(
            np.linalg.eigvalsh(cf.hess_F(x_final))[0])
    return trace


def f_gap_at(oracle, x: Array) -> Optional[float]:
    cf = oracle.closed_form
    if cf is None or not np.isfinite(cf.F_inf):
        return None
    return float(cf.F(x) - cf.F_inf)
