"""Accelerated inner maximization over y and the inexact (g, H) bundle.

Each outer iteration runs a fixed number of Nesterov ascent steps on
f(x_t, .) starting from the previous iterate's y. The iteration count is
chosen from the strong-concavity contraction rate so that the resulting
gradient and Hessian surrogates meet their accuracy targets eps1 / eps2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericalOverflow
from .oracle import DEFAULT_YY_TOL, Array, H_vec, ProblemOracle, SmoothnessConstants

#: Iterates past this norm abort the ascent; the step size or the concavity
#: assumption is wrong.
OVERFLOW_LIMIT = 1e12


@dataclass(frozen=True)
class AscentSchedule:
    """Step sizes, accuracy targets, and the distance budget A.

    ``A`` is the y-accuracy that guarantees gradient error <= eps1 and
    Hessian error <= eps2; ``eta2`` is the momentum weight for condition
    number kappa (zero momentum when kappa = 1).
    """

    eta1: float
    eta2: float
    eps1: float
    eps2: float
    A: float
    kappa: float
    N_cap: int

    @classmethod
    def from_constants(cls, constants: SmoothnessConstants, eps1: float,
                       eps2: float, N_cap: int | None = None) -> "AscentSchedule":
        if eps1 <= 0 or eps2 <= 0:
            raise ValueError("accuracy targets eps1 and eps2 must be positive")
        kappa = constants.kappa
        sqrt_k = math.sqrt(kappa)
        eta1 = 1.0 / constants.ell1
        eta2 = (sqrt_k - 1.0) / (sqrt_k + 1.0)
        if constants.LH > 0:
            A = min(eps1 / constants.ell1, eps2 / (2.0 * constants.LH))
        else:
            A = eps1 / constants.ell1
        if N_cap is None:
            N_cap = 10 * math.ceil(2.0 * sqrt_k * math.log(1e8))
        return cls(eta1=eta1, eta2=eta2, eps1=eps1, eps2=eps2, A=A,
                   kappa=kappa, N_cap=N_cap)


@dataclass(frozen=True)
class InexactInfo:
    """Approximate maximizer plus the first/second-order surrogates at x_t."""

    y_t: Array
    g_t: Array
    H_t: Callable[[Array], Array]
    N_used: int


def iteration_count(schedule: AscentSchedule, is_first: bool,
                    warm_dist: float) -> int:
    """Ascent steps needed to drive ||y - y*(x_t)|| below the budget A.

    ``warm_dist`` is the initial distance bound on the first call and the
    outer step length ||x_t - x_{t-1}|| afterwards. Clamped to [1, N_cap];
    a nonpositive log (already inside the budget) yields 1.
    """
    sqrt_k = math.sqrt(schedule.kappa)
    if is_first:
        ratio = math.sqrt(schedule.kappa + 1.0) * warm_dist / schedule.A
    else:
        ratio = (math.sqrt(schedule.kappa + 1.0)
                 * (schedule.A + schedule.kappa * warm_dist) / schedule.A)
    if ratio <= 1.0:
        return 1
    n = math.ceil(2.0 * sqrt_k * math.log(ratio))
    return max(1, min(n, schedule.N_cap))


def run_ascent(oracle: ProblemOracle, x_t: Array, y_init: Array,
               schedule: AscentSchedule, N: int,
               yy_tol: float = DEFAULT_YY_TOL) -> InexactInfo:
    """Run exactly N momentum ascent steps on f(x_t, .) from y_init.

    Returns the final y together with g_t = grad_x(x_t, y_t) and the
    surrogate operator H_t = H(x_t, y_t) acting on x-vectors.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    y = np.array(y_init, dtype=float, copy=True)
    y_look = y.copy()
    for _ in range(N):
        y_next = y_look + schedule.eta1 * oracle.grad_y(x_t, y_look)
        y_look = y_next + schedule.eta2 * (y_next - y)
        y = y_next
        if np.linalg.norm(y) > OVERFLOW_LIMIT:
            raise NumericalOverflow(
                "ascent iterate overflow; wrong eta1 or non-concave problem")
    g_t = oracle.grad_x(x_t, y)

    def H_t(v: Array) -> Array:
        return H_vec(oracle, x_t, y, v, tol=yy_tol)

    return InexactInfo(y_t=y, g_t=g_t, H_t=H_t, N_used=N)
