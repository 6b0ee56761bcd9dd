"""Test problems with closed-form value functions where possible.

Three families:

* a 3x2 W-shaped synthetic minimax problem whose value function has an
  explicit strict saddle next to two symmetric minima,
* a quadratic minimax family with exact closed forms for oracle accuracy
  tests,
* a desk-scale robust-regression minimax (smooth margin loss on adversarially
  perturbed samples) with analytic Hessian-block actions and no closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from .errors import ConstructionError
from .oracle import Array, ProblemOracle, SmoothnessConstants, ValueFunctionOracle


# --------------------------------------------------------------------------
# W-shaped synthetic problem
# --------------------------------------------------------------------------

#: Lipschitz constant of the value-function Hessian for the W problem: the
#: only varying entry is w''(x3) and |w'''| <= 2 on every branch.
WTOY_F_HESS_LIPSCHITZ = 2.0

#: Margin (in x3) beyond the outer minimizers on which the shipped ell1
#: bound for the W problem is certified.
WTOY_BAND_MARGIN = 1.0


@dataclass(frozen=True)
class WToyParams:
    """Slope and length parameters of the piecewise-cubic W function."""

    eps_w: float = 0.01
    L_w: float = 5.0

    def __post_init__(self):
        if not self.eps_w > 0:
            raise ValueError("eps_w must be positive")
        if not self.L_w > 1:
            raise ValueError("L_w must exceed 1")

    @property
    def c_eps(self) -> float:
        return (3.0 * self.L_w + 1.0) * self.eps_w ** 1.5 / 3.0


def w_eval(params: WToyParams, x: float) -> tuple[float, float, float]:
    """The six-branch W function with its first two derivatives.

    Continuous with continuous first derivative at all five interior knots;
    the second derivative jumps at the knots joining cubic and linear
    pieces. Branch membership follows half-open intervals closed on the
    right.
    """
    e = params.eps_w
    se = math.sqrt(e)
    L = params.L_w
    ce = params.c_eps
    if x <= -L * se:
        t = x + (L + 1.0) * se
        return (se * t * t - t ** 3 / 3.0 - ce, 2.0 * se * t - t * t,
                2.0 * se - 2.0 * t)
    if x <= -se:
        return (e * x + e * se / 3.0, e, 0.0)
    if x <= 0.0:
        return (-se * x * x - x ** 3 / 3.0, -2.0 * se * x - x * x,
                -2.0 * se - 2.0 * x)
    if x <= se:
        return (-se * x * x + x ** 3 / 3.0, -2.0 * se * x + x * x,
                -2.0 * se + 2.0 * x)
    if x <= L * se:
        return (-e * x + e * se / 3.0, -e, 0.0)
    t = x - (L + 1.0) * se
    return (se * t * t + t ** 3 / 3.0 - ce, 2.0 * se * t + t * t,
            2.0 * se + 2.0 * t)


def wtoy_knots(params: WToyParams) -> list[float]:
    """The five interior knots of the W function."""
    se = math.sqrt(params.eps_w)
    return [-params.L_w * se, -se, 0.0, se, params.L_w * se]


def _coupled_block_norm(curvature: float) -> float:
    # spectral norm of [[0, 1], [1, -c]] for y-curvature magnitude c
    return (curvature + math.sqrt(curvature ** 2 + 4.0)) / 2.0


def wtoy_analytic_constants(params: WToyParams) -> SmoothnessConstants:
    """Joint-smoothness constants of the W problem.

    mu and ell2 are global; ell1 is certified on the band
    |x3| <= (L_w + 1) sqrt(eps_w) + WTOY_BAND_MARGIN, where the coupled
    quadratic blocks dominate the w'' contribution.
    """
    w2_band_max = 2.0 * math.sqrt(params.eps_w) + 2.0 * WTOY_BAND_MARGIN
    ell1 = max(_coupled_block_norm(1.0 / 20.0), _coupled_block_norm(5.0),
               w2_band_max)
    return SmoothnessConstants(mu=1.0 / 20.0, ell1=ell1, ell2=2.0)


def wtoy_schedule_constants(params: WToyParams) -> SmoothnessConstants:
    """Constants for driving the outer step-size schedules on the W problem.

    The chain bound L2 = ell2 (1 + kappa)^3 exceeds the directly computable
    Lipschitz constant of the value-function Hessian (max |w'''| = 2) by six
    orders of magnitude here, which would force uselessly small steps. This
    bundle keeps the true mu and ell1 (so the inner ascent stays sound) and
    back-solves ell2 so the derived L2 equals the direct constant.
    """
    analytic = wtoy_analytic_constants(params)
    ell2 = WTOY_F_HESS_LIPSCHITZ / (1.0 + analytic.kappa) ** 3
    return SmoothnessConstants(mu=analytic.mu, ell1=analytic.ell1, ell2=ell2)


def make_wtoy(params: WToyParams = WToyParams()) -> ProblemOracle:
    """3x2 oracle for f(x, y) = w(x3) - y1^2/40 + x1 y1 - 5 y2^2/2 + x2 y2.

    Ships with closed-form value function F(x) = w(x3) + 10 x1^2 + x2^2/10
    and the analytic smoothness constants.
    """

    def f(x: Array, y: Array) -> float:
        w, _, _ = w_eval(params, float(x[2]))
        return float(w - y[0] ** 2 / 40.0 + x[0] * y[0]
                     - 2.5 * y[1] ** 2 + x[1] * y[1])

    def grad_x(x: Array, y: Array) -> Array:
        _, w1, _ = w_eval(params, float(x[2]))
        return np.array([y[0], y[1], w1])

    def grad_y(x: Array, y: Array) -> Array:
        return np.array([-y[0] / 20.0 + x[0], -5.0 * y[1] + x[1]])

    def hess_xx_vec(x: Array, y: Array, v: Array) -> Array:
        _, _, w2 = w_eval(params, float(x[2]))
        return np.array([0.0, 0.0, w2 * v[2]])

    def hess_xy_vec(x: Array, y: Array, wv: Array) -> Array:
        return np.array([wv[0], wv[1], 0.0])

    def hess_yx_vec(x: Array, y: Array, v: Array) -> Array:
        return np.array([v[0], v[1]])

    def hess_yy_vec(x: Array, y: Array, wv: Array) -> Array:
        return np.array([-wv[0] / 20.0, -5.0 * wv[1]])

    def F(x: Array) -> float:
        w, _, _ = w_eval(params, float(x[2]))
        return float(w + 10.0 * x[0] ** 2 + x[1] ** 2 / 10.0)

    def grad_F(x: Array) -> Array:
        _, w1, _ = w_eval(params, float(x[2]))
        return np.array([20.0 * x[0], x[1] / 5.0, w1])

    def hess_F(x: Array) -> Array:
        _, _, w2 = w_eval(params, float(x[2]))
        return np.diag([20.0, 0.2, w2])

    def y_star(x: Array) -> Array:
        return np.array([20.0 * x[0], x[1] / 5.0])

    closed = ValueFunctionOracle(F=F, grad_F=grad_F, hess_F=hess_F,
                                 y_star=y_star, F_inf=-params.c_eps)
    return ProblemOracle(
        dim_x=3, dim_y=2, f=f, grad_x=grad_x, grad_y=grad_y,
        hess_xx_vec=hess_xx_vec, hess_xy_vec=hess_xy_vec,
        hess_yx_vec=hess_yx_vec, hess_yy_vec=hess_yy_vec,
        closed_form=closed, constants=wtoy_analytic_constants(params))


# --------------------------------------------------------------------------
# Quadratic minimax family
# --------------------------------------------------------------------------

@dataclass
class QuadraticMinimaxParams:
    """Quadratic-in-x, coupled, strongly-concave-in-y family.

    Matrices left as None are sampled at construction: the value-function
    Hessian gets eigenvalues uniform in ``hess_spectrum`` (in a random
    basis) and Q is backed out as hess_F - C C^T / mu_y, so Q itself may be
    indefinite. ``l2_target`` calibrates the shipped ell2 so the derived L2
    matches it; the true Hessian variation of a quadratic is zero, but the
    outer schedules need a positive curvature scale.
    """

    dim_x: int
    dim_y: int
    mu_y: float = 1.0
    Q: Optional[Array] = None
    C: Optional[Array] = None
    b_x: Optional[Array] = None
    b_y: Optional[Array] = None
    hess_spectrum: tuple[float, float] = (0.2, 3.0)
    coupling_scale: float = 0.5
    l2_target: float = 2.0


def make_quadratic(params: QuadraticMinimaxParams, seed: int = 0) -> ProblemOracle:
    """Oracle for f = x'Qx/2 + b_x'x + x'Cy - mu_y |y|^2/2 + b_y'y."""
    if params.mu_y <= 0:
        raise ValueError("mu_y must be positive")
    n, m = params.dim_x, params.dim_y
    rng = np.random.default_rng(seed)

    C = params.C
    if C is None:
        C = rng.standard_normal((n, m)) * params.coupling_scale / math.sqrt(max(n, m))
    C = np.asarray(C, dtype=float)

    Q = params.Q
    if Q is None:
        lo, hi = params.hess_spectrum
        basis, _ = np.linalg.qr(rng.standard_normal((n, n)))
        target = basis @ np.diag(rng.uniform(lo, hi, n)) @ basis.T
        Q = 0.5 * (target + target.T) - C @ C.T / params.mu_y
    Q = 0.5 * (np.asarray(Q, dtype=float) + np.asarray(Q, dtype=float).T)

    b_x = np.zeros(n) if params.b_x is None else np.asarray(params.b_x, float)
    b_y = np.zeros(m) if params.b_y is None else np.asarray(params.b_y, float)
    mu = params.mu_y
    S = Q + C @ C.T / mu    # value-function Hessian

    def f(x, y):
        return float(0.5 * x @ (Q @ x) + b_x @ x + x @ (C @ y)
                     - 0.5 * mu * (y @ y) + b_y @ y)

    def grad_x(x, y):
        return Q @ x + C @ y + b_x

    def grad_y(x, y):
        return C.T @ x - mu * y + b_y

    def y_star(x):
        return (C.T @ x + b_y) / mu

    def F(x):
        r = C.T @ x + b_y
        return float(0.5 * x @ (Q @ x) + b_x @ x + 0.5 * (r @ r) / mu)

    def grad_F(x):
        return Q @ x + b_x + C @ ((C.T @ x + b_y) / mu)

    lam_S = np.linalg.eigvalsh(S)
    if lam_S[0] > 1e-12:
        x_min = np.linalg.solve(S, -(b_x + C @ (b_y / mu)))
        F_inf = F(x_min)
    else:
        F_inf = -np.inf

    closed = ValueFunctionOracle(F=F, grad_F=grad_F, hess_F=lambda x: S.copy(),
                                 y_star=y_star, F_inf=F_inf)

    joint = np.zeros((n + m, n + m))
    joint[:n, :n] = Q
    joint[:n, n:] = C
    joint[n:, :n] = C.T
    joint[n:, n:] = -mu * np.eye(m)
    ell1 = max(float(np.max(np.abs(np.linalg.eigvalsh(joint)))), mu)
    kappa = ell1 / mu
    ell2 = params.l2_target / (1.0 + kappa) ** 3

    return ProblemOracle(
        dim_x=n, dim_y=m, f=f, grad_x=grad_x, grad_y=grad_y,
        hess_xx_vec=lambda x, y, v: Q @ v,
        hess_xy_vec=lambda x, y, w: C @ w,
        hess_yx_vec=lambda x, y, v: C.T @ v,
        hess_yy_vec=lambda x, y, w: -mu * w,
        closed_form=closed,
        constants=SmoothnessConstants(mu=mu, ell1=ell1, ell2=ell2))


# --------------------------------------------------------------------------
# Robust-regression minimax (no closed form)
# --------------------------------------------------------------------------

@dataclass
class RobustRegressionParams:
    """Adversarially perturbed linear classification with a margin loss.

    The predictor x scores perturbed samples y_i against labels b_i with a
    logistic margin loss; a quadratic penalty anchors each perturbation to
    its sample a_i. Strong concavity in y requires the penalty to dominate
    the loss curvature over the operating ball ||x|| <= x_radius.
    """

    n_features: int
    n_samples: int
    lambda_adv: float = 2.0
    x_radius: float = 1.0
    design: Optional[Array] = None
    labels: Optional[Array] = None


def sample_design(params: RobustRegressionParams,
                  seed: int = 0) -> tuple[Array, Array]:
    """Anchor samples (rows ~ unit norm) and +-1 labels, or the given ones."""
    if params.design is not None and params.labels is not None:
        return (np.asarray(params.design, dtype=float),
                np.asarray(params.labels, dtype=float))
    rng = np.random.default_rng(seed)
    design = rng.standard_normal((params.n_samples, params.n_features))
    design /= math.sqrt(params.n_features)
    labels = rng.choice([-1.0, 1.0], size=params.n_samples)
    return design, labels


def make_robust_regression(params: RobustRegressionParams,
                           seed: int = 0) -> ProblemOracle:
    """Oracle with stacked perturbations y = [y_1; ...; y_N] in R^{N n}.

    All four Hessian-block actions are analytic. Raises
    :class:`ConstructionError` when the concavity margin
    2 lambda_adv - x_radius^2 / 4 is not positive (1/4 bounds the logistic
    curvature).
    """
    n, N = params.n_features, params.n_samples
    lam = params.lambda_adv
    margin = 2.0 * lam - 0.25 * params.x_radius ** 2
    if margin <= 0:
        raise ConstructionError(
            f"concavity margin {margin:.3e} is not positive; "
            "increase lambda_adv or shrink x_radius")
    design, labels = sample_design(params, seed)

    def blocks(y):
        return y.reshape(N, n)

    def scores(x, Y):
        return Y @ x

    def loss_derivs(x, Y):
        z = scores(x, Y)
        s = expit(-labels * z)
        lp = -labels * s          # d loss / dz
        lpp = s * (1.0 - s)       # d^2 loss / dz^2 (labels are +-1)
        return lp, lpp

    def f(x, y):
        Y = blocks(y)
        z = scores(x, Y)
        loss = np.logaddexp(0.0, -labels * z).sum()
        pen = lam * ((Y - design) ** 2).sum()
        return float((loss - pen) / N)

    def grad_x(x, y):
        Y = blocks(y)
        lp, _ = loss_derivs(x, Y)
        return (Y.T @ lp) / N

    def grad_y(x, y):
        Y = blocks(y)
        lp, _ = loss_derivs(x, Y)
        out = np.outer(lp, x) - 2.0 * lam * (Y - design)
        return out.ravel() / N

    def hess_xx_vec(x, y, v):
        Y = blocks(y)
        _, lpp = loss_derivs(x, Y)
        return (Y.T @ (lpp * (Y @ v))) / N

    def hess_xy_vec(x, y, w):
        Y = blocks(y)
        W = blocks(np.asarray(w))
        lp, lpp = loss_derivs(x, Y)
        return (Y.T @ (lpp * (W @ x)) + W.T @ lp) / N

    def hess_yx_vec(x, y, v):
        Y = blocks(y)
        lp, lpp = loss_derivs(x, Y)
        out = np.outer(lpp * (Y @ v), x) + lp[:, None] * v[None, :]
        return out.ravel() / N

    def hess_yy_vec(x, y, w):
        Y = blocks(y)
        W = blocks(np.asarray(w))
        _, lpp = loss_derivs(x, Y)
        out = np.outer(lpp * (W @ x), x) - 2.0 * lam * W
        return out.ravel() / N

    # Region bounds over ||x|| <= x_radius, ||y_i|| <= Ry: crude but safe
    # for the iteration caps and baseline step sizes this problem feeds.
    Rx = params.x_radius
    Ry = float(np.max(np.linalg.norm(design, axis=1))) + 1.0
    ell1 = (max(0.25 * Ry ** 2, (0.25 * Rx ** 2 + 2.0 * lam) / N)
            + (0.25 * Rx * Ry + 1.0) / math.sqrt(N))
    mu = margin / N
    ell1 = max(ell1, mu)
    ell2 = 0.1 * (Rx + Ry) ** 2 + 0.5 * (Rx + Ry) + 0.25

    return ProblemOracle(
        dim_x=n, dim_y=N * n, f=f, grad_x=grad_x, grad_y=grad_y,
        hess_xx_vec=hess_xx_vec, hess_xy_vec=hess_xy_vec,
        hess_yx_vec=hess_yx_vec, hess_yy_vec=hess_yy_vec,
        closed_form=None,
        constants=SmoothnessConstants(mu=mu, ell1=ell1, ell2=ell2))
