"""Problem-oracle contract and the Schur-complement Hessian surrogate.

Every algorithm in this package touches a minimax problem

    min_x max_y f(x, y),    f strongly concave in y,

only through a :class:`ProblemOracle`: value, partial gradients, and the
four Hessian-block actions. Second-order information about the value
function F(x) = max_y f(x, y) is accessed through the surrogate

    H(x, y) = Hxx - Hxy (Hyy)^{-1} Hyx,

whose action is assembled here from the block products plus one inner
solve against the (negative definite) y-block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import DimensionTooLarge, NonConvergence

Array = np.ndarray

#: y-blocks at or below this size are solved by a dense Cholesky factorization.
DENSE_YY_LIMIT = 64

#: H_dense refuses to materialize above this x-dimension.
DENSE_H_LIMIT = 512

#: Default relative residual for the inner y-block solve. Kept tight so the
#: surrogate's error is negligible against the outer Hessian tolerance.
DEFAULT_YY_TOL = 1e-12


@dataclass(frozen=True)
class SmoothnessConstants:
    """Strong concavity and smoothness constants with derived curvatures.

    ``mu`` is the strong-concavity modulus in y, ``ell1`` the Lipschitz
    constant of the joint gradient, ``ell2`` the Lipschitz constant of the
    Hessian blocks. Everything else (kappa, L1, LH, L2) is derived on access
    so the bundle can never go stale.
    """

    mu: float
    ell1: float
    ell2: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.ell1 < self.mu:
            raise ValueError(f"ell1 ({self.ell1}) must be >= mu ({self.mu})")
        if self.ell2 < 0:
            raise ValueError(f"ell2 must be nonnegative, got {self.ell2}")

    @property
    def kappa(self) -> float:
        return self.ell1 / self.mu

    @property
    def L1(self) -> float:
        return (self.kappa + 1.0) * self.ell1

    @property
    def LH(self) -> float:
        return self.ell2 * (1.0 + self.kappa) ** 2

    @property
    def L2(self) -> float:
        return self.ell2 * (1.0 + self.kappa) ** 3


@dataclass(frozen=True)
class ValueFunctionOracle:
    """Closed-form access to F(x) = max_y f(x, y), for test problems."""

    F: Callable[[Array], float]
    grad_F: Callable[[Array], Array]
    hess_F: Callable[[Array], Array]
    y_star: Callable[[Array], Array]
    F_inf: float


@dataclass(frozen=True)
class ProblemOracle:
    """Callable bundle for one minimax problem instance.

    Immutable after construction; safe to share across concurrent runs. The
    Hessian-block actions must be adjoint-consistent and the y-block must be
    ``constants.mu``-strongly concave (both are probed by the test suite).
    """

    dim_x: int
    dim_y: int
    f: Callable[[Array, Array], float]
    grad_x: Callable[[Array, Array], Array]
    grad_y: Callable[[Array, Array], Array]
    hess_xx_vec: Callable[[Array, Array, Array], Array]
    hess_xy_vec: Callable[[Array, Array, Array], Array]
    hess_yx_vec: Callable[[Array, Array, Array], Array]
    hess_yy_vec: Callable[[Array, Array, Array], Array]
    closed_form: Optional[ValueFunctionOracle] = None
    constants: Optional[SmoothnessConstants] = None


def _cg_iteration_cap(oracle: ProblemOracle, tol: float) -> int:
    # Cap from the y-block condition number when constants are available;
    # CG on an m-dimensional SPD system terminates within m steps anyway.
    if oracle.constants is not None:
        kappa = oracle.constants.kappa
        return max(1, math.ceil(20.0 * math.sqrt(kappa) * math.log(1.0 / tol)))
    return oracle.dim_y + 100


def yy_solve(oracle: ProblemOracle, x: Array, y: Array, w: Array,
             tol: float = DEFAULT_YY_TOL) -> Array:
    """Solve hess_yy(z) = w against the negative-definite y-block.

    Uses a dense Cholesky factorization of the negated block for small m
    and conjugate gradient on the negated operator otherwise. Raises
    :class:`NonConvergence` if the relative residual target is missed.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = np.asarray(w, dtype=float)
    w_norm = float(np.linalg.norm(w))
    if w_norm == 0.0:
        return np.zeros_like(w)

    m = oracle.dim_y
    if m <= DENSE_YY_LIMIT:
        neg = np.empty((m, m))
        eye = np.eye(m)
        for j in range(m):
            neg[:, j] = -oracle.hess_yy_vec(x, y, eye[j])
        neg = 0.5 * (neg + neg.T)
        try:
            factor = scipy.linalg.cho_factor(neg)
        except np.linalg.LinAlgError as err:
            raise NonConvergence(
                "y-block is not negative definite; check strong concavity"
            ) from err
        z = -scipy.linalg.cho_solve(factor, w)
    else:
        op = scipy.sparse.linalg.LinearOperator(
            (m, m), matvec=lambda v: -oracle.hess_yy_vec(x, y, v))
        cap = _cg_iteration_cap(oracle, tol)
        sol, _ = scipy.sparse.linalg.cg(op, -w, rtol=tol * 0.1, atol=0.0,
                                        maxiter=cap)
        z = sol

    residual = float(np.linalg.norm(oracle.hess_yy_vec(x, y, z) - w))
    if residual > tol * w_norm:
        raise NonConvergence(
            f"y-block solve residual {residual:.3e} exceeds "
            f"{tol:.1e} * ||w|| = {tol * w_norm:.3e}; "
            "mu or ell1 may be mis-specified")
    return z


def H_vec(oracle: ProblemOracle, x: Array, y: Array, v: Array,
          tol: float = DEFAULT_YY_TOL) -> Array:
    """Action of the Schur-complement surrogate H(x, y) on an x-vector."""
    coupled = oracle.hess_yx_vec(x, y, v)
    z = yy_solve(oracle, x, y, coupled, tol=tol)
    return oracle.hess_xx_vec(x, y, v) - oracle.hess_xy_vec(x, y, z)


def H_dense(oracle: ProblemOracle, x: Array, y: Array,
            tol: float = DEFAULT_YY_TOL,
            limit: int = DENSE_H_LIMIT) -> Array:
    """Materialize H(x, y) column-by-column and symmetrize.

    Intended for small x-dimensions only (exact eigensolves, diagnostics).
    """
    n = oracle.dim_x
    if n > limit:
        raise DimensionTooLarge(
            f"dense surrogate requested for n={n} > limit {limit}")
    H = np.empty((n, n))
    eye = np.eye(n)
    for j in range(n):
        H[:, j] = H_vec(oracle, x, y, eye[j], tol=tol)
    return 0.5 * (H + H.T)
