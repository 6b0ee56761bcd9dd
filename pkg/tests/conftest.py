import numpy as np
import pytest

from hsda.problems import (QuadraticMinimaxParams, RobustRegressionParams,
                           WToyParams, make_quadratic, make_robust_regression,
                           make_wtoy)


@pytest.fixture(scope="session")
def wtoy():
    return make_wtoy(WToyParams())


@pytest.fixture(scope="session")
def quad_small():
    return make_quadratic(QuadraticMinimaxParams(dim_x=6, dim_y=4), seed=11)


@pytest.fixture(scope="session")
def robust_small():
    # m = n_samples * n_features = 120 > dense limit, exercising the CG path
    return make_robust_regression(
        RobustRegressionParams(n_features=12, n_samples=10), seed=5)


def adjoint_gap(oracle, rng, x_scale=1.0):
    """One random adjoint-consistency probe of the coupling blocks."""
    x = rng.standard_normal(oracle.dim_x) * x_scale
    y = rng.standard_normal(oracle.dim_y)
    v = rng.standard_normal(oracle.dim_x)
    w = rng.standard_normal(oracle.dim_y)
    lhs = float(oracle.hess_xy_vec(x, y, w) @ v)
    rhs = float(w @ oracle.hess_yx_vec(x, y, v))
    return abs(lhs - rhs), float(np.linalg.norm(v) * np.linalg.norm(w))
