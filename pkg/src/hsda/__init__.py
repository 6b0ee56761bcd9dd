"""Second-order descent-ascent solvers for nonconvex-strongly-concave minimax.

The outer loops obtain their search direction from the smallest eigenpair
of a homogenized (n+1)-dimensional lift of the value-function Hessian
surrogate: exactly via a dense eigensolve, or matrix-free via Lanczos with
a residual certificate and a safeguard.
"""

from .baselines import GdaConfig, gda_run
from .errors import (ConfigError, ConstructionError, DimensionTooLarge,
                     EigensolverFailure, MaxItersExceeded, MismatchedProblem,
                     NonConvergence, NumericalOverflow, RetryBudgetExceeded,
                     SolverError)
from .exact import HsdaConfig, hsda_run, hsda_step
from .homogeneous import (ConditioningReport, ExactEigenpair,
                          HomogenizedOperator, OptimalityReport, RitzPair,
                          check_optimality, classify_direction,
                          conditioning_report, lanczos_min_eigenpair,
                          solve_exact)
from .inexact import (IhsdaConfig, SafeguardState, default_gradient_bound,
                      ihsda_run, ihsda_step, safeguard_update)
from .inner_ascent import (AscentSchedule, InexactInfo, iteration_count,
                           run_ascent)
from .oracle import (H_dense, H_vec, ProblemOracle, SmoothnessConstants,
                     ValueFunctionOracle, yy_solve)
from .problems import (QuadraticMinimaxParams, RobustRegressionParams,
                       WToyParams, make_quadratic, make_robust_regression,
                       make_wtoy, w_eval, wtoy_analytic_constants,
                       wtoy_schedule_constants)
from .trace import IterateTrace, StepRecord

__all__ = [
    "AscentSchedule", "ConditioningReport", "ConfigError",
    "ConstructionError", "DimensionTooLarge", "EigensolverFailure",
    "ExactEigenpair", "GdaConfig", "H_dense", "H_vec", "HomogenizedOperator",
    "HsdaConfig", "IhsdaConfig", "InexactInfo", "IterateTrace",
    "MaxItersExceeded", "MismatchedProblem", "NonConvergence",
    "NumericalOverflow", "OptimalityReport", "ProblemOracle",
    "QuadraticMinimaxParams", "RetryBudgetExceeded", "RitzPair",
    "RobustRegressionParams", "SafeguardState", "SmoothnessConstants",
    "SolverError", "StepRecord", "ValueFunctionOracle", "WToyParams",
    "check_optimality", "classify_direction", "conditioning_report",
    "default_gradient_bound", "gda_run", "hsda_run", "hsda_step",
    "ihsda_run", "ihsda_step", "iteration_count", "lanczos_min_eigenpair",
    "make_quadratic", "make_robust_regression", "make_wtoy", "run_ascent",
    "safeguard_update", "solve_exact", "w_eval", "wtoy_analytic_constants",
    "wtoy_schedule_constants", "yy_solve",
]
