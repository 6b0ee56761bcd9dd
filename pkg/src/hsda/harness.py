"""Experiment configuration, trace files, and independent checking oracles.

Configs are flat UTF-8 ``key=value`` lines with dotted namespaces; they are
kept as raw strings internally so parse/serialize round-trips are exact.
Traces are written as a CSV (one row per outer iteration plus a final-state
row) with a companion JSON summary that echoes the resolved config.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .baselines import GdaConfig, gda_run
from .errors import ConfigError, MismatchedProblem, SolverError
from .exact import HsdaConfig, hsda_run
from .inexact import IhsdaConfig, default_gradient_bound, ihsda_run
from .inner_ascent import AscentSchedule
from .oracle import Array, ProblemOracle, SmoothnessConstants
from .problems import (QuadraticMinimaxParams, RobustRegressionParams,
                       WToyParams, make_quadratic, make_robust_regression,
                       make_wtoy, sample_design, wtoy_knots,
                       wtoy_schedule_constants)
from .trace import IterateTrace

TRACE_COLUMNS = ("t", "f_gap", "grad_norm", "v_abs", "delta_or_zeta",
                 "step_norm", "inner_iters", "lanczos_iters", "hvp_cum",
                 "wall_ms")

#: Named start points for the W problem: one near its strict saddle, one
#: farther out to probe global behavior.
_INIT_PRESETS_X = {
    "near_saddle": (0.1, 0.1, 0.1),
    "far_start": (1.0, 0.1, 0.1),
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

class ExperimentConfig:
    """Flat string-valued configuration with typed accessors."""

    def __init__(self, entries: dict[str, str]):
        self.entries = dict(entries)

    def __eq__(self, other):
        return isinstance(other, ExperimentConfig) and self.entries == other.entries

    def __repr__(self):
        return f"ExperimentConfig({self.entries!r})"

    def get(self, key: str, default: Optional[str] = None) -> Optional[str]:
        return self.entries.get(key, default)

    def require(self, key: str) -> str:
        if key not in self.entries:
            raise ConfigError(f"missing required config key '{key}'")
        return self.entries[key]

    def get_float(self, key: str, default: Optional[float] = None) -> Optional[float]:
        raw = self.entries.get(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError as err:
            raise ConfigError(f"key '{key}': expected a number, got '{raw}'") from err

    def get_int(self, key: str, default: Optional[int] = None) -> Optional[int]:
        raw = self.entries.get(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError as err:
            raise ConfigError(f"key '{key}': expected an integer, got '{raw}'") from err

    def get_bool(self, key: str, default: bool = False) -> bool:
        raw = self.entries.get(key)
        if raw is None:
            return default
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"key '{key}': expected a boolean, got '{raw}'")


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key=value`` lines; '#' starts a comment, blanks are skipped."""
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got '{stripped}'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        entries[key] = value
    return ExperimentConfig(entries)


def serialize_config(config: ExperimentConfig) -> str:
    return "".join(f"{k}={config.entries[k]}\n" for k in sorted(config.entries))


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


_COMMON_KEYS = {"problem.name", "algorithm", "seed", "init.x", "init.y",
                "trace.snapshots", "out.dir", "out.name"}

_PROBLEM_KEYS = {
    "wtoy": {"problem.eps_w", "problem.L_w"},
    "quadratic": {"problem.dim_x", "problem.dim_y", "problem.mu_y",
                  "problem.spectrum_lo", "problem.spectrum_hi",
                  "problem.coupling_scale", "problem.l2_target",
                  "problem.seed"},
    "robust_regression": {"problem.n_features", "problem.n_samples",
                          "problem.lambda_adv", "problem.x_radius",
                          "problem.seed"},
}

_ALG_KEYS = {
    "hsda": {"alg.eps", "alg.omega", "alg.max_outer", "alg.warm_dist",
             "alg.constants"},
    "ihsda": {"alg.eps", "alg.omega", "alg.max_outer", "alg.warm_dist",
              "alg.constants", "alg.B_g", "alg.retries",
              "alg.lanczos_max_iters"},
    "gda": {"alg.step_x", "alg.step_y", "alg.ascent_steps", "alg.max_outer"},
}


def validate_config(config: ExperimentConfig) -> None:
    """Reject unknown keys and unknown problem/algorithm names."""
    problem = config.require("problem.name")
    if problem not in _PROBLEM_KEYS:
        raise ConfigError(f"unknown problem '{problem}'; "
                          f"expected one of {sorted(_PROBLEM_KEYS)}")
    algorithm = config.require("algorithm")
    if algorithm not in _ALG_KEYS:
        raise ConfigError(f"unknown algorithm '{algorithm}'; "
                          f"expected one of {sorted(_ALG_KEYS)}")
    allowed = _COMMON_KEYS | _PROBLEM_KEYS[problem] | _ALG_KEYS[algorithm]
    unknown = set(config.entries) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")


# --------------------------------------------------------------------------
# Problem construction
# --------------------------------------------------------------------------

@dataclass
class BuiltProblem:
    oracle: ProblemOracle
    run_constants: SmoothnessConstants
    default_x: Array
    default_y: Array
    fd_accept: Optional[Callable[[Array], bool]] = None


def build_problem(config: ExperimentConfig, seed: int) -> BuiltProblem:
    name = config.require("problem.name")
    if name == "wtoy":
        params = WToyParams(eps_w=config.get_float("problem.eps_w", 0.01),
                            L_w=config.get_float("problem.L_w", 5.0))
        oracle = make_wtoy(params)
        which = config.get("alg.constants", "schedule")
        if which == "schedule":
            constants = wtoy_schedule_constants(params)
        elif which == "analytic":
            constants = oracle.constants
        else:
            raise ConfigError("alg.constants must be 'schedule' or 'analytic'")
        knots = wtoy_knots(params)

        def away_from_knots(x: Array, pad: float = 1e-2) -> bool:
            return all(abs(float(x[2]) - k) > pad for k in knots)

        return BuiltProblem(oracle=oracle, run_constants=constants,
                            default_x=np.array([0.1, 0.1, 0.1]),
                            default_y=np.zeros(2), fd_accept=away_from_knots)

    if name == "quadratic":
        dim_x = config.get_int("problem.dim_x")
        dim_y = config.get_int("problem.dim_y")
        if dim_x is None or dim_y is None:
            raise ConfigError("quadratic requires problem.dim_x and problem.dim_y")
        params = QuadraticMinimaxParams(
            dim_x=dim_x, dim_y=dim_y,
            mu_y=config.get_float("problem.mu_y", 1.0),
            hess_spectrum=(config.get_float("problem.spectrum_lo", 0.2),
                           config.get_float("problem.spectrum_hi", 3.0)),
            coupling_scale=config.get_float("problem.coupling_scale", 0.5),
            l2_target=config.get_float("problem.l2_target", 2.0))
        oracle = make_quadratic(params, seed=config.get_int("problem.seed", seed))
        return BuiltProblem(oracle=oracle, run_constants=oracle.constants,
                            default_x=np.zeros(dim_x), default_y=np.zeros(dim_y))

    if name == "robust_regression":
        n_features = config.get_int("problem.n_features")
        n_samples = config.get_int("problem.n_samples")
        if n_features is None or n_samples is None:
            raise ConfigError("robust_regression requires problem.n_features "
                              "and problem.n_samples")
        params = RobustRegressionParams(
            n_features=n_features, n_samples=n_samples,
            lambda_adv=config.get_float("problem.lambda_adv", 2.0),
            x_radius=config.get_float("problem.x_radius", 1.0))
        pseed = config.get_int("problem.seed", seed)
        oracle = make_robust_regression(params, seed=pseed)
        design, _ = sample_design(params, seed=pseed)
        return BuiltProblem(oracle=oracle, run_constants=oracle.constants,
                            default_x=np.zeros(n_features),
                            default_y=design.ravel())

    raise ConfigError(f"unknown problem '{name}'")


def _parse_init(raw: Optional[str], default: Array, dim: int,
                presets: dict[str, tuple[float, ...]],
                label: str) -> Array:
    if raw is None or raw == "default":
        vec = np.asarray(default, dtype=float)
    elif raw == "zeros":
        vec = np.zeros(dim)
    elif raw in presets:
        vec = np.array(presets[raw], dtype=float)
    else:
        try:
            vec = np.array([float(p) for p in raw.split(",")], dtype=float)
        except ValueError as err:
            raise ConfigError(f"{label}: cannot parse '{raw}'") from err
    if vec.shape[0] != dim:
        raise ConfigError(f"{label}: expected length {dim}, got {vec.shape[0]}")
    return vec


# --------------------------------------------------------------------------
# Running experiments
# --------------------------------------------------------------------------

@dataclass
class TraceFile:
    csv_path: str
    json_path: str
    trace: Optional[IterateTrace] = None


def run_algorithm(config: ExperimentConfig, built: BuiltProblem,
                  seed: int) -> IterateTrace:
    algorithm = config.require("algorithm")
    oracle, constants = built.oracle, built.run_constants
    x1 = _parse_init(config.get("init.x"), built.default_x, oracle.dim_x,
                     _INIT_PRESETS_X, "init.x")
    y0 = _parse_init(config.get("init.y"), built.default_y, oracle.dim_y,
                     {}, "init.y")
    snapshots = config.get_bool("trace.snapshots", False)

    try:
        if algorithm == "hsda":
            run_cfg = HsdaConfig.from_accuracy(
                eps=config.get_float("alg.eps", 1e-3),
                constants=constants,
                omega=config.get_float("alg.omega", 0.3),
                max_outer=config.get_int("alg.max_outer", 200),
                warm_dist=config.get_float("alg.warm_dist", 10.0),
                snapshots=snapshots)
            return hsda_run(oracle, constants, run_cfg, x1, y0)
        if algorithm == "ihsda":
            B_g = config.get_float("alg.B_g")
            if B_g is None:
                if oracle.closed_form is None:
                    raise ConfigError("alg.B_g is required for problems "
                                      "without a closed form")
                B_g = default_gradient_bound(oracle, x1, seed=seed)
            run_cfg = IhsdaConfig.from_accuracy(
                eps=config.get_float("alg.eps", 1e-3),
                constants=constants, B_g=B_g,
                omega=config.get_float("alg.omega", 0.3),
                max_outer=config.get_int("alg.max_outer", 200),
                max_safeguard_retries=config.get_int("alg.retries", 4),
                lanczos_max_iters=config.get_int("alg.lanczos_max_iters"),
                seed=seed,
                warm_dist=config.get_float("alg.warm_dist", 10.0),
                snapshots=snapshots)
            return ihsda_run(oracle, constants, run_cfg, x1, y0)
        if algorithm == "gda":
            default_step = 1.0 / constants.ell1
            run_cfg = GdaConfig(
                step_x=config.get_float("alg.step_x", default_step),
                step_y=config.get_float("alg.step_y", default_step),
                ascent_steps_per_descent=config.get_int("alg.ascent_steps", 1),
                max_outer=config.get_int("alg.max_outer", 200),
                snapshots=snapshots)
            return gda_run(oracle, run_cfg, x1, y0)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    raise ConfigError(f"unknown algorithm '{algorithm}'")


def trace_rows(trace: IterateTrace) -> list[list[str]]:
    """CSV body: one row per iteration plus the final-state row."""
    rows = []
    for r in trace.records:
        rows.append([str(r.t), _fmt(r.f_gap), _fmt(r.grad_norm),
                     _fmt(r.v_abs), _fmt(r.delta_or_zeta), _fmt(r.step_norm),
                     str(r.inner_iters), str(r.lanczos_iters),
                     str(r.hvp_cum), _fmt(r.wall_ms)])
    final_t = (trace.records[-1].t + 1) if trace.records else 1
    rows.append([str(final_t), _fmt(trace.final_f_gap),
                 _fmt(trace.final_grad_norm), "", "", "", "", "",
                 str(trace.hvp_total), ""])
    return rows


def write_trace_files(trace: IterateTrace, config: ExperimentConfig,
                      seed: int, csv_path: str, json_path: str,
                      error: Optional[str] = None) -> None:
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for row in trace_rows(trace):
            fh.write(",".join(row) + "\n")
    summary = {
        "algorithm": trace.algorithm,
        "termination": trace.termination,
        "certified": trace.certified,
        "final_f_gap": trace.final_f_gap,
        "final_grad_norm": trace.final_grad_norm,
        "final_lambda_min": trace.final_lambda_min,
        "totals": {
            "outer_iters": trace.outer_iters,
            "inner_iters": trace.inner_total,
            "lanczos_iters": trace.lanczos_total,
            "hvp": trace.hvp_total,
            "wall_ms": trace.wall_ms_total,
        },
        "seed": seed,
        "config": dict(sorted(config.entries.items())),
        "error": error,
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(config: ExperimentConfig) -> TraceFile:
    """Build the problem, run the configured driver, write CSV + JSON.

    Deterministic for a fixed config (wall-clock columns aside). Driver
    failures are recorded in the JSON summary before being re-raised.
    """
    validate_config(config)
    seed = config.get_int("seed", 0)
    out_dir = config.get("out.dir", ".")
    os.makedirs(out_dir, exist_ok=True)
    name = config.get("out.name") or (
        f"{config.require('problem.name')}_{config.require('algorithm')}"
        f"_s{seed}")
    csv_path = os.path.join(out_dir, name + ".csv")
    json_path = os.path.join(out_dir, name + ".json")

    built = build_problem(config, seed)
    try:
        trace = run_algorithm(config, built, seed)
    except SolverError as err:
        partial = IterateTrace(algorithm=config.require("algorithm"))
        write_trace_files(partial, config, seed, csv_path, json_path,
                          error=f"{type(err).__name__}: {err}")
        raise
    write_trace_files(trace, config, seed, csv_path, json_path)
    return TraceFile(csv_path=csv_path, json_path=json_path, trace=trace)


# --------------------------------------------------------------------------
# Trace reading and comparison
# --------------------------------------------------------------------------

def read_trace_csv(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines:
        raise MismatchedProblem(f"empty trace file: {path}")
    header = lines[0].split(",")
    if header != list(TRACE_COLUMNS):
        raise MismatchedProblem(f"unexpected trace header in {path}")
    return header, [line.split(",") for line in lines[1:]]


def read_summary(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _problem_identity(summary: dict) -> dict:
    cfg = summary.get("config", {})
    return {k: v for k, v in cfg.items() if k.startswith("problem.")}


def compare_runs(trace_csv_paths: list[str], out_path: str) -> str:
    """Merge traces over the same problem into one iteration-keyed CSV.

    Column groups are prefixed by each run's algorithm label. Raises
    :class:`MismatchedProblem` for fewer than two traces or differing
    problem identities (compared through the JSON config echoes).
    """
    if len(trace_csv_paths) < 2:
        raise MismatchedProblem("need at least two traces to compare")
    identities = []
    labels = []
    tables = []
    for path in trace_csv_paths:
        json_path = os.path.splitext(path)[0] + ".json"
        summary = read_summary(json_path)
        identities.append(_problem_identity(summary))
        labels.append(summary.get("algorithm", "run"))
        _, rows = read_trace_csv(path)
        tables.append({row[0]: row[1:] for row in rows})
    for ident in identities[1:]:
        if ident != identities[0]:
            raise MismatchedProblem(
                f"problem identities differ: {identities[0]} vs {ident}")
    seen: dict[str, int] = {}
    for i, label in enumerate(labels):
        seen[label] = seen.get(label, 0) + 1
        if seen[label] > 1:
            labels[i] = f"{label}-{seen[label]}"

    all_t = sorted({int(t) for table in tables for t in table})
    value_cols = list(TRACE_COLUMNS[1:])
    header = ["t"] + [f"{label}.{col}" for label in labels for col in value_cols]
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for t in all_t:
            row = [str(t)]
            for table in tables:
                row.extend(table.get(str(t), [""] * len(value_cols)))
            fh.write(",".join(row) + "\n")
    return out_path


# --------------------------------------------------------------------------
# Finite-difference oracle
# --------------------------------------------------------------------------

@dataclass
class FdReport:
    """Max deviations between closed forms and finite differences of F."""

    grad_max_err: float
    hess_max_err: float
    points: list = field(default_factory=list)
    grad_errs: list = field(default_factory=list)
    hess_errs: list = field(default_factory=list)


def _maximize_y(oracle: ProblemOracle, x: Array, y_start: Array,
                schedule: AscentSchedule, n_cap: int,
                gtol: float = 1e-12) -> Array:
    """Accelerated ascent until stationarity in y (or the step cap)."""
    y = np.array(y_start, dtype=float, copy=True)
    y_look = y.copy()
    for _ in range(n_cap):
        g = oracle.grad_y(x, y_look)
        if float(np.linalg.norm(g)) <= gtol:
            break
        y_next = y_look + schedule.eta1 * g
        y_look = y_next + schedule.eta2 * (y_next - y)
        y = y_next
    return y


def fd_check(oracle: ProblemOracle, points: int = 50, step: float = 1e-5,
             seed: int = 0, radius: float = 1.0,
             accept: Optional[Callable[[Array], bool]] = None) -> FdReport:
    """Check closed-form grad/Hessian against finite differences of F.

    F itself is evaluated independently by high-accuracy inner maximization
    (accelerated ascent capped at 50 sqrt(kappa) log(1e12) steps, with an
    early exit once the y-gradient is stationary to machine level). The
    gradient uses central differences with step ``step``; the Hessian uses
    the four-point cross-difference with step sqrt(step). ``accept`` can
    reject sample points (e.g. too close to curvature knots).
    """
    if oracle.closed_form is None:
        raise ValueError("fd_check requires a closed-form value function")
    if step <= 0:
        raise ValueError("step must be positive")
    if oracle.constants is None:
        raise ValueError("fd_check requires smoothness constants for the "
                         "inner maximization schedule")
    cf = oracle.closed_form
    constants = oracle.constants
    schedule = AscentSchedule.from_constants(constants, eps1=1.0, eps2=1.0)
    n_cap = math.ceil(50.0 * math.sqrt(constants.kappa) * math.log(1e12))
    rng = np.random.default_rng(seed)
    n = oracle.dim_x

    y_warm = np.zeros(oracle.dim_y)

    def F_indep(x: Array) -> tuple[float, Array]:
        y = _maximize_y(oracle, x, y_warm, schedule, n_cap)
        return oracle.f(x, y), y

    h = step
    h2 = math.sqrt(step)
    report = FdReport(grad_max_err=0.0, hess_max_err=0.0)
    for _ in range(points):
        for _ in range(1000):
            x = rng.uniform(-radius, radius, n)
            if accept is None or accept(x):
                break
        else:
            raise ValueError("accept filter rejected 1000 straight samples")
        _, y_warm = F_indep(x)

        grad_fd = np.empty(n)
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            fp, _ = F_indep(x + e)
            fm, _ = F_indep(x - e)
            grad_fd[j] = (fp - fm) / (2.0 * h)
        grad_err = float(np.max(np.abs(grad_fd - cf.grad_F(x))))

        hess_fd = np.empty((n, n))
        for j in range(n):
            for k in range(j, n):
                ej = np.zeros(n)
                ek = np.zeros(n)
                ej[j] = h2
                ek[k] = h2
                fpp, _ = F_indep(x + ej + ek)
                fpm, _ = F_indep(x + ej - ek)
                fmp, _ = F_indep(x - ej + ek)
                fmm, _ = F_indep(x - ej - ek)
                hess_fd[j, k] = hess_fd[k, j] = (fpp - fpm - fmp + fmm) / (4.0 * h2 * h2)
        hess_err = float(np.max(np.abs(hess_fd - cf.hess_F(x))))

        report.points.append(x)
        report.grad_errs.append(grad_err)
        report.hess_errs.append(hess_err)
        report.grad_max_err = max(report.grad_max_err, grad_err)
        report.hess_max_err = max(report.hess_max_err, hess_err)
    return report
