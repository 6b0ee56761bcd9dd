"""Command-line entry points: solve, compare, fdcheck.

Exit codes: 0 on success, 2 on configuration errors, 3 on driver errors.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, MismatchedProblem, SolverError
from .harness import (ExperimentConfig, build_problem, compare_runs,
                      fd_check, load_config, parse_config, run_experiment)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DRIVER = 3


def _apply_overrides(config: ExperimentConfig, pairs: list[str]) -> None:
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got '{pair}'")
        key, _, value = pair.partition("=")
        config.entries[key.strip()] = value.strip()


def _cmd_solve(args) -> int:
    config = load_config(args.config)
    _apply_overrides(config, args.set or [])
    if args.out is not None:
        config.entries["out.dir"] = args.out
    if args.seed is not None:
        config.entries["seed"] = str(args.seed)
    result = run_experiment(config)
    trace = result.trace
    print(f"wrote {result.csv_path}")
    print(f"wrote {result.json_path}")
    print(f"termination={trace.termination} outer={trace.outer_iters} "
          f"hvp={trace.hvp_total}")
    if trace.final_f_gap is not None:
        print(f"final_f_gap={trace.final_f_gap:.6e}")
    if trace.final_grad_norm is not None:
        print(f"final_grad_norm={trace.final_grad_norm:.6e}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    out = compare_runs(args.traces, args.out)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_fdcheck(args) -> int:
    entries = {"problem.name": args.problem, "algorithm": "hsda"}
    config = ExperimentConfig(entries)
    _apply_overrides(config, args.set or [])
    built = build_problem(config, seed=args.seed)
    report = fd_check(built.oracle, points=args.points, step=args.step,
                      seed=args.seed, accept=built.fd_accept)
    print(f"points={args.points} step={args.step:g}")
    print(f"grad_max_err={report.grad_max_err:.6e}")
    print(f"hess_max_err={report.hess_max_err:.6e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsda",
        description="Second-order minimax solvers and benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one configured experiment")
    p_solve.add_argument("--config", required=True, help="key=value config file")
    p_solve.add_argument("--set", action="append", metavar="KEY=VALUE",
                         help="override a config entry")
    p_solve.add_argument("--out", help="output directory")
    p_solve.add_argument("--seed", type=int, help="random seed")
    p_solve.set_defaults(func=_cmd_solve)

    p_cmp = sub.add_parser("compare", help="merge traces of one problem")
    p_cmp.add_argument("--out", required=True, help="merged CSV path")
    p_cmp.add_argument("traces", nargs="+", help="trace CSV files")
    p_cmp.set_defaults(func=_cmd_compare)

    p_fd = sub.add_parser("fdcheck",
                          help="finite-difference check of closed forms")
    p_fd.add_argument("--problem", required=True)
    p_fd.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_fd.add_argument("--points", type=int, default=10)
    p_fd.add_argument("--step", type=float, default=1e-5)
    p_fd.add_argument("--seed", type=int, default=0)
    p_fd.set_defaults(func=_cmd_fdcheck)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, MismatchedProblem) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as err:
        print(f"driver error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_DRIVER


if __name__ == "__main__":
    sys.exit(main())
