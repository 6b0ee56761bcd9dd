"""Command-line figure rendering: `hsda-plot` with a spec file or traces.

Exit codes: 0 on success, 2 on malformed specs or trace files.
"""

from __future__ import annotations

import argparse
import sys

from .reader import SchemaError
from .render import PlotSpec, render

EXIT_OK = 0
EXIT_SCHEMA = 2


def parse_spec_file(path: str) -> PlotSpec:
    """Flat key=value spec: input.N, label.N, out, log_left, log_right."""
    entries: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if "=" not in stripped:
                    raise SchemaError(
                        f"{path}:{lineno}: expected key=value")
                key, _, value = stripped.partition("=")
                entries[key.strip()] = value.strip()
    except OSError as err:
        raise SchemaError(f"cannot read spec {path}: {err}") from err

    inputs = [entries[k] for k in sorted(entries) if k.startswith("input.")]
    labels = [entries[k] for k in sorted(entries) if k.startswith("label.")]
    if not inputs:
        raise SchemaError(f"{path}: spec lists no input traces")
    if "out" not in entries:
        raise SchemaError(f"{path}: spec is missing the 'out' image path")

    def flag(key: str, default: bool) -> bool:
        raw = entries.get(key)
        if raw is None:
            return default
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise SchemaError(f"{path}: boolean expected for {key}, got '{raw}'")

    return PlotSpec(inputs=inputs, output=entries["out"], labels=labels,
                    log_left=flag("log_left", True),
                    log_right=flag("log_right", True))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsda-plot",
        description="Render dual-axis convergence figures from trace CSVs")
    parser.add_argument("traces", nargs="*", help="trace CSV files")
    parser.add_argument("--spec", help="key=value spec file")
    parser.add_argument("--out", help="output image path "
                                      "(required without --spec)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.spec is not None:
            spec = parse_spec_file(args.spec)
        else:
            if not args.traces:
                raise SchemaError("no traces given (and no --spec)")
            if not args.out:
                raise SchemaError("--out is required with positional traces")
            spec = PlotSpec(inputs=list(args.traces), output=args.out)
        path = render(spec)
    except (SchemaError, ValueError) as err:
        print(f"plot error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
