"""Command-line entry point: ``efas-secrecy --experiment NAME [options]``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure at one or more
points, 3 a ``--check`` assertion failed on the emitted data.
"""

from __future__ import annotations

import argparse
import os
import sys

from .channel_model import SystemConfig
from .config_io import parse_config
from .errors import ConfigValidationError
from .experiments import (
    EXIT_VALIDATION,
    EXPERIMENTS,
    METHODS,
    default_spec,
    run,
)

__all__ = ["OUTPUT_DIR_ENV", "build_parser", "main"]

OUTPUT_DIR_ENV = "EFAS_SECRECY_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc


def _methods(text: str) -> tuple:
    vals = tuple(v.strip() for v in text.split(",") if v.strip())
    if "both" in vals:
        return METHODS
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="efas-secrecy", description="Secrecy metric sweeps with analytic and Monte-Carlo estimators.")
    p.add_argument("--experiment", choices=sorted(EXPERIMENTS), help="named sweep to run")
    p.add_argument("--config", help="TOML configuration file (omitted keys keep their defaults)")
    p.add_argument("--seed", type=int, help="master seed, overriding the config")
    p.add_argument("--samples", type=int, help="Monte-Carlo draws per point")
    p.add_argument("--methods", type=_methods, default=METHODS,
                   help="comma-separated subset of analytic,monte-carlo (default: both)")
    p.add_argument("--workers", type=int, default=1, help="Monte-Carlo worker threads")
    p.add_argument("--grid", type=_floats, help="comma-separated axis values replacing the default grid")
    p.add_argument("--output-dir", help=f"output directory (default: ${OUTPUT_DIR_ENV} or ./{DEFAULT_OUTPUT_DIR})")
    p.add_argument("--check", action="store_true", help="assert trends and cross-method agreement on the output")
    p.add_argument("--list", action="store_true", help="list experiments with their axes and exit")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.list:
        for name, d in sorted(EXPERIMENTS.items()):
            print(f"{name:16s} axis={d.axis:7s} series={','.join(lbl for lbl, _ in d.series)}")
        return 0
    if not args.experiment:
        print("error: --experiment is required", file=sys.stderr)
        return EXIT_VALIDATION
    out = args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR
    try:
        base = parse_config(args.config) if args.config else SystemConfig()
        if args.seed is not None:
            base = base.with_(seed=args.seed)
        kw = {"samples": args.samples, "workers": args.workers}
        if args.grid is not None:
            kw["grid"] = tuple(args.grid)
        spec = default_spec(args.experiment, base, out, args.methods, **kw)
        result = run(spec, check=args.check)
    except ConfigValidationError as exc:
        print("error: invalid input", file=sys.stderr)
        for field, msg in exc.errors:
            print(f"  {field}: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    for name, ok, detail in result.checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    for f in result.files:
        print(f)
    if result.summary["error_rows"]:
        print(f"{result.summary['error_rows']} point(s) failed; see the error column", file=sys.stderr)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
