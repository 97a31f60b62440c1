"""Run every named experiment and write CSV and summary files.

Usage: python3 scripts/run_all.py [--output-dir DIR] [--methods analytic,monte-carlo] [--samples N] [--check]
"""

from __future__ import annotations

import argparse
import sys
import time

from efas_secrecy.experiments import EXPERIMENTS, METHODS, default_spec, run


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--output-dir", default="results")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--samples", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--check", action="store_true")
    p.add_argument("--only", help="comma-separated subset of experiments")
    args = p.parse_args(argv)
    names = args.only.split(",") if args.only else sorted(EXPERIMENTS)
    methods = tuple(m for m in args.methods.split(",") if m)
    worst = 0
    for name in names:
        t0 = time.perf_counter()
        spec = default_spec(name, output_dir=args.output_dir, methods=methods, samples=args.samples,
                            workers=args.workers)
        res = run(spec, check=args.check)
        failed = [n for n, ok, _ in res.checks if not ok]
        print(f"{name:16s} status={res.status} {time.perf_counter() - t0:6.1f}s" + (f"  failed: {failed}" if failed else ""))
        worst = max(worst, res.status)
    return worst


if __name__ == "__main__":
    sys.exit(main())
