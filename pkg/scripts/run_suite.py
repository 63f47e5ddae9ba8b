"""Compare every model variant on a seeded instance suite and write one CSV.

    python scripts/run_suite.py --count 50 --n-min 4 --n-max 12 --out suite.csv
"""

import argparse
import sys
import time

from qlin.bounds import FIXED, FROBENIUS, GRID, BoundOptions
from qlin.oracle import CompareOptions, compare_relaxations, report_csv, workers_from_env
from qlin.suite import SuiteConfig, suite_instances


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--seed", type=int, default=2)
    p.add_argument("--no-quad", action="store_true", help="drop the quadratic constraint")
    p.add_argument("--enhanced", action="store_true")
    p.add_argument("--theta-mode", choices=(FROBENIUS, GRID, FIXED), default=FROBENIUS)
    p.add_argument("--theta", type=float)
    p.add_argument("--timing", action="store_true")
    p.add_argument("--out", help="CSV path (default stdout)")
    return p.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    suite = SuiteConfig(args.count, args.n_min, args.n_max, args.seed, with_quad_constraint=not args.no_quad)
    opts = CompareOptions(bounds=BoundOptions(enhanced=args.enhanced, theta_mode=args.theta_mode, theta=args.theta),
                          timing=args.timing, workers=workers_from_env(1))
    t0 = time.perf_counter()
    reports = []
    for name, inst in suite_instances(suite):
        reports.append(compare_relaxations(inst, opts, instance_id=name))
    text = report_csv(reports)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    flags = [f"{r.instance_id}: {f}" for r in reports for f in r.flags]
    for f in flags:
        print(f"flag {f}", file=sys.stderr)
    print(f"{len(reports)} instances, {len(flags)} flags, {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return 1 if flags else 0


if __name__ == "__main__":
    sys.exit(main())
