"""Run the full invariant check on every instance of a seeded suite.

    python scripts/check_suite.py --count 20 --n-max 8 --enhanced
"""

import argparse
import sys

from qlin.bounds import BoundOptions
from qlin.oracle import run_checks
from qlin.suite import SuiteConfig, suite_instances


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--enhanced", action="store_true")
    args = p.parse_args(argv)
    opts = BoundOptions(enhanced=args.enhanced)
    bad = 0
    for name, inst in suite_instances(SuiteConfig(args.count, args.n_min, args.n_max, args.seed)):
        flags = run_checks(inst, opts)
        bad += bool(flags)
        print(f"{name} {'ok' if not flags else 'FLAGGED'}")
        for f in flags:
            print(f"    {f}")
    print(f"{bad} of {args.count} instances flagged")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
