"""Root LP gap of each (variant, cuts) pair under several bound settings.

The gap is (optimum - lp_bound) / max(1, |optimum|), averaged over the
feasible instances of a seeded suite; "closed" counts instances with zero gap.

    python scripts/tightness_study.py --count 30 --n-min 6 --n-max 10
"""

import argparse
import sys
from collections import defaultdict

import numpy as np

from qlin.bounds import GRID, BoundOptions
from qlin.oracle import CompareOptions, compare_relaxations
from qlin.simplex import OPTIMAL
from qlin.suite import SuiteConfig, suite_instances

SETTINGS = {
    "plain": BoundOptions(conditional=False),
    "conditional": BoundOptions(),
    "enhanced": BoundOptions(enhanced=True),
    "grid-theta": BoundOptions(theta_mode=GRID),
}


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=30)
    p.add_argument("--n-min", type=int, default=6)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--seed", type=int, default=5)
    p.add_argument("--settings", nargs="+", choices=sorted(SETTINGS), default=list(SETTINGS))
    return p.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    instances = suite_instances(SuiteConfig(args.count, args.n_min, args.n_max, args.seed))
    gaps = defaultdict(list)
    for setting in args.settings:
        opts = CompareOptions(bounds=SETTINGS[setting])
        for name, inst in instances:
            rep = compare_relaxations(inst, opts, instance_id=name)
            for r in rep.rows:
                if r.milp_status != OPTIMAL or r.lp_bound is None:
                    continue
                opt = float(r.oracle_objective)
                gaps[(setting, r.variant, r.cuts)].append((opt - r.lp_bound) / max(1.0, abs(opt)))
    print(f"{'setting':<12} {'variant':<11} {'cuts':<6} {'mean gap':>10} {'max gap':>10} {'closed':>7}")
    for (setting, variant, cuts), g in gaps.items():
        g = np.array(g)
        closed = int(np.sum(g <= 1e-6))
        print(f"{setting:<12} {variant:<11} {cuts:<6} {g.mean():>10.4f} {g.max():>10.4f} {closed:>3}/{len(g):<3}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
