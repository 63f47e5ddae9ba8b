"""Seeded instance collections shared by the test suite and the experiment scripts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qlin.instance import GeneratorConfig, ProblemInstance, generate_random

# side-constraint mixes cycled through the suite
SIDE_MODES = ("none", "cardinality", "rows", "cardinality+rows")


@dataclass
class SuiteConfig:
    count: int
    n_min: int
    n_max: int
    seed: int = 0
    with_quad_constraint: bool = True
    density: float = 0.5
    coeff_range: int = 10


def generator_configs(cfg: SuiteConfig) -> list[tuple[str, GeneratorConfig]]:
    """(instance id, generator config) pairs; deterministic in ``cfg``."""
    if cfg.n_min < 2 or cfg.n_max < cfg.n_min:
        raise ValueError("need 2 <= n_min <= n_max")
    rng = np.random.default_rng(cfg.seed)
    out = []
    for k in range(cfg.count):
        n = int(rng.integers(cfg.n_min, cfg.n_max + 1))
        mode = SIDE_MODES[k % len(SIDE_MODES)]
        card = int(rng.integers(1, n)) if "cardinality" in mode else None
        rows = int(rng.integers(1, 3)) if "rows" in mode else 0
        seed = int(rng.integers(0, 2 ** 32))
        gen = GeneratorConfig(n=n, density=cfg.density, coeff_range=cfg.coeff_range, cardinality=card,
                              with_quad_constraint=cfg.with_quad_constraint, seed=seed, side_rows=rows)
        out.append((f"s{cfg.seed}-{k:03d}-n{n}", gen))
    return out


def suite_instances(cfg: SuiteConfig) -> list[tuple[str, ProblemInstance]]:
    return [(name, generate_random(gen)) for name, gen in generator_configs(cfg)]
