"""Depth-first LP-based branch-and-bound over the binary variables of a model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from qlin.models import LinearModel
from qlin.simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, SimplexOptions, solve_arrays

NODE_LIMIT = "NodeLimit"
INT_TOL = 1e-6


@dataclass
class MilpConfig:
    gap: float = 1e-6
    node_limit: int = 1_000_000
    simplex: SimplexOptions = field(default_factory=SimplexOptions)


@dataclass
class MilpSolution:
    status: str
    objective: float | None = None
    point: np.ndarray | None = None
    x: tuple | None = None
    nodes: int = 0
    best_bound: float | None = None
    root_bound: float | None = None
    bound_trace: list = field(default_factory=list)


def solve_milp(model: LinearModel, config: MilpConfig | None = None, log: TextIO | None = None) -> MilpSolution:
    """Solve ``model`` to binary optimality.

    Branches on the most fractional binary (lowest index on ties), down branch
    first; a node is pruned once its LP bound reaches the incumbent minus the gap.
    When ``log`` is given, one line per node is written: depth, bound, branch variable.
    """
    cfg = config or MilpConfig()
    c, A, senses, b, lo0, hi0 = model.dense_arrays()
    const = float(model.constant)
    binaries = np.array([j for j, v in enumerate(model.variables) if v.binary], dtype=int)
    xs = model.x_indices

    incumbent, best_point = math.inf, None
    nodes = 0
    root_bound = None
    trace = []
    # stack entries: (lower, upper, depth, parent bound, parent LP solution)
    stack = [(lo0, hi0, 0, -math.inf, None)]
    while stack:
        if nodes >= cfg.node_limit:
            break
        lo, hi, depth, parent_bound, parent = stack.pop()
        open_min = min([parent_bound] + [e[3] for e in stack])
        trace.append(min(open_min, incumbent))
        if parent_bound >= incumbent - _gap(cfg, incumbent):
            continue
        nodes += 1
        sol = solve_arrays(c, A, senses, b, lo, hi, cfg.simplex, warm=parent)
        if sol.status == UNBOUNDED:
            raise ValueError("LP relaxation is unbounded; model must bound its objective")
        if sol.status == INFEASIBLE:
            _log(log, depth, None, None)
            continue
        bound = sol.objective + const
        if root_bound is None:
            root_bound = bound
        if bound >= incumbent - _gap(cfg, incumbent):
            _log(log, depth, bound, None)
            continue
        vals = sol.x[binaries]
        frac = np.minimum(vals - np.floor(vals), np.ceil(vals) - vals)
        k = int(np.argmax(frac)) if frac.size else 0
        if frac.size == 0 or frac[k] <= INT_TOL:
            incumbent, best_point = bound, sol.x.copy()
            _log(log, depth, bound, None)
            continue
        j = int(binaries[k])
        _log(log, depth, bound, model.variables[j].name)
        up_lo, down_hi = lo.copy(), hi.copy()
        up_lo[j] = 1.0
        down_hi[j] = 0.0
        # pushed last is explored first
        stack.append((up_lo, hi, depth + 1, bound, sol))
        stack.append((lo, down_hi, depth + 1, bound, sol))

    if best_point is None:
        status = NODE_LIMIT if stack else INFEASIBLE
        return MilpSolution(status, nodes=nodes, root_bound=root_bound, bound_trace=trace)
    status = NODE_LIMIT if stack else OPTIMAL
    best_bound = min([incumbent] + [e[3] for e in stack])
    point = best_point.copy()
    point[binaries] = np.round(point[binaries])
    x = tuple(int(round(point[j])) for j in xs)
    return MilpSolution(status, incumbent, point, x, nodes, best_bound, root_bound, trace)


def _gap(cfg: MilpConfig, incumbent: float) -> float:
    if not math.isfinite(incumbent):
        return 0.0
    return cfg.gap * max(1.0, abs(incumbent))


def _log(stream, depth, bound, var):
    if stream is None:
        return
    b = "infeasible" if bound is None else format(bound, ".12g")
    stream.write(f"{depth} {b} {var if var is not None else '-'}\n")
