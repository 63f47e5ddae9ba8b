"""LP-derived bounding parameters for the rows of Q, G and their combinations.

Every parameter is the optimum of ``row . x`` over a continuous region, possibly
with one coordinate fixed to 0 or 1. Optima are computed by the float simplex and
then re-derived exactly from the optimal basis, so the values stored in a
:class:`BoundSet` are Fractions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from qlin.errors import InfeasibleInstance, MissingConstraint
from qlin.instance import GE, LE, ProblemInstance
from qlin.simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem, certify, solve_lp

log = logging.getLogger(__name__)

INF = math.inf
MIN, MAX = "min", "max"
FROBENIUS, GRID, FIXED = "frobenius", "grid", "fixed"


class _InfeasibleFixing:
    def __repr__(self):
        return "InfeasibleFixing"


INFEASIBLE_FIXING = _InfeasibleFixing()


@dataclass(frozen=True)
class Region:
    """Continuous region over x (first ``n`` variables) plus optional auxiliary variables."""

    n: int
    lower: tuple
    upper: tuple
    rows: tuple  # (coeffs, sense, rhs), coeffs dense over all variables

    @property
    def num_vars(self) -> int:
        return len(self.lower)

    def with_fixings(self, fixings: dict[int, int]) -> "Region":
        lower, upper = list(self.lower), list(self.upper)
        for i, v in fixings.items():
            lower[i] = upper[i] = Fraction(v)
        return replace(self, lower=tuple(lower), upper=tuple(upper))

    def lp(self, objective: Sequence) -> LpProblem:
        obj = list(objective) + [Fraction(0)] * (self.num_vars - len(objective))
        return LpProblem(obj, list(self.rows), list(self.lower), list(self.upper))


def relaxation_region(inst: ProblemInstance, fixings: dict[int, int] | None = None) -> Region:
    """The box [0,1]^n intersected with the side constraints, fixings applied as bounds."""
    rows = tuple((list(con.coeffs), con.sense, con.rhs) for con in inst.side_constraints)
    region = Region(inst.n, tuple([Fraction(0)] * inst.n), tuple([Fraction(1)] * inst.n), rows)
    fx = dict(inst.fixed)
    fx.update(fixings or {})
    return region.with_fixings(fx)


def row_extremes(row: Sequence, region: Region, sense: str, fixing: tuple[int, int] | None = None,
                 exact: bool = True):
    """Optimum of ``row . x`` over ``region`` (x_i clamped to v when ``fixing=(i, v)``).

    Returns a Fraction (or a float when ``exact`` is False), or ``INFEASIBLE_FIXING``.
    """
    if fixing is not None:
        i, v = fixing
        if not region.lower[i] <= v <= region.upper[i]:
            return INFEASIBLE_FIXING
        region = region.with_fixings({i: v})
    sign = 1 if sense == MIN else -1
    p = region.lp([sign * Fraction(a) for a in row])
    sol = solve_lp(p)
    if sol.status == INFEASIBLE:
        return INFEASIBLE_FIXING
    if sol.status == UNBOUNDED:
        raise ValueError("row extreme is unbounded; region must be bounded in x")
    if not exact:
        return sign * sol.objective
    value = certify(p, sol)
    if value is None:
        # basis not exactly optimal; widen outward so the bound stays valid
        val = Fraction(sol.objective) - Fraction(1, 10 ** 9) * (1 + abs(Fraction(sol.objective)))
        log.warning("could not certify LP optimum %.12g; using widened value", sol.objective)
        value = val
    return sign * value


def is_feasible(region: Region, fixing: tuple[int, int] | None = None) -> bool:
    return row_extremes([0] * region.n, region, MIN, fixing, exact=False) is not INFEASIBLE_FIXING


def propagate_fixings(region: Region, forced: dict[int, int] | None = None) -> dict[int, int]:
    """Fix every x_i whose opposite value leaves the region empty, until nothing changes."""
    forced = dict(forced or {})
    if not is_feasible(region.with_fixings(forced)):
        raise InfeasibleInstance("continuous relaxation is empty")
    changed = True
    while changed:
        changed = False
        current = region.with_fixings(forced)
        for i in range(region.n):
            if current.lower[i] == current.upper[i]:
                continue
            ok0 = is_feasible(current, (i, 0))
            ok1 = is_feasible(current, (i, 1))
            if not ok0 and not ok1:
                raise InfeasibleInstance(f"both fixings of x{i + 1} are infeasible")
            if ok0 != ok1:
                forced[i] = 1 if ok1 else 0
                current = region.with_fixings(forced)
                changed = True
    return forced


@dataclass
class GridConfig:
    eps: float = 1e-3
    lo: float = 0.1
    hi: float = 10.0
    steps: int = 100


@dataclass
class BoundOptions:
    conditional: bool = True
    enhanced: bool = False
    theta_mode: str = FROBENIUS
    theta: float | None = None  # used with FIXED
    eps: float = 1e-3
    grid: GridConfig = field(default_factory=GridConfig)


Vec = tuple  # tuple[Fraction, ...]


@dataclass
class BoundSet:
    gamma_min: Vec
    gamma_max: Vec
    lambda_min: Vec | None = None
    lambda_max: Vec | None = None
    w_min: Vec | None = None
    w_max: Vec | None = None
    gamma_bar1: Vec | None = None
    gamma_lo1: Vec | None = None
    gamma_bar2: Vec | None = None
    gamma_lo2: Vec | None = None
    lambda_bar1: Vec | None = None
    lambda_lo1: Vec | None = None
    lambda_bar2: Vec | None = None
    lambda_lo2: Vec | None = None
    w_bar1: Vec | None = None
    w_lo1: Vec | None = None
    w_bar2: Vec | None = None
    w_lo2: Vec | None = None
    theta: Fraction | None = None
    w_theta_bar1: Vec | None = None
    w_theta_lo1: Vec | None = None
    w_theta_bar2: Vec | None = None
    w_theta_lo2: Vec | None = None
    forced: dict = field(default_factory=dict)
    conditional: bool = False
    enhanced: bool = False

    VECTOR_FIELDS = (
        "gamma_min", "gamma_max", "lambda_min", "lambda_max", "w_min", "w_max",
        "gamma_bar1", "gamma_lo1", "gamma_bar2", "gamma_lo2",
        "lambda_bar1", "lambda_lo1", "lambda_bar2", "lambda_lo2",
        "w_bar1", "w_lo1", "w_bar2", "w_lo2",
        "w_theta_bar1", "w_theta_lo1", "w_theta_bar2", "w_theta_lo2",
    )

    @property
    def n(self) -> int:
        return len(self.gamma_min)


def _matrix_rows(M) -> list[list[Fraction]]:
    return [list(r) for r in M]


def _diff(A, B, a=1, b=1) -> list[list[Fraction]]:
    """a*A - b*B."""
    return [[a * x - b * y for x, y in zip(ra, rb)] for ra, rb in zip(A, B)]


def _unconditional(rows, region: Region):
    lo, hi = [], []
    for row in rows:
        lo.append(row_extremes(row, region, MIN))
        hi.append(row_extremes(row, region, MAX))
    if any(v is INFEASIBLE_FIXING for v in lo + hi):
        raise InfeasibleInstance("continuous relaxation is empty")
    return tuple(lo), tuple(hi)


def _tighter(cond, plain):
    """Componentwise tighter of two valid (bar1, lo1, bar2, lo2) families."""
    if plain is None:
        return cond
    bar1, lo1, bar2, lo2 = cond
    pb1, pl1, pb2, pl2 = plain
    low = lambda a, b: tuple(map(min, a, b))  # noqa: E731
    high = lambda a, b: tuple(map(max, a, b))  # noqa: E731
    return low(bar1, pb1), high(lo1, pl1), low(bar2, pb2), high(lo2, pl2)


def _conditional(rows, region: Region, fallback_lo, fallback_hi, exact: bool = True):
    """(bar1, lo1, bar2, lo2): max|x_i=0, min|x_i=1, max|x_i=1, min|x_i=0 per row.

    A side whose fixing is infeasible takes the unconditional value; that side
    can never be realised by a point of the region.
    """
    bar1, lo1, bar2, lo2 = [], [], [], []
    for i, row in enumerate(rows):
        for out, sense, v, fb in ((bar1, MAX, 0, fallback_hi), (lo1, MIN, 1, fallback_lo),
                                  (bar2, MAX, 1, fallback_hi), (lo2, MIN, 0, fallback_lo)):
            val = row_extremes(row, region, sense, (i, v), exact=exact)
            out.append(fb[i] if val is INFEASIBLE_FIXING else val)
    return tuple(bar1), tuple(lo1), tuple(bar2), tuple(lo2)


def enhanced_region(inst: ProblemInstance, lambda_bar2: Sequence, lambda_lo2: Sequence,
                    base: Region | None = None) -> Region:
    """Lift the region with y_i and the concave-envelope linearization of the quadratic constraint.

    Adds  h'x + sum y >= g,  y_i <= bar2_i x_i,  y_i <= G_i x + lo2_i x_i - lo2_i.
    """
    if inst.quad_constraint is None:
        raise MissingConstraint("enhanced region needs the quadratic constraint")
    qc = inst.quad_constraint
    n = inst.n
    base = base if base is not None else relaxation_region(inst)
    if base.num_vars != n:
        raise ValueError("base region must not carry auxiliary variables")
    zero = Fraction(0)
    rows = [(list(c) + [zero] * n, s, r) for c, s, r in base.rows]
    rows.append((list(qc.h) + [Fraction(1)] * n, GE, qc.g))
    for i in range(n):
        coeffs = [zero] * (2 * n)
        coeffs[i] = -Fraction(lambda_bar2[i])
        coeffs[n + i] = Fraction(1)
        rows.append((coeffs, LE, zero))
    for i in range(n):
        coeffs = [-a for a in qc.G[i]] + [zero] * n
        coeffs[i] -= Fraction(lambda_lo2[i])
        coeffs[n + i] = Fraction(1)
        rows.append((coeffs, LE, -Fraction(lambda_lo2[i])))
    return Region(n, base.lower + (-INF,) * n, base.upper + (INF,) * n, tuple(rows))


def frobenius_theta(Q, G, eps=1e-3) -> Fraction:
    """trace(QG')/trace(GG') when trace(QG') > 0 and G != 0, else 1; clamped below at eps."""
    tr_qg = sum((Fraction(q) * Fraction(g) for rq, rg in zip(Q, G) for q, g in zip(rq, rg)), Fraction(0))
    tr_gg = sum((Fraction(g) * Fraction(g) for rg in G for g in rg), Fraction(0))
    theta = tr_qg / tr_gg if tr_qg > 0 and tr_gg != 0 else Fraction(1)
    return max(theta, Fraction(str(eps)))


def theta_rows(Q, G, theta) -> list[list[Fraction]]:
    """Rows of -Q + theta*G."""
    t = Fraction(theta)
    return [[t * Fraction(g) - Fraction(q) for q, g in zip(rq, rg)] for rq, rg in zip(Q, G)]


def choose_theta(Q, G, mode: str = FROBENIUS, region: Region | None = None,
                 grid: GridConfig | None = None) -> Fraction:
    grid = grid or GridConfig()
    if mode == FROBENIUS:
        return frobenius_theta(Q, G, grid.eps)
    if mode != GRID:
        raise ValueError(f"unknown theta mode {mode!r}")
    if region is None:
        raise ValueError("grid search needs a region")
    # decimal reading of the config keeps grid points short rationals
    lo = Fraction(str(max(grid.eps, grid.lo)))
    hi = Fraction(str(grid.hi))
    steps = max(grid.steps, 2)
    best, best_norm = None, INF
    for k in range(steps):
        theta = lo + (hi - lo) * k / (steps - 1)
        rows = theta_rows(Q, G, theta)
        gaps = []
        for i, row in enumerate(rows):
            top = row_extremes(row, region, MAX, (i, 0), exact=False)
            bot = row_extremes(row, region, MIN, (i, 1), exact=False)
            if top is INFEASIBLE_FIXING or bot is INFEASIBLE_FIXING:
                continue
            gaps.append(top - bot)
        norm = float(np.linalg.norm(gaps)) if gaps else 0.0
        if norm < best_norm - 1e-12:
            best, best_norm = theta, norm
    return best


def compute_bound_set(inst: ProblemInstance, options: BoundOptions | None = None) -> BoundSet:
    """Compute every bound family the options ask for."""
    opts = options or BoundOptions()
    base = relaxation_region(inst)
    forced: dict[int, int] = {}
    if opts.conditional or opts.enhanced:
        forced = propagate_fixings(base)
    region = base.with_fixings(forced)

    Q = _matrix_rows(inst.Q)
    G = _matrix_rows(inst.G) if inst.has_quad else None
    W = _diff(G, Q) if G is not None else None

    lam = {}
    gamma_region = region
    if G is not None:
        lam["min"], lam["max"] = _unconditional(G, region)
        if opts.conditional or opts.enhanced:
            lam["cond"] = _conditional(G, region, lam["min"], lam["max"])
    plain_region, plain_lam = region, lam.get("cond")
    if opts.enhanced:
        if G is None:
            raise MissingConstraint("enhanced bounds need the quadratic constraint")
        while True:
            _, _, lb2, ll2 = lam["cond"]
            enh = enhanced_region(inst, lb2, ll2, base).with_fixings(forced)
            new = propagate_fixings(enh, forced)
            if new == forced:
                gamma_region = enh
                break
            forced = new
            region = base.with_fixings(forced)
            lam["min"], lam["max"] = _unconditional(G, region)
            lam["cond"] = _tighter(_conditional(G, region, lam["min"], lam["max"]), plain_lam)

    def cond(rows, lo, hi):
        out = _conditional(rows, gamma_region, lo, hi)
        if opts.enhanced:
            # sides emptied by the enhancement keep their plain-region value when that is tighter
            out = _tighter(out, _conditional(rows, plain_region, *_unconditional(rows, plain_region)))
        return out

    gmin, gmax = _unconditional(Q, gamma_region)
    bs = BoundSet(gmin, gmax, forced=dict(forced), conditional=opts.conditional, enhanced=opts.enhanced)
    if opts.conditional:
        bs.gamma_bar1, bs.gamma_lo1, bs.gamma_bar2, bs.gamma_lo2 = cond(Q, gmin, gmax)
    if G is None:
        return bs

    bs.lambda_min, bs.lambda_max = lam["min"], lam["max"]
    bs.w_min, bs.w_max = _unconditional(W, gamma_region)
    if "cond" in lam:
        bs.lambda_bar1, bs.lambda_lo1, bs.lambda_bar2, bs.lambda_lo2 = lam["cond"]
    if opts.conditional:
        bs.w_bar1, bs.w_lo1, bs.w_bar2, bs.w_lo2 = cond(W, bs.w_min, bs.w_max)

    if opts.theta_mode == FIXED:
        if opts.theta is None or opts.theta <= 0:
            raise ValueError("fixed theta mode needs a positive theta")
        bs.theta = Fraction(str(opts.theta)) if isinstance(opts.theta, float) else Fraction(opts.theta)
    else:
        bs.theta = choose_theta(Q, G, opts.theta_mode, gamma_region,
                                replace(opts.grid, eps=opts.eps))
    if opts.conditional:
        set_theta_bounds(bs, inst, bs.theta, gamma_region)
    return bs


def set_theta_bounds(bs: BoundSet, inst: ProblemInstance, theta, region: Region):
    """Fill the w_theta_* fields for multiplier ``theta`` over ``region``."""
    rows = theta_rows(inst.Q, inst.G, theta)
    lo, hi = _unconditional(rows, region)
    bs.theta = Fraction(theta)
    bs.w_theta_bar1, bs.w_theta_lo1, bs.w_theta_bar2, bs.w_theta_lo2 = _conditional(rows, region, lo, hi)
    return bs


def bounds_region(inst: ProblemInstance, bs: BoundSet) -> Region:
    """The region the gamma/w families of ``bs`` were computed over."""
    region = relaxation_region(inst).with_fixings(bs.forced)
    if bs.enhanced:
        region = enhanced_region(inst, bs.lambda_bar2, bs.lambda_lo2, relaxation_region(inst)).with_fixings(bs.forced)
    return region
