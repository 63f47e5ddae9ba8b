"""Exhaustive ground truth and the harnesses that compare models against it."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from qlin.bnb import MilpConfig, solve_milp
from qlin.bounds import BoundOptions, BoundSet, compute_bound_set
from qlin.envelopes import identity_residuals
from qlin.errors import TooLarge
from qlin.instance import EQ, GE, LE, ProblemInstance, evaluate_point
from qlin.models import (BASE, COND, NO_CUTS, VARIANTS, Cuts, Variant, add_cuts, build_model,
                         canonical_lift, cut_compatible, lp_relaxation, theta_cuts)
from qlin.simplex import INFEASIBLE, OPTIMAL, solve_arrays

MAX_ORACLE_N = 24
TOL = 1e-6


def _lcm_ints(values) -> tuple[list[int], int]:
    fr = [Fraction(v) for v in values]
    d = 1
    for v in fr:
        d = math.lcm(d, v.denominator)
    return [int(v * d) for v in fr], d


def _int_array(ints, shape):
    big = max((abs(v) for v in ints), default=0)
    return np.array(ints, dtype=np.int64 if big < 2 ** 40 else object).reshape(shape)


def all_points(n: int) -> np.ndarray:
    idx = np.arange(2 ** n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.int64)


def _quadratic_values(P, lin, M, const=0):
    """d*(lin'x + x'Mx) for each row x of P, d*const, and the common denominator d."""
    n = P.shape[1]
    ints, d = _lcm_ints(list(lin) + [v for r in M for v in r] + [const])
    L = _int_array(ints[:n], (n,))
    Mi = _int_array(ints[n:-1], (n, n))
    Pm = P.astype(Mi.dtype)
    vals = Pm @ L + ((Pm @ Mi) * Pm).sum(axis=1)
    return vals, ints[-1], d


def feasible_points(inst: ProblemInstance) -> tuple[np.ndarray, np.ndarray, int]:
    """All points of X with their objective numerators and the common denominator."""
    if inst.n > MAX_ORACLE_N:
        raise TooLarge(f"n={inst.n} exceeds the enumeration limit {MAX_ORACLE_N}")
    P = all_points(inst.n)
    keep = np.ones(len(P), dtype=bool)
    for i, v in inst.fixed.items():
        keep &= P[:, i] == v
    for con in inst.side_constraints:
        ints, d = _lcm_ints(list(con.coeffs) + [con.rhs])
        lhs = P @ _int_array(ints[:-1], (inst.n,))
        rhs = ints[-1]
        keep &= {LE: lhs <= rhs, GE: lhs >= rhs, EQ: lhs == rhs}[con.sense]
    if inst.quad_constraint is not None:
        qc = inst.quad_constraint
        vals, g_scaled, _ = _quadratic_values(P, qc.h, qc.G, qc.g)
        keep &= vals >= g_scaled
    P = P[keep]
    obj, _, d = _quadratic_values(P, inst.c, inst.Q)
    return P, obj, d


@dataclass
class OracleResult:
    status: str
    objective: Fraction | None = None
    argmins: list = field(default_factory=list)
    feasible_count: int = 0


def enumerate_optimum(inst: ProblemInstance) -> OracleResult:
    """Exact minimum of the instance over all 2^n binary points."""
    P, obj, d = feasible_points(inst)
    if len(P) == 0:
        return OracleResult(INFEASIBLE)
    best = min(obj)
    rows = P[obj == best]
    argmins = sorted(tuple(int(v) for v in r) for r in rows)
    return OracleResult(OPTIMAL, Fraction(int(best), d), argmins, len(P))


@dataclass
class EquivalenceResult:
    passed: bool
    details: list = field(default_factory=list)
    milp_objective: float | None = None
    oracle_objective: Fraction | None = None
    nodes: int = 0


def verify_equivalence(inst: ProblemInstance, bounds: BoundSet, variant, cuts: Cuts = NO_CUTS,
                       oracle: OracleResult | None = None, config: MilpConfig | None = None) -> EquivalenceResult:
    """Model optimum vs oracle, plus both directions of the solution correspondence."""
    oracle = oracle or enumerate_optimum(inst)
    model = add_cuts(build_model(inst, bounds, variant), inst, bounds, cuts)
    sol = solve_milp(model, config)
    res = EquivalenceResult(True, milp_objective=sol.objective, oracle_objective=oracle.objective,
                            nodes=sol.nodes)
    tag = f"{Variant(variant).value}/{cuts.label}"
    if sol.status != oracle.status:
        res.passed = False
        res.details.append(f"{tag}: status {sol.status} but oracle says {oracle.status}")
        return res
    if oracle.status != OPTIMAL:
        return res
    if abs(sol.objective - float(oracle.objective)) > TOL:
        res.passed = False
        res.details.append(f"{tag}: milp {sol.objective:.12g} != oracle {float(oracle.objective):.12g}")
    ev = evaluate_point(inst, list(sol.x))
    if not ev["feasible"]:
        res.passed = False
        res.details.append(f"{tag}: extracted x {sol.x} is infeasible for the instance")
    elif ev["objective"] != oracle.objective:
        res.passed = False
        res.details.append(f"{tag}: extracted x has objective {ev['objective']} != {oracle.objective}")
    for x in oracle.argmins:
        lift = canonical_lift(inst, bounds, model, x)
        bad = model.violations(lift)
        if bad:
            res.passed = False
            res.details.append(f"{tag}: lift of {x} violates {', '.join(bad[:5])}")
        elif model.objective_value(lift) != oracle.objective:
            res.passed = False
            res.details.append(f"{tag}: lift objective {model.objective_value(lift)} != {oracle.objective}")
    return res


CUT_ORDER = ("none", "base", "cond", "theta")


def combinations(inst: ProblemInstance, bounds: BoundSet) -> list[tuple[Variant, Cuts]]:
    """Valid (variant, cuts) pairs in report order."""
    out = []
    for v in VARIANTS:
        if v is Variant.NBP_BAR and bounds.gamma_lo1 is None:
            continue
        for kind in CUT_ORDER:
            cuts = theta_cuts() if kind == "theta" else Cuts(kind)
            if kind == "cond" and bounds.w_bar1 is None:
                continue
            if kind == "theta" and bounds.w_theta_bar1 is None:
                continue
            if cut_compatible(v, cuts, inst):
                out.append((v, cuts))
    return out


@dataclass
class ReportRow:
    variant: str
    cuts: str
    lp_bound: float | None
    milp_objective: float | None
    oracle_objective: Fraction | None
    nodes: int
    millis: float | None
    milp_status: str = OPTIMAL


@dataclass
class ComparisonReport:
    instance_id: str
    rows: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def row(self, variant, cuts="none") -> ReportRow | None:
        return next((r for r in self.rows if r.variant == variant and r.cuts == cuts), None)


@dataclass
class CompareOptions:
    bounds: BoundOptions = field(default_factory=BoundOptions)
    timing: bool = False
    workers: int = 1
    milp: MilpConfig = field(default_factory=MilpConfig)


def _run_combo(args):
    inst, bounds, variant, cuts, milp_cfg = args
    t0 = time.perf_counter()
    model = add_cuts(build_model(inst, bounds, variant), inst, bounds, cuts)
    c, A, senses, b, lo, hi = lp_relaxation(model).dense_arrays()
    lp = solve_arrays(c, A, senses, b, lo, hi, milp_cfg.simplex)
    lp_bound = lp.objective + float(model.constant) if lp.status == OPTIMAL else None
    sol = solve_milp(model, milp_cfg)
    millis = (time.perf_counter() - t0) * 1000.0
    return lp_bound, sol.status, sol.objective, sol.nodes, millis


def workers_from_env(default: int = 1) -> int:
    raw = os.environ.get("QLIN_THREADS")
    if raw is None:
        return default
    k = int(raw)
    return os.cpu_count() or 1 if k == 0 else max(1, k)


def compare_relaxations(inst: ProblemInstance, options: CompareOptions | None = None, instance_id: str = "instance",
                        bounds: BoundSet | None = None) -> ComparisonReport:
    """LP bound, MILP optimum and oracle optimum for every valid (variant, cuts) pair.

    Violated expectations are recorded in ``flags``; nothing is raised for them.
    """
    opts = options or CompareOptions()
    bounds = bounds or compute_bound_set(inst, opts.bounds)
    oracle = enumerate_optimum(inst)
    combos = combinations(inst, bounds)
    jobs = [(inst, bounds, v, cu, opts.milp) for v, cu in combos]
    if opts.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=opts.workers) as pool:
            results = list(pool.map(_run_combo, jobs))
    else:
        results = [_run_combo(j) for j in jobs]

    report = ComparisonReport(instance_id)
    for (v, cu), (lp_bound, status, obj, nodes, millis) in zip(combos, results):
        report.rows.append(ReportRow(v.value, cu.label, lp_bound, obj, oracle.objective, nodes,
                                     millis if opts.timing else None, status))
    _flag_report(report, oracle)
    return report


def _flag_report(report: ComparisonReport, oracle: OracleResult):
    flags = report.flags
    for r in report.rows:
        key = f"{r.variant}/{r.cuts}"
        if r.milp_status != oracle.status:
            flags.append(f"{key}: milp status {r.milp_status} vs oracle {oracle.status}")
            continue
        if oracle.status != OPTIMAL:
            continue
        if abs(r.milp_objective - float(oracle.objective)) > TOL:
            flags.append(f"{key}: milp {r.milp_objective:.12g} != oracle {float(oracle.objective):.12g}")
        if r.lp_bound is None or r.lp_bound > r.milp_objective + TOL:
            flags.append(f"{key}: lp bound {r.lp_bound} exceeds milp optimum {r.milp_objective:.12g}")
    if oracle.status != OPTIMAL:
        return
    nbp, bpb = report.row("nbp-bar"), report.row("bp-bar")
    if nbp and bpb and nbp.lp_bound is not None and bpb.lp_bound is not None \
            and nbp.lp_bound < bpb.lp_bound - TOL:
        flags.append(f"tightness: lp(nbp-bar) {nbp.lp_bound:.12g} < lp(bp-bar) {bpb.lp_bound:.12g}")
    small = report.row("small")
    if small and bpb and small.milp_objective is not None and bpb.milp_objective is not None \
            and abs(small.milp_objective - bpb.milp_objective) > TOL:
        flags.append(f"redundancy: milp(small) {small.milp_objective:.12g} != milp(bp-bar) "
                     f"{bpb.milp_objective:.12g}")
    for r in report.rows:
        if r.cuts == "none":
            continue
        plain = report.row(r.variant, "none")
        if plain.lp_bound is not None and r.lp_bound is not None and r.lp_bound < plain.lp_bound - TOL:
            flags.append(f"{r.variant}/{r.cuts}: cuts lowered lp bound {plain.lp_bound:.12g} -> {r.lp_bound:.12g}")
        if abs(r.milp_objective - plain.milp_objective) > TOL:
            flags.append(f"{r.variant}/{r.cuts}: cuts changed milp optimum")


CSV_HEADER = "instance_id,variant,cuts,lp_bound,milp_obj,oracle_obj,nodes,millis"


def fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, Fraction) and v.denominator == 1:
        return str(v.numerator)
    f = float(v)
    if f == 0:
        f = 0.0  # no negative zero in reports
    return format(f, ".12g")


def report_csv(reports, header: bool = True) -> str:
    lines = [CSV_HEADER] if header else []
    for rep in reports:
        for r in rep.rows:
            milp = fmt(r.milp_objective) if r.milp_status == OPTIMAL else r.milp_status.lower()
            oracle = fmt(r.oracle_objective) if r.oracle_objective is not None else "infeasible"
            lines.append(",".join([rep.instance_id, r.variant, r.cuts, fmt(r.lp_bound), milp, oracle,
                                   str(r.nodes), fmt(r.millis)]))
    return "\n".join(lines) + "\n"


def dominance_flags(bs: BoundSet, tol: float = 1e-9) -> list[str]:
    """Conditional bounds must sit inside the unconditional ones; w_bar2 <= w_max."""
    flags = []
    fams = [("gamma", bs.gamma_min, bs.gamma_max, bs.gamma_bar1, bs.gamma_lo1, bs.gamma_bar2, bs.gamma_lo2),
            ("lambda", bs.lambda_min, bs.lambda_max, bs.lambda_bar1, bs.lambda_lo1, bs.lambda_bar2, bs.lambda_lo2),
            ("w", bs.w_min, bs.w_max, bs.w_bar1, bs.w_lo1, bs.w_bar2, bs.w_lo2)]
    for name, mn, mx, bar1, lo1, bar2, lo2 in fams:
        if mn is None or bar1 is None:
            continue
        for i in range(bs.n):
            if mn[i] > mx[i]:
                flags.append(f"{name}_min[{i + 1}] > {name}_max[{i + 1}]")
            for label, v in (("bar1", bar1[i]), ("bar2", bar2[i])):
                if v > mx[i] + tol:
                    flags.append(f"{name}_{label}[{i + 1}]={v} exceeds {name}_max={mx[i]}")
            for label, v in (("lo1", lo1[i]), ("lo2", lo2[i])):
                if v < mn[i] - tol:
                    flags.append(f"{name}_{label}[{i + 1}]={v} below {name}_min={mn[i]}")
    if bs.w_bar2 is not None:
        for i in range(bs.n):
            if bs.w_bar2[i] > bs.w_max[i] + tol:
                flags.append(f"w_bar2[{i + 1}] exceeds w_max")
    return flags


def containment_flags(inst: ProblemInstance, bs: BoundSet, points) -> list[str]:
    """Every bound must hold at every point of X under the conditioning it claims."""
    flags = []
    n = inst.n
    mats = [("gamma", inst.Q, bs.gamma_min, bs.gamma_max, bs.gamma_bar1, bs.gamma_lo1, bs.gamma_bar2, bs.gamma_lo2)]
    if inst.has_quad:
        W = [[g - q for g, q in zip(rg, rq)] for rg, rq in zip(inst.G, inst.Q)]
        mats.append(("lambda", inst.G, bs.lambda_min, bs.lambda_max, bs.lambda_bar1, bs.lambda_lo1,
                     bs.lambda_bar2, bs.lambda_lo2))
        mats.append(("w", W, bs.w_min, bs.w_max, bs.w_bar1, bs.w_lo1, bs.w_bar2, bs.w_lo2))
    for name, M, mn, mx, bar1, lo1, bar2, lo2 in mats:
        if mn is None:
            continue
        for x in points:
            ones = [j for j in range(n) if x[j]]
            for i in range(n):
                v = sum((M[i][j] for j in ones), Fraction(0))
                if not mn[i] <= v <= mx[i]:
                    flags.append(f"{name} row {i + 1} value {v} outside [min,max] at {tuple(x)}")
                if bar1 is None:
                    continue
                if x[i] and not lo1[i] <= v <= bar2[i]:
                    flags.append(f"{name} row {i + 1} outside [lo1,bar2] at {tuple(x)}")
                if not x[i] and not lo2[i] <= v <= bar1[i]:
                    flags.append(f"{name} row {i + 1} outside [lo2,bar1] at {tuple(x)}")
    return flags


def run_checks(inst: ProblemInstance, options: BoundOptions | None = None, config: MilpConfig | None = None,
               lift_points: int | None = None) -> list[str]:
    """Identities, bound dominance and containment, equivalences and lift validity; returns flags."""
    bs = compute_bound_set(inst, options or BoundOptions())
    flags = dominance_flags(bs)
    P, _, _ = feasible_points(inst)
    pts = [tuple(int(v) for v in r) for r in P]
    flags += containment_flags(inst, bs, pts)
    rep = identity_residuals(inst, bs, P)
    if not rep.ok:
        flags.append(f"identities: max residual {rep.max_residual}, sandwich ok={rep.sandwich_ok}")
    oracle = enumerate_optimum(inst)
    check_pts = pts if lift_points is None else pts[:lift_points]
    for v, cu in combinations(inst, bs):
        res = verify_equivalence(inst, bs, v, cu, oracle, config)
        flags += res.details
        model = add_cuts(build_model(inst, bs, v), inst, bs, cu)
        for x in check_pts:
            lift = canonical_lift(inst, bs, model, x)
            bad = model.violations(lift)
            if bad:
                flags.append(f"{v.value}/{cu.label}: lift of {x} violates {', '.join(bad[:3])}")
                break
            if model.objective_value(lift) != evaluate_point(inst, list(x))["objective"]:
                flags.append(f"{v.value}/{cu.label}: lift objective mismatch at {x}")
                break
    return flags
