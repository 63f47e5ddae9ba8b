"""Mixed-integer linear models equivalent to a zero-one quadratic program.

Five linearizations are built from an instance plus a :class:`BoundSet`:

``bp``          products x_i*(Q_i x) and x_i*(G_i x) as free variables s', z',
                with gamma = Qx and lambda = Gx explicit, all four bound inequalities
``bp-compact``  the same after shifting s = s' - gamma_min*x, z = z' - lambda_min*x
``bp-bar``      the relaxed compact form (upper bounds on s and lambda - z dropped)
``small``       bp-bar without the sign constraints on y and z
``nbp-bar``     bp-bar rebuilt on the conditional bounds, shift s = s' - gamma_lo1*x,
                z = z' - lambda_lo1*x

Row coefficients are exact Fractions; variable bounds are kept as bounds.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from qlin.bounds import BoundSet
from qlin.errors import IncompatibleVariant, MissingBounds
from qlin.instance import EQ, GE, LE, ProblemInstance, row_products
from qlin.simplex import LpProblem

INF = math.inf
ZERO, ONE = Fraction(0), Fraction(1)


class Variant(str, Enum):
    BP = "bp"
    BP_COMPACT = "bp-compact"
    BP_BAR = "bp-bar"
    SMALL = "small"
    NBP_BAR = "nbp-bar"


VARIANTS = tuple(Variant)


@dataclass(frozen=True)
class Cuts:
    kind: str = "none"  # none | base | cond | theta
    theta: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("none", "base", "cond", "theta"):
            raise ValueError(f"unknown cut family {self.kind!r}")
        if self.theta is not None and self.theta <= 0:
            raise ValueError("theta must be positive")

    @property
    def label(self) -> str:
        return self.kind


NO_CUTS = Cuts("none")
BASE = Cuts("base")
COND = Cuts("cond")


def theta_cuts(theta=None) -> Cuts:
    return Cuts("theta", None if theta is None else Fraction(theta))


@dataclass
class Variable:
    name: str
    role: str
    lower: object = ZERO
    upper: object = INF
    binary: bool = False


@dataclass
class Row:
    name: str
    coeffs: dict  # variable index -> Fraction
    sense: str
    rhs: Fraction
    provenance: str


@dataclass
class LinearModel:
    variables: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)
    constant: Fraction = ZERO
    variant: str | None = None
    cuts: tuple = ()
    n: int = 0  # number of original binaries

    def add_var(self, name, role, lower=ZERO, upper=INF, binary=False) -> int:
        self.variables.append(Variable(name, role, lower, upper, binary))
        return len(self.variables) - 1

    def add_row(self, name, coeffs, sense, rhs, provenance) -> Row:
        if not provenance:
            raise ValueError("every row needs a provenance tag")
        clean = {j: Fraction(v) for j, v in coeffs.items() if v != 0}
        row = Row(name, clean, sense, Fraction(rhs), provenance)
        self.rows.append(row)
        return row

    def indices(self, role: str) -> list[int]:
        return [j for j, v in enumerate(self.variables) if v.role == role]

    @property
    def x_indices(self) -> list[int]:
        return self.indices("x")

    @property
    def num_binary(self) -> int:
        return sum(v.binary for v in self.variables)

    def to_lp(self) -> LpProblem:
        nv = len(self.variables)
        obj = [self.objective.get(j, ZERO) for j in range(nv)]
        rows = []
        for r in self.rows:
            dense = [ZERO] * nv
            for j, a in r.coeffs.items():
                dense[j] = a
            rows.append((dense, r.sense, r.rhs))
        return LpProblem(obj, rows, [v.lower for v in self.variables], [v.upper for v in self.variables])

    def dense_arrays(self):
        """Float (c, A, senses, b, lower, upper) for the solvers."""
        nv, m = len(self.variables), len(self.rows)
        c = np.zeros(nv)
        for j, a in self.objective.items():
            c[j] = float(a)
        A = np.zeros((m, nv))
        b = np.zeros(m)
        for k, r in enumerate(self.rows):
            for j, a in r.coeffs.items():
                A[k, j] = float(a)
            b[k] = float(r.rhs)
        lo = np.array([float(v.lower) for v in self.variables])
        hi = np.array([float(v.upper) for v in self.variables])
        return c, A, [r.sense for r in self.rows], b, lo, hi

    def objective_value(self, values: Sequence) -> Fraction:
        return self.constant + sum((a * values[j] for j, a in self.objective.items()), ZERO)

    def violations(self, values: Sequence, tol=0) -> list[str]:
        """Names of rows and variables violated by ``values`` (exact when tol == 0)."""
        bad = []
        for j, v in enumerate(self.variables):
            val = values[j]
            if val < v.lower - tol or val > v.upper + tol:
                bad.append(f"bound:{v.name}")
            elif v.binary and val not in (0, 1) and tol == 0:
                bad.append(f"integrality:{v.name}")
        for r in self.rows:
            lhs = sum((a * values[j] for j, a in r.coeffs.items()), ZERO)
            if (r.sense == LE and lhs > r.rhs + tol) or (r.sense == GE and lhs < r.rhs - tol) or \
                    (r.sense == EQ and abs(lhs - r.rhs) > tol):
                bad.append(r.name)
        return bad

    def signature(self) -> tuple:
        """Float-valued structural fingerprint (names excluded) for round-trip comparisons."""
        def f(v):
            return float(v)
        vars_ = tuple((v.role, f(v.lower), f(v.upper), v.binary) for v in self.variables)
        rows = tuple((tuple(sorted((j, f(a)) for j, a in r.coeffs.items())), r.sense, f(r.rhs), r.provenance)
                     for r in self.rows)
        obj = tuple(sorted((j, f(a)) for j, a in self.objective.items() if a != 0))
        return vars_, rows, obj, f(self.constant)


def _need(bounds: BoundSet, *names):
    missing = [nm for nm in names if getattr(bounds, nm) is None]
    if missing:
        raise MissingBounds(f"bound set lacks {', '.join(missing)}")


def _add(coeffs: dict, j: int, a):
    coeffs[j] = coeffs.get(j, ZERO) + a


def _row_coeffs(xs, row, extra=()) -> dict:
    coeffs = {}
    for k, a in enumerate(row):
        if a:
            _add(coeffs, xs[k], Fraction(a))
    for j, a in extra:
        _add(coeffs, j, Fraction(a))
    return coeffs


def _x_vars(model: LinearModel, inst: ProblemInstance, bounds: BoundSet) -> list[int]:
    fixed = dict(inst.fixed)
    fixed.update(bounds.forced)
    xs = []
    for i in range(inst.n):
        lo, hi = (Fraction(fixed[i]), Fraction(fixed[i])) if i in fixed else (ZERO, ONE)
        xs.append(model.add_var(f"x{i + 1}", "x", lo, hi, binary=True))
    return xs


def _side_rows(model: LinearModel, inst: ProblemInstance, xs):
    for k, con in enumerate(inst.side_constraints):
        model.add_row(f"side{k + 1}", _row_coeffs(xs, con.coeffs), con.sense, con.rhs, "side-constraint")


def _build_bp(model, inst, bounds, xs):
    n = inst.n
    gmin, gmax = bounds.gamma_min, bounds.gamma_max
    gam = [model.add_var(f"g{i + 1}", "gamma", -INF, INF) for i in range(n)]
    sp = [model.add_var(f"sp{i + 1}", "s_prime", -INF, INF) for i in range(n)]
    quad = inst.quad_constraint
    if quad is not None:
        _need(bounds, "lambda_min", "lambda_max")
        lam = [model.add_var(f"l{i + 1}", "lambda", -INF, INF) for i in range(n)]
        zp = [model.add_var(f"zp{i + 1}", "z_prime", -INF, INF) for i in range(n)]
    for i in range(n):
        _add(model.objective, xs[i], inst.c[i])
        _add(model.objective, sp[i], ONE)
    for i in range(n):
        model.add_row(f"gdef{i + 1}", _row_coeffs(xs, inst.Q[i], [(gam[i], -1)]), EQ, 0, "bp:gamma=Qx")
    if quad is not None:
        model.add_row("quad", _row_coeffs(xs, quad.h, [(z, 1) for z in zp]), GE, quad.g, "bp:quad-constraint")
        for i in range(n):
            model.add_row(f"ldef{i + 1}", _row_coeffs(xs, quad.G[i], [(lam[i], -1)]), EQ, 0, "bp:lambda=Gx")
    for i in range(n):
        model.add_row(f"spl{i + 1}", {sp[i]: 1, xs[i]: -gmin[i]}, GE, 0, "bp:s'>=gamma_min*x")
        model.add_row(f"spu{i + 1}", {sp[i]: 1, xs[i]: -gmax[i]}, LE, 0, "bp:s'<=gamma_max*x")
    for i in range(n):
        model.add_row(f"sql{i + 1}", {gam[i]: 1, sp[i]: -1, xs[i]: gmin[i]}, GE, gmin[i],
                      "bp:gamma-s'>=gamma_min*(1-x)")
        model.add_row(f"squ{i + 1}", {gam[i]: 1, sp[i]: -1, xs[i]: gmax[i]}, LE, gmax[i],
                      "bp:gamma-s'<=gamma_max*(1-x)")
    if quad is not None:
        lmin, lmax = bounds.lambda_min, bounds.lambda_max
        for i in range(n):
            model.add_row(f"zpl{i + 1}", {zp[i]: 1, xs[i]: -lmin[i]}, GE, 0, "bp:z'>=lambda_min*x")
            model.add_row(f"zpu{i + 1}", {zp[i]: 1, xs[i]: -lmax[i]}, LE, 0, "bp:z'<=lambda_max*x")
        for i in range(n):
            model.add_row(f"zql{i + 1}", {lam[i]: 1, zp[i]: -1, xs[i]: lmin[i]}, GE, lmin[i],
                          "bp:lambda-z'>=lambda_min*(1-x)")
            model.add_row(f"zqu{i + 1}", {lam[i]: 1, zp[i]: -1, xs[i]: lmax[i]}, LE, lmax[i],
                          "bp:lambda-z'<=lambda_max*(1-x)")


def _build_shifted(model, inst, bounds, xs, variant):
    """bp-compact, bp-bar, small and nbp-bar share one skeleton.

    Objective side: Q_i x + (a_i - b_i) x_i - y_i - s_i = a_i  with
    y_i <= (top_i - a_i)(1 - x_i), where b_i is the shift of s, a_i the floor of
    Q_i x when x_i = 0 and top_i its ceiling there.
    Constraint side: G_i x + (c_i - d_i) x_i - z_i >= c_i with z_i <= (e_i - d_i) x_i.
    """
    n = inst.n
    tag = variant.value
    if variant is Variant.NBP_BAR:
        _need(bounds, "gamma_lo1", "gamma_bar1", "gamma_lo2")
        shift, floor, top = bounds.gamma_lo1, bounds.gamma_lo2, bounds.gamma_bar1
    else:
        shift, floor, top = bounds.gamma_min, bounds.gamma_min, bounds.gamma_max
    y_lower = -INF if variant is Variant.SMALL else ZERO
    s = [model.add_var(f"s{i + 1}", "s", ZERO, INF) for i in range(n)]
    y = [model.add_var(f"y{i + 1}", "y", y_lower, INF) for i in range(n)]
    quad = inst.quad_constraint
    if quad is not None:
        if variant is Variant.NBP_BAR:
            _need(bounds, "lambda_lo1", "lambda_lo2", "lambda_bar2")
            zshift, zfloor, zcap = bounds.lambda_lo1, bounds.lambda_lo2, bounds.lambda_bar2
        else:
            _need(bounds, "lambda_min", "lambda_max")
            zshift, zfloor, zcap = bounds.lambda_min, bounds.lambda_min, bounds.lambda_max
        z = [model.add_var(f"z{i + 1}", "z", y_lower, INF) for i in range(n)]
        if variant is Variant.BP_COMPACT:
            lam = [model.add_var(f"l{i + 1}", "lambda", -INF, INF) for i in range(n)]

    for i in range(n):
        _add(model.objective, xs[i], inst.c[i] + shift[i])
        _add(model.objective, s[i], ONE)
    for i in range(n):
        model.add_row(f"qdef{i + 1}", _row_coeffs(xs, inst.Q[i], [(xs[i], floor[i] - shift[i]),
                                                                 (y[i], -1), (s[i], -1)]),
                      EQ, floor[i], f"{tag}:Qx=y+s+shifts")
    if variant is Variant.BP_COMPACT:
        for i in range(n):
            model.add_row(f"sub{i + 1}", {s[i]: 1, xs[i]: -(bounds.gamma_max[i] - shift[i])}, LE, 0,
                          f"{tag}:s<=(gamma_max-gamma_min)*x")
    for i in range(n):
        cap = top[i] - floor[i]
        model.add_row(f"yub{i + 1}", {y[i]: 1, xs[i]: cap}, LE, cap, f"{tag}:y<=(top-floor)*(1-x)")
    if quad is None:
        return
    model.add_row("quad", _row_coeffs(xs, quad.h, [(zj, 1) for zj in z] + [(xs[i], zshift[i]) for i in range(n)]),
                  GE, quad.g, f"{tag}:quad-constraint")
    if variant is Variant.BP_COMPACT:
        lmin, lmax = bounds.lambda_min, bounds.lambda_max
        for i in range(n):
            model.add_row(f"ldef{i + 1}", _row_coeffs(xs, quad.G[i], [(lam[i], -1)]), EQ, 0,
                          f"{tag}:lambda=Gx")
        for i in range(n):
            model.add_row(f"zub{i + 1}", {z[i]: 1, xs[i]: -(lmax[i] - lmin[i])}, LE, 0,
                          f"{tag}:z<=(lambda_max-lambda_min)*x")
        for i in range(n):
            model.add_row(f"lzl{i + 1}", {lam[i]: 1, z[i]: -1}, GE, lmin[i], f"{tag}:lambda-z>=lambda_min")
            model.add_row(f"lzu{i + 1}", {lam[i]: 1, z[i]: -1, xs[i]: lmax[i] - lmin[i]}, LE, lmax[i],
                          f"{tag}:lambda-z<=lambda_max-(lambda_max-lambda_min)*x")
        return
    for i in range(n):
        model.add_row(f"zgx{i + 1}", _row_coeffs(xs, quad.G[i], [(xs[i], zfloor[i] - zshift[i]), (z[i], -1)]),
                      GE, zfloor[i], f"{tag}:Gx>=z+shifts")
    for i in range(n):
        model.add_row(f"zub{i + 1}", {z[i]: 1, xs[i]: -(zcap[i] - zshift[i])}, LE, 0, f"{tag}:z<=(cap-shift)*x")


def build_model(inst: ProblemInstance, bounds: BoundSet, variant) -> LinearModel:
    variant = Variant(variant)
    model = LinearModel(variant=variant.value, n=inst.n)
    xs = _x_vars(model, inst, bounds)
    if variant is Variant.BP:
        _build_bp(model, inst, bounds, xs)
    else:
        _build_shifted(model, inst, bounds, xs, variant)
    _side_rows(model, inst, xs)
    return model


_BASE_VARIANTS = (Variant.BP_COMPACT.value, Variant.BP_BAR.value, Variant.SMALL.value)


def cut_compatible(variant, cuts: Cuts, inst: ProblemInstance) -> bool:
    variant = Variant(variant).value
    if cuts.kind == "none":
        return True
    if not inst.has_quad:
        return False
    if cuts.kind == "base":
        return variant in _BASE_VARIANTS
    return variant == Variant.NBP_BAR.value


def add_cuts(model: LinearModel, inst: ProblemInstance, bounds: BoundSet, cuts: Cuts) -> LinearModel:
    """Append one family of valid inequalities on the product x_i*((M)_i x), M built from G and Q."""
    if cuts.kind == "none":
        return model
    if not cut_compatible(model.variant, cuts, inst):
        raise IncompatibleVariant(f"{cuts.kind} cuts do not apply to {model.variant}"
                                  + ("" if inst.has_quad else " without a quadratic constraint"))
    out = copy.deepcopy(model)
    n = inst.n
    xs, s, z = out.x_indices, out.indices("s"), out.indices("z")
    if cuts.kind == "base":
        _need(bounds, "w_max", "lambda_min")
        for i in range(n):
            coef = bounds.lambda_min[i] - bounds.gamma_min[i] - bounds.w_max[i]
            out.add_row(f"cb{i + 1}", {xs[i]: coef, s[i]: -1, z[i]: 1}, LE, 0, "cut:base")
        out.cuts = out.cuts + ("base",)
        return out

    if cuts.kind == "cond":
        _need(bounds, "w_bar1", "w_lo1", "w_bar2", "w_lo2", "lambda_lo1", "gamma_lo1")
        theta = ONE
        M = [[g - q for g, q in zip(rg, rq)] for rg, rq in zip(inst.G, inst.Q)]
        bar1, lo1, bar2, lo2 = bounds.w_bar1, bounds.w_lo1, bounds.w_bar2, bounds.w_lo2
        prefix, tag = "cc", "cut:cond"
    else:
        theta = bounds.theta if cuts.theta is None else cuts.theta
        if bounds.theta is None or theta != bounds.theta or bounds.w_theta_bar1 is None:
            raise MissingBounds(f"bound set has no theta bounds for theta={theta}")
        M = [[theta * g - q for g, q in zip(rg, rq)] for rg, rq in zip(inst.G, inst.Q)]
        bar1, lo1 = bounds.w_theta_bar1, bounds.w_theta_lo1
        bar2, lo2 = bounds.w_theta_bar2, bounds.w_theta_lo2
        prefix, tag = "ct", f"cut:theta={theta}"

    # x_i * (M_i x) = theta*z_i - s_i + (theta*lambda_lo1_i - gamma_lo1_i) x_i, sandwiched by its envelopes
    for i in range(n):
        base = theta * bounds.lambda_lo1[i] - bounds.gamma_lo1[i]
        out.add_row(f"{prefix}a{i + 1}", {xs[i]: base - bar2[i], s[i]: -1, z[i]: theta}, LE, 0, tag)
        row = _row_coeffs(xs, [-a for a in M[i]], [(xs[i], base - lo2[i]), (s[i], -1), (z[i], theta)])
        out.add_row(f"{prefix}b{i + 1}", row, LE, -lo2[i], tag)
        out.add_row(f"{prefix}c{i + 1}", {xs[i]: base - lo1[i], s[i]: -1, z[i]: theta}, GE, 0, tag)
        row = _row_coeffs(xs, [-a for a in M[i]], [(xs[i], base - bar1[i]), (s[i], -1), (z[i], theta)])
        out.add_row(f"{prefix}d{i + 1}", row, GE, -bar1[i], tag)
    out.cuts = out.cuts + (cuts.kind,)
    return out


def lp_relaxation(model: LinearModel) -> LinearModel:
    out = copy.deepcopy(model)
    for v in out.variables:
        v.binary = False
    return out


def canonical_lift(inst: ProblemInstance, bounds: BoundSet, model: LinearModel, x: Sequence[int]) -> list:
    """Values of every model variable witnessing the binary point ``x`` (exact)."""
    x = [int(v) for v in x]
    n = inst.n
    variant = Variant(model.variant)
    vals = [ZERO] * len(model.variables)
    Qx = [sum((inst.Q[i][j] for j in range(n) if x[j]), ZERO) for i in range(n)]
    sp = row_products(inst.Q, x)
    if inst.has_quad:
        Gx = [sum((inst.G[i][j] for j in range(n) if x[j]), ZERO) for i in range(n)]
        zp = row_products(inst.G, x)
    if variant is Variant.NBP_BAR:
        shift, floor = bounds.gamma_lo1, bounds.gamma_lo2
        zshift = bounds.lambda_lo1
    else:
        shift, floor = bounds.gamma_min, bounds.gamma_min
        zshift = bounds.lambda_min
    per_role = {}
    for i in range(n):
        per_role.setdefault("x", []).append(Fraction(x[i]))
        if variant is Variant.BP:
            per_role.setdefault("gamma", []).append(Qx[i])
            per_role.setdefault("s_prime", []).append(sp[i])
            if inst.has_quad:
                per_role.setdefault("lambda", []).append(Gx[i])
                per_role.setdefault("z_prime", []).append(zp[i])
            continue
        si = sp[i] - shift[i] * x[i]
        per_role.setdefault("s", []).append(si)
        per_role.setdefault("y", []).append(Qx[i] + (floor[i] - shift[i]) * x[i] - si - floor[i])
        if inst.has_quad:
            per_role.setdefault("z", []).append(zp[i] - zshift[i] * x[i])
            per_role.setdefault("lambda", []).append(Gx[i])
    for role, values in per_role.items():
        for j, v in zip(model.indices(role), values):
            vals[j] = v
    return vals
