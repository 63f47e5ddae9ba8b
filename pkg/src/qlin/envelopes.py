"""Piecewise-linear representations of the bilinear terms x_i * (M_i x).

For a row M_i with bounds lo <= M_i x <= hi the lower (convex) piece is
``max(lo*x_i, M_i x + hi*x_i - hi)`` and the upper (concave) piece is
``min(hi*x_i, M_i x + lo*x_i - lo)``. At binary points both equal
x_i * M_i x, provided the bounds are valid for the conditioning they claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from qlin.bounds import BoundSet
from qlin.errors import InfeasiblePoint
from qlin.instance import ProblemInstance, evaluate_point

LOWER, UPPER = "lower", "upper"


@dataclass(frozen=True)
class EnvelopeParams:
    row: tuple
    lo: Fraction
    hi: Fraction
    i: int


def envelope_value(p: EnvelopeParams, kind: str, x: Sequence):
    """Value of the lower (max of two affine pieces) or upper (min) envelope at ``x``."""
    rx = sum((a * v for a, v in zip(p.row, x)), 0)
    xi = x[p.i]
    if kind == LOWER:
        return max(p.lo * xi, rx + p.hi * xi - p.hi)
    if kind == UPPER:
        return min(p.hi * xi, rx + p.lo * xi - p.lo)
    raise ValueError(f"unknown envelope kind {kind!r}")


def _lcm_denominator(values) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, Fraction(v).denominator)
    return d


def _as_ints(values, D: int) -> np.ndarray:
    ints = [int(Fraction(v) * D) for v in values]
    big = max((abs(v) for v in ints), default=0)
    return np.array(ints, dtype=np.int64 if big < 2 ** 40 else object)


@dataclass
class IdentityReport:
    max_residual: Fraction
    sandwich_ok: bool
    # (matrix name, parameter pair) -> per-row max residual
    per_row: dict = field(default_factory=dict)
    checked_points: int = 0

    @property
    def ok(self) -> bool:
        return self.max_residual == 0 and self.sandwich_ok


def identity_pairs(inst: ProblemInstance, bounds: BoundSet):
    """Yield (name, matrix rows, lower-pair, upper-pair) for each identity to check.

    A pair is (lo, hi) vectors; unconditional families use (min, max) for both
    envelopes, conditional families use (lo1, bar1) below and (lo2, bar2) above.
    """
    Q = [list(r) for r in inst.Q]
    fams = [("Q", Q, bounds.gamma_min, bounds.gamma_max, bounds.gamma_lo1, bounds.gamma_bar1,
             bounds.gamma_lo2, bounds.gamma_bar2)]
    if inst.has_quad:
        G = [list(r) for r in inst.G]
        W = [[g - q for g, q in zip(rg, rq)] for rg, rq in zip(G, Q)]
        fams.append(("G", G, bounds.lambda_min, bounds.lambda_max, bounds.lambda_lo1, bounds.lambda_bar1,
                     bounds.lambda_lo2, bounds.lambda_bar2))
        fams.append(("G-Q", W, bounds.w_min, bounds.w_max, bounds.w_lo1, bounds.w_bar1,
                     bounds.w_lo2, bounds.w_bar2))
        if bounds.theta is not None and bounds.w_theta_lo1 is not None:
            t = bounds.theta
            T = [[t * g - q for g, q in zip(rg, rq)] for rg, rq in zip(G, Q)]
            fams.append(("thetaG-Q", T, None, None, bounds.w_theta_lo1, bounds.w_theta_bar1,
                         bounds.w_theta_lo2, bounds.w_theta_bar2))
    for name, M, mn, mx, lo1, bar1, lo2, bar2 in fams:
        if mn is not None and mx is not None:
            yield name, "unconditional", M, (mn, mx), (mn, mx)
        if lo1 is not None:
            yield name, "conditional", M, (lo1, bar1), (lo2, bar2)


def identity_residuals(inst: ProblemInstance, bounds: BoundSet, points) -> IdentityReport:
    """Exact residuals of the envelope identities over a batch of binary points.

    Points are not checked for membership in X; see :func:`check_identities`.
    """
    P = np.asarray(points, dtype=np.int64).reshape(-1, inst.n)
    report = IdentityReport(Fraction(0), True, checked_points=len(P))
    for name, kind, M, (l_lo, l_hi), (u_lo, u_hi) in identity_pairs(inst, bounds):
        flat = [v for r in M for v in r] + list(l_lo) + list(l_hi) + list(u_lo) + list(u_hi)
        D = _lcm_denominator(flat)
        Mi = _as_ints([v for r in M for v in r], D).reshape(inst.n, inst.n)
        a, b, c, d = (_as_ints(v, D) for v in (l_lo, l_hi, u_lo, u_hi))
        if P.size == 0:
            continue
        Pm = P.astype(Mi.dtype)
        Mx = Pm @ Mi.T
        prod = Pm * Mx
        lower = np.maximum(a * Pm, Mx + b * Pm - b)
        upper = np.minimum(d * Pm, Mx + c * Pm - c)
        res = np.maximum(np.abs(lower - prod), np.abs(upper - prod))
        per_row = res.max(axis=0)
        report.per_row[(name, kind)] = [Fraction(int(v), D) for v in per_row]
        worst = Fraction(int(per_row.max()), D)
        report.max_residual = max(report.max_residual, worst)
        if np.any(lower > prod) or np.any(prod > upper):
            report.sandwich_ok = False
    return report


def check_identities(inst: ProblemInstance, bounds: BoundSet, x: Sequence[int]) -> IdentityReport:
    """Check the lower/upper envelope identities for Q, G and G-Q at one point of X."""
    if not evaluate_point(inst, list(x))["feasible"]:
        raise InfeasiblePoint(f"{tuple(x)} is not in X")
    return identity_residuals(inst, bounds, [list(x)])
