"""Dense bounded-variable two-phase primal simplex.

Rows are turned into equalities with one bounded slack each
(``a'x + s = b`` with ``s >= 0`` for <=, ``s <= 0`` for >=, ``s = 0`` for =),
so box bounds never become rows. Phase 1 adds artificials only for rows whose
slack cannot absorb the initial residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from qlin.errors import NumericalError

LE, GE, EQ = "<=", ">=", "="
OPTIMAL, INFEASIBLE, UNBOUNDED = "Optimal", "Infeasible", "Unbounded"

INF = math.inf

_AT_LOWER, _AT_UPPER, _FREE_ZERO, _BASIC = 0, 1, 2, 3


@dataclass
class LpProblem:
    """min c'x  s.t.  rows, lower <= x <= upper.

    Entries may be floats or Fractions; the solver works in floating point and
    :func:`certify` re-checks the final basis in exact arithmetic.
    """

    objective: Sequence
    rows: list  # list of (coeffs, sense, rhs); coeffs dense, length num_vars
    lower: Sequence
    upper: Sequence

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def __post_init__(self):
        n = len(self.objective)
        if len(self.lower) != n or len(self.upper) != n:
            raise ValueError("bounds length disagrees with objective")
        for lo, hi in zip(self.lower, self.upper):
            if lo > hi:
                raise ValueError(f"lower bound {lo} exceeds upper bound {hi}")
        for coeffs, sense, _ in self.rows:
            if len(coeffs) != n:
                raise ValueError("row length disagrees with num_vars")
            if sense not in (LE, GE, EQ):
                raise ValueError(f"unknown sense {sense!r}")


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0
    # final basis over the slack-augmented columns, used by certify()
    basis: tuple[int, ...] = ()
    at_upper: frozenset = field(default_factory=frozenset)


@dataclass
class SimplexOptions:
    feas_tol: float = 1e-7
    opt_tol: float = 1e-9
    pivot_tol: float = 1e-10
    bland_after: int = 1000
    refactor_every: int = 64


_SLACK_BOUNDS = {LE: (0.0, INF), GE: (-INF, 0.0), EQ: (0.0, 0.0)}


def _standard_form(c, A, senses, b, lo, hi):
    m, n = A.shape
    A_full = np.hstack([A, np.eye(m)])
    slack = np.array([_SLACK_BOUNDS[s] for s in senses]).reshape(m, 2)
    lo_full = np.concatenate([lo, slack[:, 0]])
    hi_full = np.concatenate([hi, slack[:, 1]])
    c_full = np.concatenate([c, np.zeros(m)])
    return A_full, np.asarray(b, dtype=float), c_full, lo_full, hi_full


def problem_arrays(p: LpProblem):
    """Float (c, A, senses, b, lower, upper) for an :class:`LpProblem`."""
    n, m = p.num_vars, len(p.rows)
    A = np.array([[float(v) for v in row[0]] for row in p.rows], dtype=float).reshape(m, n)
    b = np.array([float(row[2]) for row in p.rows], dtype=float)
    c = np.array([float(v) for v in p.objective], dtype=float)
    lo = np.array([float(v) for v in p.lower], dtype=float)
    hi = np.array([float(v) for v in p.upper], dtype=float)
    return c, A, [row[1] for row in p.rows], b, lo, hi


class _Simplex:
    def __init__(self, A, b, lo, hi, opts: SimplexOptions, max_iter: int):
        self.A, self.b, self.lo, self.hi = A, b, lo, hi
        self.opts = opts
        self.max_iter = max_iter
        self.iterations = 0
        self.degenerate = 0
        self.m, self.N = A.shape

    def setup(self):
        A, b, lo, hi = self.A, self.b, self.lo, self.hi
        m, N = self.m, self.N
        n = N - m
        x = np.zeros(N)
        status = np.empty(N, dtype=int)
        for j in range(N):
            if np.isfinite(lo[j]):
                x[j], status[j] = lo[j], _AT_LOWER
            elif np.isfinite(hi[j]):
                x[j], status[j] = hi[j], _AT_UPPER
            else:
                x[j], status[j] = 0.0, _FREE_ZERO
        resid = b - A[:, :n] @ x[:n]
        basis = []
        art_cols = []
        for r in range(m):
            j = n + r
            if lo[j] - 1e-12 <= resid[r] <= hi[j] + 1e-12:
                x[j] = resid[r]
                status[j] = _BASIC
                basis.append(j)
            else:
                # slack parked at its nearest bound; an artificial carries the rest
                x[j] = min(max(resid[r], lo[j]), hi[j])
                status[j] = _AT_LOWER if x[j] == lo[j] else _AT_UPPER
                gap = resid[r] - x[j]
                col = np.zeros(m)
                col[r] = 1.0 if gap > 0 else -1.0
                art_cols.append(col)
                basis.append(N + len(art_cols) - 1)
        k = len(art_cols)
        if k:
            self.A = np.hstack([A, np.array(art_cols).T])
            self.lo = np.concatenate([lo, np.zeros(k)])
            self.hi = np.concatenate([hi, np.full(k, INF)])
            x = np.concatenate([x, np.zeros(k)])
            status = np.concatenate([status, np.full(k, _BASIC)])
        self.num_art = k
        self.x, self.status = x, status
        self.basis = np.array(basis, dtype=int)
        self.refactor()
        self.recompute_basics()

    def refactor(self):
        if self.m:
            self.Binv = np.linalg.inv(self.A[:, self.basis])
        else:
            self.Binv = np.zeros((0, 0))
        self.since_refactor = 0

    def recompute_basics(self):
        nb = self.status != _BASIC
        rhs = self.b - self.A[:, nb] @ self.x[nb]
        self.x[self.basis] = self.Binv @ rhs

    def drive_out_artificials(self, first_art: int):
        """Degenerate pivots replacing zero-valued basic artificials by structural columns."""
        for r in range(self.m):
            if self.basis[r] < first_art:
                continue
            row = self.Binv[r] @ self.A[:, :first_art]
            row[self.status[:first_art] == _BASIC] = 0.0
            cand = np.flatnonzero(np.abs(row) > 1e-9)
            if cand.size == 0:
                continue  # redundant row
            q = int(cand[np.argmax(np.abs(row[cand]))])
            alpha = self.Binv @ self.A[:, q]
            out = self.basis[r]
            self.status[out] = _AT_LOWER
            self.x[out] = 0.0
            self.status[q] = _BASIC
            self.basis[r] = q
            piv_row = self.Binv[r] / alpha[r]
            self.Binv -= np.outer(alpha, piv_row)
            self.Binv[r] = piv_row
        self.refactor()
        self.recompute_basics()

    def warm_setup(self, basis, at_upper) -> bool:
        """Install a previous basis; False when it cannot be used here."""
        m, N = self.m, self.N
        basis = np.asarray(basis, dtype=int)
        if basis.size != m or np.any(basis >= N):
            return False
        lo, hi = self.lo, self.hi
        status = np.full(N, _AT_LOWER, dtype=int)
        x = np.zeros(N)
        for j in range(N):
            if j in at_upper and np.isfinite(hi[j]):
                status[j], x[j] = _AT_UPPER, hi[j]
            elif np.isfinite(lo[j]):
                x[j] = lo[j]
            elif np.isfinite(hi[j]):
                status[j], x[j] = _AT_UPPER, hi[j]
            else:
                status[j] = _FREE_ZERO
        status[basis] = _BASIC
        self.num_art = 0
        self.x, self.status, self.basis = x, status, basis.copy()
        try:
            self.refactor()
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(self.Binv)):
            return False
        self.recompute_basics()
        return True

    def dual_run(self, c) -> str | None:
        """Bounded dual simplex from a dual feasible basis.

        Returns OPTIMAL, INFEASIBLE, or None when the start is not dual
        feasible or progress stalls (the caller then cold-starts).
        """
        A, opts = self.A, self.opts
        lo, hi = self.lo, self.hi
        movable = hi - lo > 0
        tol = 1e-9
        limit = self.iterations + self.max_iter
        while True:
            y = c[self.basis] @ self.Binv
            d = c - y @ A
            st = self.status
            bad = movable & (((st == _AT_LOWER) & (d < -tol)) | ((st == _AT_UPPER) & (d > tol))
                             | ((st == _FREE_ZERO) & (np.abs(d) > tol)))
            if np.any(bad):
                return None
            xb = self.x[self.basis]
            lob, hib = lo[self.basis], hi[self.basis]
            below = np.where(lob - xb > opts.feas_tol, lob - xb, 0.0)
            above = np.where(xb - hib > opts.feas_tol, xb - hib, 0.0)
            viol = np.maximum(below, above)
            if self.m == 0 or viol.max() <= 0.0:
                return OPTIMAL
            if self.iterations >= limit:
                return None
            r = int(np.argmax(viol))
            p = self.basis[r]
            rising = below[r] > 0
            alpha_r = self.Binv[r] @ A
            # a nonbasic j can push x_p toward its violated bound
            if rising:
                ok = ((st == _AT_LOWER) & (alpha_r < -opts.pivot_tol)) | ((st == _AT_UPPER) & (alpha_r > opts.pivot_tol))
            else:
                ok = ((st == _AT_LOWER) & (alpha_r > opts.pivot_tol)) | ((st == _AT_UPPER) & (alpha_r < -opts.pivot_tol))
            ok |= (st == _FREE_ZERO) & (np.abs(alpha_r) > opts.pivot_tol)
            ok &= movable
            cand = np.flatnonzero(ok)
            if cand.size == 0:
                return INFEASIBLE
            ratios = np.abs(d[cand]) / np.abs(alpha_r[cand])
            best = ratios.min()
            ties = cand[ratios <= best + 1e-12]
            q = int(ties[np.argmax(np.abs(alpha_r[ties]))])
            target = lo[p] if rising else hi[p]
            step = (xb[r] - target) / alpha_r[q]
            alpha = self.Binv @ A[:, q]
            self.x[self.basis] = xb - alpha * step
            self.x[q] += step
            self.x[p] = target
            st[p] = _AT_LOWER if rising else _AT_UPPER
            st[q] = _BASIC
            self.basis[r] = q
            piv_row = self.Binv[r] / alpha[r]
            self.Binv -= np.outer(alpha, piv_row)
            self.Binv[r] = piv_row
            self.iterations += 1
            self.since_refactor += 1
            if self.since_refactor >= opts.refactor_every:
                self.refactor()
                self.recompute_basics()

    def run(self, c) -> str:
        """Iterate to optimality for cost vector ``c``; returns OPTIMAL or UNBOUNDED."""
        A, opts = self.A, self.opts
        lo, hi = self.lo, self.hi
        movable = hi - lo > 0
        while True:
            if self.iterations >= self.max_iter:
                raise NumericalError(f"simplex iteration limit {self.max_iter} reached")
            y = c[self.basis] @ self.Binv if self.m else np.zeros(0)
            d = c - y @ A if self.m else c.copy()
            st = self.status
            can_up = ((st == _AT_LOWER) | (st == _FREE_ZERO)) & movable & (d < -opts.opt_tol)
            can_down = ((st == _AT_UPPER) | (st == _FREE_ZERO)) & movable & (d > opts.opt_tol)
            eligible = np.flatnonzero(can_up | can_down)
            if eligible.size == 0:
                return OPTIMAL
            bland = self.degenerate >= opts.bland_after
            if bland:
                q = int(eligible[0])
            else:
                q = int(eligible[np.argmax(np.abs(d[eligible]))])
            direction = 1.0 if can_up[q] else -1.0
            alpha = self.Binv @ A[:, q] if self.m else np.zeros(0)
            delta = -direction * alpha  # change of basics per unit step

            t_best = hi[q] - lo[q]
            leave = -1
            xb = self.x[self.basis]
            if self.m:
                lob, hib = lo[self.basis], hi[self.basis]
                ratios = np.full(self.m, INF)
                dec = (delta < -opts.pivot_tol) & np.isfinite(lob)
                inc = (delta > opts.pivot_tol) & np.isfinite(hib)
                ratios[dec] = np.maximum(xb[dec] - lob[dec], 0.0) / -delta[dec]
                ratios[inc] = np.maximum(hib[inc] - xb[inc], 0.0) / delta[inc]
                t_min = ratios.min()
                if t_min < t_best:
                    ties = np.flatnonzero(ratios <= t_min + 1e-12)
                    if bland:
                        leave = int(ties[np.argmin(self.basis[ties])])
                    else:
                        leave = int(ties[np.argmax(np.abs(delta[ties]))])
                    t_best = ratios[leave]
            if not np.isfinite(t_best):
                return UNBOUNDED
            self.iterations += 1
            self.degenerate = self.degenerate + 1 if t_best <= 1e-12 else self.degenerate
            step = direction * t_best
            if leave < 0:
                # bound flip, basis unchanged
                self.x[q] = hi[q] if direction > 0 else lo[q]
                st[q] = _AT_UPPER if direction > 0 else _AT_LOWER
                self.x[self.basis] = xb + delta * t_best
                continue
            self.x[self.basis] = xb + delta * t_best
            self.x[q] += step
            out = self.basis[leave]
            if delta[leave] < 0:
                self.x[out], st[out] = lo[out], _AT_LOWER
            else:
                self.x[out], st[out] = hi[out], _AT_UPPER
            st[q] = _BASIC
            self.basis[leave] = q
            piv = alpha[leave]
            row = self.Binv[leave] / piv
            self.Binv -= np.outer(alpha, row)
            self.Binv[leave] = row
            self.since_refactor += 1
            if self.since_refactor >= opts.refactor_every:
                self.refactor()
                self.recompute_basics()


def solve_lp(p: LpProblem, options: SimplexOptions | None = None) -> LpSolution:
    """Solve a bounded LP to optimality, infeasibility or unboundedness."""
    return solve_arrays(*problem_arrays(p), options=options)


def solve_arrays(c, A, senses, b, lo, hi, options: SimplexOptions | None = None,
                 warm: LpSolution | None = None) -> LpSolution:
    """Same as :func:`solve_lp` on float arrays: min c'x, A x (senses) b, lo <= x <= hi.

    ``warm`` is an optimal solution of the same rows under other bounds; its
    basis seeds a dual simplex, with a cold start as fallback.
    """
    opts = options or SimplexOptions()
    m, n = A.shape
    if np.any(lo > hi):
        return LpSolution(INFEASIBLE)
    A, b, c, lo, hi = _standard_form(c, A, senses, b, lo, hi)
    max_iter = 50 * (n + m)
    N = n + m
    if warm is not None and warm.status == OPTIMAL and warm.basis:
        sx = _Simplex(A, b, lo, hi, opts, max_iter)
        if sx.warm_setup(warm.basis, warm.at_upper):
            outcome = sx.dual_run(c)
            if outcome == INFEASIBLE:
                return LpSolution(INFEASIBLE, iterations=sx.iterations)
            if outcome == OPTIMAL:
                return _finish(sx, c, lo, hi, n)
    sx = _Simplex(A, b, lo, hi, opts, max_iter)
    sx.setup()
    if sx.num_art:
        c1 = np.zeros(N + sx.num_art)
        c1[N:] = 1.0
        sx.run(c1)
        sx.refactor()
        sx.recompute_basics()
        infeas = float(sx.x[N:].sum())
        scale = 1.0 + float(np.abs(b).max(initial=0.0))
        if infeas > opts.feas_tol * scale:
            return LpSolution(INFEASIBLE, iterations=sx.iterations)
        sx.hi[N:] = 0.0
        sx.x[N:][sx.status[N:] != _BASIC] = 0.0
        sx.drive_out_artificials(N)
        c2 = np.concatenate([c, np.zeros(sx.num_art)])
    else:
        c2 = c
    return _finish(sx, c2, lo, hi, n)


def _finish(sx: _Simplex, c2, lo, hi, n: int) -> LpSolution:
    c = c2
    status = sx.run(c2)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=sx.iterations)
    sx.refactor()
    sx.recompute_basics()
    x = sx.x[:n].copy()
    # snap values that sit on a bound up to round-off
    lo_n, hi_n = lo[:n], hi[:n]
    near_lo = np.isfinite(lo_n) & (np.abs(x - lo_n) <= 1e-11)
    near_hi = np.isfinite(hi_n) & (np.abs(x - hi_n) <= 1e-11)
    x[near_lo] = lo_n[near_lo]
    x[near_hi] = hi_n[near_hi]
    obj = float(c[:n] @ x)
    return LpSolution(OPTIMAL, x=x, objective=obj, iterations=sx.iterations,
                      basis=tuple(int(j) for j in sx.basis),
                      at_upper=frozenset(int(j) for j in np.flatnonzero(sx.status == _AT_UPPER)))


def _fraction_solve(M: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Gauss-Jordan with exact arithmetic; None when singular."""
    k = len(M)
    aug = [list(row) + [v] for row, v in zip(M, rhs)]
    for col in range(k):
        piv = next((r for r in range(col, k) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        pr = aug[col]
        inv = 1 / pr[col]
        for r in range(k):
            if r != col and aug[r][col] != 0:
                f = aug[r][col] * inv
                row = aug[r]
                for j in range(col, k + 1):
                    if pr[j]:
                        row[j] -= f * pr[j]
    return [aug[r][k] / aug[r][r] for r in range(k)]


def certify(p: LpProblem, sol: LpSolution) -> Fraction | None:
    """Exact optimal objective of ``p`` at the basis found by :func:`solve_lp`.

    Returns None when the basis is not exactly primal and dual feasible.
    """
    if sol.status != OPTIMAL:
        return None
    n, m = p.num_vars, len(p.rows)
    if any(j >= n + m for j in sol.basis):
        return None
    F = Fraction
    cols: list[list[Fraction]] = []
    lo: list = []
    hi: list = []
    for j in range(n):
        cols.append([F(row[0][j]) for row in p.rows])
        lo.append(None if p.lower[j] == -INF else F(p.lower[j]))
        hi.append(None if p.upper[j] == INF else F(p.upper[j]))
    for r, (_, sense, _) in enumerate(p.rows):
        cols.append([F(1) if k == r else F(0) for k in range(m)])
        lo.append({LE: F(0), GE: None, EQ: F(0)}[sense])
        hi.append({LE: None, GE: F(0), EQ: F(0)}[sense])
    cost = [F(v) for v in p.objective] + [F(0)] * m
    basis = list(sol.basis)
    in_basis = set(basis)
    xv = [F(0)] * (n + m)
    for j in range(n + m):
        if j in in_basis:
            continue
        if j in sol.at_upper:
            if hi[j] is None:
                return None
            xv[j] = hi[j]
        elif lo[j] is not None:
            xv[j] = lo[j]
        elif hi[j] is not None:
            xv[j] = hi[j]
    rhs = [F(row[2]) for row in p.rows]
    for j in range(n + m):
        if j not in in_basis and xv[j]:
            for r in range(m):
                if cols[j][r]:
                    rhs[r] -= cols[j][r] * xv[j]
    B = [[cols[j][r] for j in basis] for r in range(m)]
    xb = _fraction_solve(B, rhs) if m else []
    if xb is None:
        return None
    for j, v in zip(basis, xb):
        if (lo[j] is not None and v < lo[j]) or (hi[j] is not None and v > hi[j]):
            return None
        xv[j] = v
    Bt = [[cols[basis[k]][r] for r in range(m)] for k in range(m)]
    y = _fraction_solve(Bt, [cost[j] for j in basis]) if m else []
    if y is None:
        return None
    for j in range(n + m):
        if j in in_basis:
            continue
        d = cost[j] - sum((cols[j][r] * y[r] for r in range(m) if cols[j][r]), F(0))
        fixed = lo[j] is not None and hi[j] is not None and lo[j] == hi[j]
        if fixed or d == 0:
            continue
        at_lo = lo[j] is not None and xv[j] == lo[j]
        at_hi = hi[j] is not None and xv[j] == hi[j]
        if (d < 0 and not at_hi) or (d > 0 and not at_lo):
            return None
    return sum((cost[j] * xv[j] for j in range(n) if xv[j]), F(0))
