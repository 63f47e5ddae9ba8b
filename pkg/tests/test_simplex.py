from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qlin.errors import NumericalError
from qlin.simplex import (INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem, SimplexOptions, certify, solve_arrays,
                          solve_lp)
from vertex_oracle import random_lp, vertex_optimum

INF = float("inf")


def test_simple_optimum():
    p = LpProblem([-1, -1], [([1, 1], "<=", 1)], [0, 0], [1, 1])
    sol = solve_lp(p)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-1)
    assert certify(p, sol) == -1


def test_infeasible():
    sol = solve_lp(LpProblem([0], [([1], ">=", 2)], [0], [1]))
    assert sol.status == INFEASIBLE
    assert sol.x is None and sol.objective is None


def test_unbounded():
    sol = solve_lp(LpProblem([-1], [([1], ">=", 0)], [0], [INF]))
    assert sol.status == UNBOUNDED


def test_free_variable_and_equalities():
    # min x + y  s.t.  x - y = 1, x + y >= -3, x, y free
    p = LpProblem([1, 1], [([1, -1], "=", 1), ([1, 1], ">=", -3)], [-INF, -INF], [INF, INF])
    sol = solve_lp(p)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-3)
    assert sol.x[0] - sol.x[1] == pytest.approx(1)


def test_no_rows():
    sol = solve_lp(LpProblem([1, -2], [], [0, -1], [3, 4]))
    assert sol.objective == pytest.approx(-8)


def test_bad_problem_rejected():
    with pytest.raises(ValueError):
        LpProblem([1], [([1, 2], "<=", 1)], [0], [1])
    with pytest.raises(ValueError):
        LpProblem([1], [], [2], [1])
    with pytest.raises(ValueError):
        LpProblem([1], [([1], "<", 1)], [0], [1])


def test_iteration_limit_raises(monkeypatch):
    import qlin.simplex as sx
    orig = sx._Simplex.__init__

    def no_budget(self, A, b, lo, hi, opts, max_iter):
        orig(self, A, b, lo, hi, opts, 0)

    monkeypatch.setattr(sx._Simplex, "__init__", no_budget)
    c, A = np.array([-1.0, -1, -1]), np.array([[1.0, 1, 1], [1, -1, 0]])
    with pytest.raises(NumericalError):
        solve_arrays(c, A, ["<=", "<="], np.array([2.0, 0.5]), np.zeros(3), np.ones(3))


def test_matches_vertex_enumeration_500():
    rng = np.random.default_rng(2024)
    worst = 0.0
    statuses = {OPTIMAL: 0, INFEASIBLE: 0}
    for _ in range(500):
        c, A, senses, b = random_lp(rng)
        n = A.shape[1]
        sol = solve_arrays(c, A, senses, b, np.zeros(n), np.ones(n))
        ref = vertex_optimum(c, A, senses, b)
        if ref is None:
            assert sol.status == INFEASIBLE
        else:
            assert sol.status == OPTIMAL
            worst = max(worst, abs(sol.objective - ref))
        statuses[sol.status] += 1
    assert worst <= 1e-7
    assert min(statuses.values()) > 50  # both outcomes exercised


def test_primal_feasibility_within_tolerance():
    rng = np.random.default_rng(7)
    for _ in range(200):
        c, A, senses, b = random_lp(rng, 8, 8)
        n = A.shape[1]
        sol = solve_arrays(c, A, senses, b, np.zeros(n), np.ones(n))
        if sol.status != OPTIMAL:
            continue
        lhs = A @ sol.x
        for r, s in enumerate(senses):
            if s == "<=":
                assert lhs[r] <= b[r] + 1e-7
            elif s == ">=":
                assert lhs[r] >= b[r] - 1e-7
            else:
                assert abs(lhs[r] - b[r]) <= 1e-7
        assert np.all(sol.x >= -1e-7) and np.all(sol.x <= 1 + 1e-7)


@given(st.integers(0, 2 ** 32 - 1))
def test_row_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    c, A, senses, b = random_lp(rng)
    n = A.shape[1]
    perm = rng.permutation(len(b))
    s1 = solve_arrays(c, A, senses, b, np.zeros(n), np.ones(n))
    s2 = solve_arrays(c, A[perm], [senses[k] for k in perm], b[perm], np.zeros(n), np.ones(n))
    assert s1.status == s2.status
    if s1.status == OPTIMAL:
        assert abs(s1.objective - s2.objective) <= 1e-9


@given(st.integers(0, 2 ** 32 - 1))
def test_deterministic(seed):
    rng = np.random.default_rng(seed)
    c, A, senses, b = random_lp(rng)
    n = A.shape[1]
    s1 = solve_arrays(c, A, senses, b, np.zeros(n), np.ones(n))
    s2 = solve_arrays(c, A, senses, b, np.zeros(n), np.ones(n))
    assert s1.status == s2.status and s1.basis == s2.basis
    if s1.status == OPTIMAL:
        assert np.array_equal(s1.x, s2.x)


@given(st.integers(0, 2 ** 32 - 1))
def test_certified_value_is_exact_optimum(seed):
    rng = np.random.default_rng(seed)
    c, A, senses, b = random_lp(rng, 5, 5)
    n = A.shape[1]
    p = LpProblem([Fraction(int(v)) for v in c], [([Fraction(int(v)) for v in A[r]], senses[r], Fraction(int(b[r])))
                                                   for r in range(len(b))], [0] * n, [1] * n)
    sol = solve_lp(p)
    if sol.status != OPTIMAL:
        return
    exact = certify(p, sol)
    assert exact is not None
    assert abs(float(exact) - sol.objective) <= 1e-9


@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 5), st.booleans())
def test_warm_start_agrees_with_cold(seed, j, up):
    rng = np.random.default_rng(seed)
    c, A, senses, b = random_lp(rng)
    n = A.shape[1]
    lo, hi = np.zeros(n), np.ones(n)
    parent = solve_arrays(c, A, senses, b, lo, hi)
    if parent.status != OPTIMAL:
        return
    j %= n
    lo2, hi2 = lo.copy(), hi.copy()
    if up:
        lo2[j] = 1.0
    else:
        hi2[j] = 0.0
    cold = solve_arrays(c, A, senses, b, lo2, hi2)
    warm = solve_arrays(c, A, senses, b, lo2, hi2, warm=parent)
    assert cold.status == warm.status
    if cold.status == OPTIMAL:
        assert abs(cold.objective - warm.objective) <= 1e-9


def test_options_are_configurable():
    opts = SimplexOptions(feas_tol=1e-6, opt_tol=1e-8, bland_after=0)
    sol = solve_lp(LpProblem([-1, -1], [([1, 1], "<=", 1)], [0, 0], [1, 1]), opts)
    assert sol.objective == pytest.approx(-1)
