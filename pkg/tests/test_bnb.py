import io
import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qlin.bnb import NODE_LIMIT, MilpConfig, solve_milp
from qlin.bounds import compute_bound_set
from qlin.models import LinearModel, build_model

F = Fraction


def binary_model(c, rows):
    m = LinearModel(variant=None, n=len(c))
    for k in range(len(c)):
        m.add_var(f"x{k + 1}", "x", F(0), F(1), binary=True)
    m.objective = {k: F(v) for k, v in enumerate(c) if v}
    for r, (coeffs, sense, rhs) in enumerate(rows):
        m.add_row(f"r{r + 1}", {k: F(a) for k, a in enumerate(coeffs)}, sense, rhs, "test")
    return m


def test_fractional_root_example():
    sol = solve_milp(binary_model([-1, -1], [([2, 2], "<=", 3)]))
    assert sol.status == "Optimal"
    assert sol.objective == pytest.approx(-1)
    assert sol.root_bound == pytest.approx(-1.5)
    assert sum(sol.x) == 1


def test_bp_w1(w1):
    sol = solve_milp(build_model(w1, compute_bound_set(w1), "bp"))
    assert sol.objective == pytest.approx(-2)
    assert sol.x == (1, 1)


def test_infeasible_model():
    sol = solve_milp(binary_model([1], [([1], ">=", 1), ([1], "<=", 0)]))
    assert sol.status == "Infeasible"
    assert sol.objective is None and sol.x is None


def test_optimal_gap_invariant():
    sol = solve_milp(binary_model([-3, -2, -4, -1], [([2, 3, 4, 1], "<=", 6), ([1, 1, 1, 1], ">=", 1)]))
    assert abs(sol.objective - sol.best_bound) <= 1e-6 * max(1, abs(sol.objective))


def test_node_log_format_and_monotone_bound():
    log = io.StringIO()
    m = binary_model([-5, -4, -3, -6, -2], [([3, 4, 2, 5, 1], "<=", 7), ([1, -1, 1, -1, 1], "<=", 1)])
    sol = solve_milp(m, log=log)
    lines = log.getvalue().splitlines()
    assert len(lines) == sol.nodes
    depths = [int(line.split()[0]) for line in lines]
    assert depths[0] == 0
    for line in lines:
        depth, bound, var = line.split()
        assert bound == "infeasible" or float(bound) == float(bound)
    trace = sol.bound_trace
    assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))


def test_node_limit_flagged():
    m = binary_model([-5, -4, -3, -6, -2], [([3, 4, 2, 5, 1], "<=", 7)])
    sol = solve_milp(m, MilpConfig(node_limit=1))
    assert sol.status == NODE_LIMIT


def test_deterministic():
    m = binary_model([-5, -4, -3, -6, -2], [([3, 4, 2, 5, 1], "<=", 7)])
    a, b = io.StringIO(), io.StringIO()
    s1, s2 = solve_milp(m, log=a), solve_milp(m, log=b)
    assert a.getvalue() == b.getvalue()
    assert (s1.objective, s1.x, s1.nodes) == (s2.objective, s2.x, s2.nodes)


def brute_force(c, A, senses, b):
    best = None
    for x in itertools.product((0, 1), repeat=len(c)):
        x = np.array(x)
        lhs = A @ x
        ok = all((lhs[r] <= b[r]) if s == "<=" else (lhs[r] >= b[r]) if s == ">=" else lhs[r] == b[r]
                 for r, s in enumerate(senses))
        if ok:
            v = float(np.dot(c, x))
            best = v if best is None else min(best, v)
    return best


@settings(max_examples=60)
@given(st.integers(0, 2 ** 32 - 1))
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(2, 8)), int(rng.integers(1, 4))
    c = rng.integers(-9, 10, n)
    A = rng.integers(-5, 6, (m, n))
    b = rng.integers(-3, 10, m)
    senses = list(rng.choice(["<=", ">="], m))
    sol = solve_milp(binary_model(c.tolist(), [(A[r].tolist(), senses[r], int(b[r])) for r in range(m)]))
    ref = brute_force(c, A, senses, b)
    if ref is None:
        assert sol.status == "Infeasible"
    else:
        assert sol.objective == pytest.approx(ref, abs=1e-6)
        assert float(np.dot(c, sol.x)) == pytest.approx(ref, abs=1e-6)
