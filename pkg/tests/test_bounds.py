import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qlin.bounds import (FIXED, FROBENIUS, GRID, INFEASIBLE_FIXING, MAX, MIN, BoundOptions, BoundSet, GridConfig,
                         Region, choose_theta, compute_bound_set, enhanced_region, relaxation_region, row_extremes,
                         set_theta_bounds)
from qlin.errors import InfeasibleInstance, MissingConstraint
from qlin.instance import GeneratorConfig, generate_random, load_instance
from qlin.oracle import containment_flags, dominance_flags, feasible_points
from qlin.simplex import solve_lp

F = Fraction


def box(n, rows=()):
    return Region(n, (F(0),) * n, (F(1),) * n, tuple(rows))


def test_row_extremes_on_box():
    assert row_extremes([0, -1], box(2), MAX) == 0
    assert row_extremes([0, -1], box(2), MIN) == -1


def test_row_extremes_fixing_tightens():
    region = box(2, [([1, 1], "<=", 1)])
    assert row_extremes([0, 2], region, MAX) == 2
    assert row_extremes([0, 2], region, MAX, fixing=(0, 1)) == 0


def test_row_extremes_infeasible_fixing_in_enhanced_region(w1):
    region = enhanced_region(w1, (1, 1), (0, 0))
    assert row_extremes([0, 1], region, MAX, fixing=(0, 0)) is INFEASIBLE_FIXING


def test_row_extremes_returns_exact_fraction():
    region = box(2, [([3, 3], "<=", 2)])
    v = row_extremes([1, 1], region, MAX)
    assert isinstance(v, Fraction) and v == F(2, 3)


def test_w1_unconditional(w1):
    bs = compute_bound_set(w1, BoundOptions(conditional=False))
    assert bs.gamma_min == (-1, -1) and bs.gamma_max == (0, 0)
    assert bs.lambda_min == (0, 0) and bs.lambda_max == (1, 1)
    assert bs.w_max == (2, 2)
    assert bs.gamma_bar1 is None and bs.forced == {}


def test_w1_conditional(w1):
    bs = compute_bound_set(w1, BoundOptions(conditional=True))
    assert bs.gamma_lo1 == (-1, -1)
    assert bs.gamma_bar1 == (0, 0)
    assert bs.gamma_bar2 == (0, 0)
    assert bs.gamma_lo2 == (-1, -1)
    assert bs.forced == {}


def test_w2_conditional_strictly_tighter(w2):
    bs = compute_bound_set(w2, BoundOptions(conditional=True))
    assert bs.gamma_bar2 == (0, 0)
    assert bs.gamma_max == (2, 2)


def test_enhanced_region_rows_for_w1(w1):
    region = enhanced_region(w1, (1, 1), (0, 0))
    # variables (x1, x2, y1, y2)
    rows = {(tuple(c), s, r) for c, s, r in region.rows}
    assert ((0, 0, 1, 1), ">=", 1) in rows
    assert ((-1, 0, 1, 0), "<=", 0) in rows        # y1 <= x1
    assert ((0, -1, 1, 0), "<=", 0) in rows        # y1 <= x2
    assert ((0, -1, 0, 1), "<=", 0) in rows        # y2 <= x2
    assert ((-1, 0, 0, 1), "<=", 0) in rows        # y2 <= x1
    assert len(region.rows) == 2 * w1.n + 1


def test_enhanced_region_projection(w1):
    region = enhanced_region(w1, (1, 1), (0, 0))
    for i in range(2):
        obj = [0, 0, 0, 0]
        obj[i] = 1
        assert solve_lp(region.lp(obj)).objective == pytest.approx(0.5)


def test_enhanced_region_needs_quad(w2):
    with pytest.raises(MissingConstraint):
        enhanced_region(w2, (0, 0), (0, 0))


def test_w1_enhanced_forces_both_ones(w1):
    bs = compute_bound_set(w1, BoundOptions(enhanced=True))
    assert bs.forced == {0: 1, 1: 1}
    assert bs.gamma_min == bs.gamma_max == (-1, -1)


@pytest.mark.parametrize("Q, G, want", [
    ([[2, 4], [4, 2]], [[1, 2], [2, 1]], 2),
    ([[1, 0], [0, 1]], [[0, 1], [1, 0]], 1),
    ([[0, -1], [-1, 0]], [[0, 1], [1, 0]], 1),
])
def test_frobenius_theta_examples(Q, G, want):
    assert choose_theta(Q, G, FROBENIUS) == want


def test_frobenius_clamps_to_eps():
    Q = [[F(1, 10000), 0], [0, 0]]
    G = [[1, 0], [0, 0]]
    assert choose_theta(Q, G, FROBENIUS, grid=GridConfig(eps=1e-3)) == F(1, 1000)
    assert choose_theta(Q, G, FROBENIUS, grid=GridConfig(eps=1e-5)) == F(1, 10000)


@given(st.fractions(min_value=F(1, 50), max_value=100, max_denominator=50),
       st.lists(st.integers(-5, 5), min_size=3, max_size=3))
def test_frobenius_recovers_scale(alpha, g):
    G = [[g[0], g[1]], [g[1], g[2]]]
    if all(v == 0 for v in g):
        return
    Q = [[alpha * v for v in row] for row in G]
    theta = choose_theta(Q, G, FROBENIUS, grid=GridConfig(eps=1e-3))
    assert abs(theta - max(alpha, F(1, 1000))) <= 1e-12


def test_grid_ties_pick_lowest():
    region = box(2)
    zero = [[0, 0], [0, 0]]
    assert choose_theta(zero, zero, GRID, region) == F(1, 10)


def test_grid_finds_cancelling_theta():
    # theta G - Q vanishes at theta = 1, a grid point
    G = [[0, 1], [1, 0]]
    assert choose_theta(G, G, GRID, box(2)) == 1


def test_grid_points_are_short_rationals():
    G = [[0, 3], [3, 1]]
    Q = [[1, -2], [-2, 0]]
    theta = choose_theta(Q, G, GRID, box(2))
    assert (theta * 10).denominator == 1


def test_fixed_theta_mode(w1):
    bs = compute_bound_set(w1, BoundOptions(theta_mode=FIXED, theta=0.5))
    assert bs.theta == F(1, 2)
    with pytest.raises(ValueError):
        compute_bound_set(w1, BoundOptions(theta_mode=FIXED))


def test_both_fixings_infeasible_raises():
    inst = load_instance(json.dumps({"n": 2, "c": [0, 0], "Q": [[0, 0], [0, 0]],
                                     "constraints": [{"coeffs": [2, 0], "sense": "=", "rhs": 1}]}))
    with pytest.raises(InfeasibleInstance):
        compute_bound_set(inst, BoundOptions(conditional=True))


def test_forced_fixing_is_propagated():
    # x1 + x2 >= 2 - 0.5 forces both variables to one
    inst = load_instance(json.dumps({"n": 2, "c": [0, 0], "Q": [[0, 1], [1, 0]],
                                     "constraints": [{"coeffs": [1, 1], "sense": ">=", "rhs": 1.5}]}))
    bs = compute_bound_set(inst, BoundOptions(conditional=True))
    assert bs.forced == {0: 1, 1: 1}
    assert bs.gamma_min == bs.gamma_max == (1, 1)


def test_theta_one_bounds_equal_w_bounds():
    for seed in range(10):
        inst = generate_random(GeneratorConfig(n=5, with_quad_constraint=True, seed=seed, side_rows=1))
        bs = compute_bound_set(inst, BoundOptions(theta_mode=FIXED, theta=1))
        assert bs.w_theta_bar1 == bs.w_bar1
        assert bs.w_theta_lo1 == bs.w_lo1
        assert bs.w_theta_bar2 == bs.w_bar2
        assert bs.w_theta_lo2 == bs.w_lo2


seeds = st.integers(0, 2 ** 32 - 1)


def _random(seed, **kw):
    n = 3 + seed % 4
    return generate_random(GeneratorConfig(n=n, with_quad_constraint=True, seed=seed,
                                           cardinality=(seed % n) or None, side_rows=seed % 3, **kw))


@settings(max_examples=30)
@given(seeds, st.booleans())
def test_bounds_contain_every_feasible_point(seed, enhanced):
    inst = _random(seed)
    bs = compute_bound_set(inst, BoundOptions(enhanced=enhanced))
    P, _, _ = feasible_points(inst)
    assert containment_flags(inst, bs, [tuple(int(v) for v in r) for r in P]) == []


@settings(max_examples=30)
@given(seeds)
def test_conditional_bounds_dominated_by_unconditional(seed):
    bs = compute_bound_set(_random(seed), BoundOptions())
    assert dominance_flags(bs) == []


@settings(max_examples=20)
@given(seeds)
def test_enhanced_gamma_at_least_as_tight(seed):
    inst = _random(seed)
    plain = compute_bound_set(inst, BoundOptions())
    enh = compute_bound_set(inst, BoundOptions(enhanced=True))
    for name in ("gamma_min", "gamma_lo1", "gamma_lo2"):
        assert all(a >= b for a, b in zip(getattr(enh, name), getattr(plain, name))), name
    for name in ("gamma_max", "gamma_bar1", "gamma_bar2"):
        assert all(a <= b for a, b in zip(getattr(enh, name), getattr(plain, name))), name


def test_theta_bounds_recomputed_for_new_theta(w1):
    bs = compute_bound_set(w1)
    set_theta_bounds(bs, w1, F(3), relaxation_region(w1))
    assert bs.theta == 3
    # rows of 3G - Q are 4 x_j
    assert bs.w_theta_bar1 == (4, 4) and bs.w_theta_lo1 == (0, 0)


def test_vector_fields_are_declared():
    assert set(BoundSet.VECTOR_FIELDS) <= set(BoundSet.__dataclass_fields__)
