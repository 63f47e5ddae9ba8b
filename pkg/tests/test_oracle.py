import dataclasses
import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qlin.bnb import solve_milp
from qlin.bounds import BoundOptions, compute_bound_set
from qlin.errors import TooLarge
from qlin.instance import GeneratorConfig, QuadConstraint, evaluate_point, generate_random
from qlin.models import COND, NO_CUTS, build_model
from qlin.oracle import (CSV_HEADER, CompareOptions, combinations, compare_relaxations, enumerate_optimum,
                         fmt, report_csv, run_checks, verify_equivalence)
from qlin.suite import SuiteConfig, suite_instances

F = Fraction


def test_w1_optimum(w1):
    res = enumerate_optimum(w1)
    assert res.status == "Optimal"
    assert res.objective == -2
    assert res.argmins == [(1, 1)]
    assert res.feasible_count == 1


def test_w2_optimum(w2):
    res = enumerate_optimum(w2)
    assert res.objective == 0
    assert res.argmins == [(0, 0), (0, 1), (1, 0)]


def test_infeasible(w1):
    qc = w1.quad_constraint
    inst = dataclasses.replace(w1, quad_constraint=QuadConstraint(qc.h, qc.G, F(3)))
    assert enumerate_optimum(inst).status == "Infeasible"


def test_too_large():
    inst = generate_random(GeneratorConfig(n=25, seed=0))
    with pytest.raises(TooLarge):
        enumerate_optimum(inst)


def test_matches_bp_milp_on_seeded_instance():
    inst = generate_random(GeneratorConfig(n=6, with_quad_constraint=True, seed=11))
    res = enumerate_optimum(inst)
    sol = solve_milp(build_model(inst, compute_bound_set(inst), "bp"))
    assert sol.objective == pytest.approx(float(res.objective), abs=1e-6)


@settings(max_examples=30)
@given(st.integers(0, 2 ** 32 - 1))
def test_argmins_are_optimal_and_complete(seed):
    inst = generate_random(GeneratorConfig(n=5, with_quad_constraint=True, seed=seed, cardinality=2))
    res = enumerate_optimum(inst)
    vals = {}
    for x in itertools.product((0, 1), repeat=5):
        ev = evaluate_point(inst, x)
        if ev["feasible"]:
            vals[x] = ev["objective"]
    assert res.feasible_count == len(vals)
    if not vals:
        assert res.status == "Infeasible"
        return
    best = min(vals.values())
    assert res.objective == best
    assert res.argmins == sorted(x for x, v in vals.items() if v == best)


@pytest.mark.parametrize("variant, cuts", [("bp-bar", NO_CUTS), ("nbp-bar", COND)])
def test_verify_equivalence_w1(w1, variant, cuts):
    res = verify_equivalence(w1, compute_bound_set(w1), variant, cuts)
    assert res.passed, res.details
    assert res.milp_objective == pytest.approx(-2)


def test_corrupted_bounds_reported_not_raised(w1):
    bs = dataclasses.replace(compute_bound_set(w1), gamma_min=(F(0), F(0)))
    res = verify_equivalence(w1, bs, "small")
    assert not res.passed
    assert any("lift of (1, 1)" in d for d in res.details)
    res = verify_equivalence(w1, bs, "bp-bar")
    assert not res.passed and "status Infeasible" in res.details[0]


def test_compare_w1(w1):
    rep = compare_relaxations(w1, instance_id="w1")
    assert rep.flags == []
    assert [(r.variant, r.cuts) for r in rep.rows] == [
        (v.value, c.label) for v, c in combinations(w1, compute_bound_set(w1))]
    assert all(r.milp_objective == pytest.approx(-2) for r in rep.rows)
    assert rep.rows[0].variant == "bp" and rep.rows[0].cuts == "none"


def test_csv_layout_and_determinism(w1):
    a = report_csv([compare_relaxations(w1, instance_id="w1")])
    b = report_csv([compare_relaxations(w1, instance_id="w1")])
    assert a == b
    lines = a.splitlines()
    assert lines[0] == CSV_HEADER
    assert all(line.endswith(",NA") for line in lines[1:])
    timed = report_csv([compare_relaxations(w1, CompareOptions(timing=True), instance_id="w1")])
    assert not timed.splitlines()[1].endswith(",NA")


def test_csv_infeasible_rows(w1):
    qc = w1.quad_constraint
    inst = dataclasses.replace(w1, quad_constraint=QuadConstraint(qc.h, qc.G, F(3)))
    rep = compare_relaxations(inst, instance_id="bad")
    assert rep.flags == []
    assert all(",infeasible,infeasible," in line for line in report_csv([rep]).splitlines()[1:])


def test_fmt():
    assert fmt(None) == "NA"
    assert fmt(F(-2)) == "-2"
    assert fmt(-0.0) == "0"
    assert fmt(F(1, 3)) == "0.333333333333"


def test_small_suite_has_no_flags():
    for name, inst in suite_instances(SuiteConfig(count=20, n_min=6, n_max=6, seed=3)):
        rep = compare_relaxations(inst, instance_id=name)
        assert rep.flags == [], (name, rep.flags)


@pytest.mark.parametrize("opts", [BoundOptions(), BoundOptions(enhanced=True), BoundOptions(theta_mode="grid")])
def test_run_checks_clean(opts):
    for seed in range(4):
        inst = generate_random(GeneratorConfig(n=5, with_quad_constraint=True, seed=seed, side_rows=1))
        assert run_checks(inst, opts) == []
