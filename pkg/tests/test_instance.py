import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qlin.errors import DimensionError, ParseError
from qlin.instance import (GeneratorConfig, evaluate_point, generate_random, load_instance, row_products,
                           save_instance)
from qlin.oracle import enumerate_optimum, feasible_points


def test_load_w1_fields(w1):
    assert w1.n == 2
    assert w1.c == (0, 0)
    assert w1.Q == ((0, -1), (-1, 0))
    assert w1.G == ((0, 1), (1, 0))
    assert w1.quad_constraint.g == 1
    assert w1.side_constraints == ()


def test_symmetrizes_on_load():
    inst = load_instance(json.dumps({"n": 2, "c": [0, 0], "Q": [[0, 2], [0, 0]]}))
    assert inst.Q == ((0, 1), (1, 0))


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        load_instance(json.dumps({"n": 2, "c": [0, 0, 0], "Q": [[0, 0], [0, 0]]}))


@pytest.mark.parametrize("bad", ["NaN", "Infinity", "-Infinity"])
def test_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        load_instance('{"n": 2, "c": [0, %s], "Q": [[0, 0], [0, 0]]}' % bad)


def test_malformed_document():
    with pytest.raises(ParseError):
        load_instance("{not json")


def test_fixed_indices_must_be_in_range():
    with pytest.raises(ValueError):
        load_instance(json.dumps({"n": 2, "c": [0, 0], "Q": [[0, 0], [0, 0]], "fixed": {"3": 1}}))


def test_fixed_loaded_zero_based():
    inst = load_instance(json.dumps({"n": 2, "c": [0, 0], "Q": [[0, 0], [0, 0]], "fixed": {"2": 1}}))
    assert inst.fixed == {1: 1}
    assert not evaluate_point(inst, [0, 0])["feasible"]
    assert evaluate_point(inst, [0, 1])["feasible"]


@pytest.mark.parametrize("x, obj, lhs, feas", [((1, 1), -2, 2, True), ((1, 0), 0, 0, False),
                                               ((0, 0), 0, 0, False)])
def test_evaluate_w1(w1, x, obj, lhs, feas):
    ev = evaluate_point(w1, list(x))
    assert ev == {"objective": obj, "quad_lhs": lhs, "feasible": feas}


def test_evaluate_wrong_length(w1):
    with pytest.raises(DimensionError):
        evaluate_point(w1, [1, 1, 1])


def test_generator_deterministic():
    a = generate_random(GeneratorConfig(n=4, seed=7))
    b = generate_random(GeneratorConfig(n=4, seed=7))
    assert save_instance(a) == save_instance(b)


def test_generated_quad_instance_is_feasible():
    inst = generate_random(GeneratorConfig(n=4, with_quad_constraint=True, seed=7))
    P, _, _ = feasible_points(inst)
    assert len(P) >= 1


def test_generated_cardinality_respected():
    inst = generate_random(GeneratorConfig(n=6, cardinality=2, seed=3))
    P, _, _ = feasible_points(inst)
    assert len(P) > 0
    assert P.sum(axis=1).max() <= 2


def test_generated_quad_instances_feasible_for_100_seeds():
    for seed in range(100):
        inst = generate_random(GeneratorConfig(n=5, with_quad_constraint=True, seed=seed, cardinality=seed % 4 + 1,
                                               side_rows=seed % 3))
        assert enumerate_optimum(inst).status == "Optimal", seed


@pytest.mark.parametrize("kwargs", [dict(n=1), dict(n=3, density=0), dict(n=3, coeff_range=0),
                                    dict(n=3, cardinality=4), dict(n=3, seed=-1)])
def test_generator_config_validation(kwargs):
    with pytest.raises(ValueError):
        GeneratorConfig(**kwargs)


def test_off_diagonal_density_roughly_matches():
    nz = total = 0
    for seed in range(20):
        inst = generate_random(GeneratorConfig(n=10, density=0.3, seed=seed))
        for i in range(10):
            for j in range(i + 1, 10):
                total += 1
                nz += inst.Q[i][j] != 0
    assert 0.2 < nz / total < 0.4


fractions = st.fractions(min_value=-50, max_value=50, max_denominator=64)


@st.composite
def instances(draw):
    n = draw(st.integers(2, 4))
    vec = st.lists(fractions, min_size=n, max_size=n)
    doc = {"n": n, "c": draw(vec), "Q": [draw(vec) for _ in range(n)]}
    if draw(st.booleans()):
        doc.update(h=draw(vec), G=[draw(vec) for _ in range(n)], g=draw(fractions))
    if draw(st.booleans()):
        doc["constraints"] = [{"coeffs": draw(vec), "sense": draw(st.sampled_from(["<=", ">=", "="])),
                               "rhs": draw(fractions)}]
    if draw(st.booleans()):
        doc["fixed"] = {str(draw(st.integers(1, n))): draw(st.integers(0, 1))}
    text = json.dumps(doc, default=lambda f: str(f) if f.denominator != 1 else f.numerator)
    return load_instance(text)


@given(instances())
def test_save_load_round_trip(inst):
    text = save_instance(inst)
    again = load_instance(text)
    assert again == inst
    assert save_instance(again) == text


@given(instances(), st.data())
def test_objective_two_evaluation_orders_agree(inst, data):
    x = data.draw(st.lists(st.integers(0, 1), min_size=inst.n, max_size=inst.n))
    rowwise = sum(row_products(inst.Q, x), Fraction(0)) + sum((c * v for c, v in zip(inst.c, x)), Fraction(0))
    pairwise = sum((inst.Q[i][j] * x[i] * x[j] for i in range(inst.n) for j in range(inst.n)), Fraction(0))
    pairwise += sum((c for c, v in zip(inst.c, x) if v), Fraction(0))
    assert evaluate_point(inst, x)["objective"] == rowwise == pairwise
