import itertools
import time
from importlib import resources

import numpy as np
import pytest

from fdi import eb
from fdi.causal import (
    Dag,
    Independence,
    check_independence,
    d_separated,
    discretize,
    factorization,
    format_factorization,
    implied_independencies,
)
from fdi.errors import CycleError, InsufficientData, ParseError, UnknownNode
from oracles import brute_force_d_separated, random_dag


def fixture_dag(name):
    return Dag.from_text(resources.files("fdi").joinpath("data", name).read_text())


def test_d_separation_matches_brute_force_oracle():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    checked = 0
    for _ in range(200):
        dag = random_dag(rng)
        nodes = dag.nodes
        for a, b in itertools.combinations(nodes, 2):
            rest = [n for n in nodes if n not in (a, b)]
            for size in range(3):
                for z in itertools.combinations(rest, size):
                    got = d_separated(dag, {a}, {b}, set(z))
                    assert got == brute_force_d_separated(dag, {a}, {b}, set(z)), (dag, a, b, z)
                    checked += 1
    assert checked > 1000
    assert time.perf_counter() - start < 5


def test_d_separation_symmetric():
    rng = np.random.default_rng(5)
    for _ in range(50):
        dag = random_dag(rng)
        for a, b in itertools.combinations(dag.nodes, 2):
            for z in [(), tuple(n for n in dag.nodes if n not in (a, b))[:1]]:
                assert d_separated(dag, {a}, {b}, set(z)) == d_separated(dag, {b}, {a}, set(z))


def test_classic_structures():
    chain = Dag(edges=[("a", "b"), ("b", "c")])
    fork = Dag(edges=[("b", "a"), ("b", "c")])
    collider = Dag(edges=[("a", "b"), ("c", "b"), ("b", "d")])
    assert not d_separated(chain, {"a"}, {"c"}) and d_separated(chain, {"a"}, {"c"}, {"b"})
    assert not d_separated(fork, {"a"}, {"c"}) and d_separated(fork, {"a"}, {"c"}, {"b"})
    assert d_separated(collider, {"a"}, {"c"})
    assert not d_separated(collider, {"a"}, {"c"}, {"b"})
    assert not d_separated(collider, {"a"}, {"c"}, {"d"})


def test_d_separation_errors():
    dag = Dag(edges=[("a", "b")])
    with pytest.raises(UnknownNode):
        d_separated(dag, {"a"}, {"zz"})
    with pytest.raises(ValueError):
        d_separated(dag, {"a"}, {"a"})


def test_cycles_rejected():
    with pytest.raises(CycleError):
        Dag(edges=[("a", "b"), ("b", "a")])
    with pytest.raises(CycleError):
        Dag(edges=[("a", "a")])
    with pytest.raises(CycleError):
        Dag.from_text("a -> b\nb -> c\nc -> a\n")


def test_text_round_trip_and_errors():
    dag = fixture_dag("rrc_indicators.dag")
    assert dag.hidden == frozenset({"H"})
    assert Dag.from_text(dag.to_text()) == dag
    assert Dag.from_text("lonely\n").nodes == ("lonely",)
    for bad in ["", "# only a comment\n", "a -> b -> c\n", "a b -> c\n", " -> c\n"]:
        with pytest.raises(ParseError):
            Dag.from_text(bad)


def test_two_variable_factorization():
    dag = fixture_dag("two_variable.dag")
    assert format_factorization(factorization(dag)) == "Pr(S)Pr(Y|S)"


def test_factorization_follows_topological_order():
    dag = Dag(["c", "b", "a"], [("a", "b"), ("b", "c")])
    assert [v for v, _ in factorization(dag)] == ["a", "b", "c"]
    assert format_factorization(factorization(dag)) == "Pr(a)Pr(b|a)Pr(c|b)"


def test_indicator_fixture():
    dag = fixture_dag("rrc_indicators.dag")
    assert d_separated(dag, {"S1"}, {"R0", "C"})
    assert not d_separated(dag, {"S1"}, {"R0", "C"}, {"V1"})
    assert dag.observed == ("R0", "C", "S1", "V0", "V1", "V2")


def test_implied_independencies_self_consistent():
    dag = fixture_dag("rrc_indicators.dag")
    implied = implied_independencies(dag, max_conditioning=1)
    assert Independence("R0", "S1") in implied
    assert all("H" not in (i.x, i.y, *i.given) for i in implied)
    for ind in implied:
        assert d_separated(dag, {ind.x}, {ind.y}, set(ind.given))
    assert str(Independence("S1", "R0", ("V1",))) == "S1 _||_ R0 | V1"
    with pytest.raises(ValueError):
        implied_independencies(dag, -1)


def test_discretize():
    assert discretize(np.array([0, 1, 1, 0])).tolist() == [0, 1, 1, 0]
    codes = discretize(np.arange(100.0), bins=5)
    assert np.bincount(codes).tolist() == [20] * 5


@pytest.fixture(scope="module")
def case_columns(case_study_data):
    train, _ = case_study_data
    return eb.independence_columns(eb.build_features(train))


def test_switch_independent_of_fault_in_data(case_columns):
    assert check_independence(case_columns, Independence("S1", "label")).consistent


def test_voltage_depends_on_fault_in_data(case_columns):
    verdict = check_independence(case_columns, Independence("V1", "R0"))
    assert not verdict.consistent and verdict.p_value < 1e-6


def test_conditioning_on_collider_child_in_data(case_columns):
    assert not check_independence(case_columns, Independence("S1", "R0", ("V1",))).consistent


def test_noise_columns_are_consistent():
    consistent = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        data = {"a": rng.normal(size=400), "b": rng.normal(size=400)}
        consistent += check_independence(data, Independence("a", "b")).consistent
    assert consistent >= 95


def test_check_independence_errors():
    data = {"a": np.zeros(10), "b": np.ones(10)}
    with pytest.raises(UnknownNode):
        check_independence(data, Independence("a", "zz"))
    with pytest.raises(InsufficientData):
        check_independence(data, Independence("a", "b"))
    with pytest.raises(ValueError):
        check_independence(data, Independence("a", "b"), alpha=0)

