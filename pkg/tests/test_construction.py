import copy
from math import gcd

import pytest

from faithtrop.construction import (
    MARKS,
    ParameterSet,
    all_pass,
    build_coordinate_functions,
    choose_s,
    synthesize_parameters,
    target_divisors,
    verify_parameters,
)
from faithtrop.divisor import divisor_of, solve_poisson
from faithtrop.metric_graph import distance, genus
from oracles import instance, random_graph, theta

CASES = [(n, s) for n in ("theta", "k4", "two_loop") for s in range(3)]


def failing(params):
    return {c.name for c in verify_parameters(params) if not c.passed}


@pytest.mark.parametrize("name,seed", CASES)
def test_synthesized_parameters_verify(name, seed):
    params, _, _ = instance(name, seed)
    assert failing(params) == set()


@pytest.mark.parametrize("name,seed", CASES)
def test_functions_realize_divisors(name, seed):
    params, _, _ = instance(name, seed)
    Fs = build_coordinate_functions(params)
    Ds = target_divisors(params)
    for F, D in zip(Fs, Ds):
        assert D.degree == 0
        assert divisor_of(F) == D
        assert solve_poisson(params.graph, D).equals_up_to_constant(F)


@pytest.mark.parametrize("name,seed", CASES)
def test_point_layout(name, seed):
    params, _, _ = instance(name, seed)
    g = params.graph
    for e in g.edges:
        o = params.offsets[e.id]
        ln = e.length
        assert 0 < o["c"] < o["a"] < o["p"] < o["q"] < o["b"] < o["d"] < ln
        for x, y in (("c", "d"), ("a", "b"), ("p", "q")):
            assert o[x] + o[y] == ln
        v, w = params.orient[e.id]
        assert params.r[v] < params.r[w]
        dab = o["b"] - o["a"]
        assert dab == params.r[w] - params.r[v] < ln
    assert all(s > 1 for s in params.s.values())


@pytest.mark.parametrize("name,seed", CASES)
def test_coprimality_at_every_vertex(name, seed):
    params, _, _ = instance(name, seed)
    g = params.graph
    for v in g.vertices:
        tot = sum(params.s[e.id] for e in g.incident(v))
        assert gcd(g.degree(v), tot) == 1


@pytest.mark.parametrize("name,seed", CASES)
def test_function_shapes(name, seed):
    params, _, _ = instance(name, seed)
    g = params.graph
    F1, F2, F3 = build_coordinate_functions(params)
    for v in g.vertices:
        assert F1.vertex_value(v) == 0 and F2.vertex_value(v) == 0
        assert F3.vertex_value(v) == params.r[v]
    for e in g.edges:
        p, qq = params.point(e.id, "p"), params.point(e.id, "q")
        assert F1(p) == F1(qq) == params.offsets[e.id]["p"]
        assert F2(p) == F2(qq)
        assert F3(qq) - F3(p) == distance(g, p, qq)
    for eid in params.complement:
        c = params.point(eid, "c")
        assert F2(c) == params.s[eid] * params.offsets[eid]["c"]


def test_d2_coefficient_at_complement_c():
    params, _, _ = instance("theta", 0)
    D1, D2, D3 = target_divisors(params)
    e1 = params.complement[0]
    assert D2[params.point(e1, "c")] == -1
    assert D2[params.point(e1, "d")] == -1
    assert D2[params.point(e1, "a")] == 1


def test_equal_s_fails_s1():
    params, _, _ = instance("theta", 0)
    bad = copy.deepcopy(params)
    e1, e2 = sorted(bad.s)[:2]
    bad.s[e2] = bad.s[e1]
    assert "S1" in failing(bad)


def test_equal_r_fails_r1():
    params, _, _ = instance("theta", 0)
    bad = copy.deepcopy(params)
    a, b = sorted(bad.r)[:2]
    bad.r[b] = bad.r[a]
    assert "R1" in failing(bad)


def test_deterministic_and_serializable():
    a = synthesize_parameters(theta(), seed=5)
    b = synthesize_parameters(theta(), seed=5)
    assert a.to_json() == b.to_json()
    c = ParameterSet.from_json(a.to_json())
    assert c.to_json() == a.to_json() and all_pass(verify_parameters(c))


def test_rational_outputs():
    params, _, _ = instance("k4", 1)
    from fractions import Fraction

    assert all(isinstance(x, Fraction) for o in params.offsets.values() for x in o.values())
    assert all(isinstance(x, Fraction) for x in params.r.values())
    assert set(next(iter(params.offsets.values()))) == set(MARKS)


def test_choose_s_rerun_is_stable():
    params, _, _ = instance("two_loop", 0)
    again = copy.deepcopy(params)
    again.s = {}
    first = choose_s(again)
    assert choose_s(again) == first
    again.s = first
    assert failing(again) == set()


@pytest.mark.parametrize("gen", [1, 2, 3, 4, 5])
def test_random_graphs_up_to_genus_five(gen):
    g = random_graph(gen, 4, seed=gen)
    params = synthesize_parameters(g, seed=gen)
    assert genus(params.graph) == gen
    assert failing(params) == set()
