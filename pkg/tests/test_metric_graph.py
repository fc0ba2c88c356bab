from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faithtrop.metric_graph import (
    GraphError,
    MetricGraph,
    add_leaf,
    build_graph,
    complement_disjoint,
    distance,
    genus,
    is_spanning_tree,
    prepare_model,
    spanning_tree,
    split_edge,
    subdivide,
)
from oracles import k4, random_graph, theta, two_loop


def total_length(g):
    return sum(e.length for e in g.edges)


def test_build_errors():
    with pytest.raises(GraphError, match="dangling"):
        build_graph(["a"], [("e", "a", "b", 1)])
    with pytest.raises(GraphError, match="non-positive"):
        build_graph(["a", "b"], [("e", "a", "b", 0)])
    with pytest.raises(GraphError, match="disconnected"):
        build_graph(["a", "b"], [])
    with pytest.raises(GraphError, match="duplicate edge"):
        build_graph(["a", "b"], [("e", "a", "b", 1), ("e", "a", "b", 2)])


def test_genus_examples():
    assert genus(theta()) == 2
    assert genus(k4()) == 3
    assert genus(two_loop()) == 2


def test_loop_counts_twice_in_degree():
    assert two_loop().degree("o") == 4


def test_json_round_trip():
    g = theta()
    assert MetricGraph.from_json(g.to_json()) == g
    with pytest.raises(GraphError):
        MetricGraph.from_json({"vertices": ["a"]})


def test_point_normalizes_endpoints():
    g = theta()
    assert g.point("e2", 0) == g.vertex_point("u")
    assert g.point("e2", 2) == g.vertex_point("v")
    with pytest.raises(GraphError):
        g.point("e2", 3)


def test_split_edge_keeps_orientation():
    g, vs, pieces = split_edge(theta(), "e3", [1, 2])
    assert [g.edge(p).length for p in pieces] == [1, 1, 1]
    assert g.edge(pieces[0]).u == "u" and g.edge(pieces[-1]).v == "v"
    assert genus(g) == 2


def test_subdivide_and_leaf():
    g = subdivide(theta(), theta().point("e1", Fraction(1, 2)))
    assert len(g.vertices) == 3
    h, leaf, eid = add_leaf(g, "u", 2)
    assert h.degree(leaf) == 1 and h.edge(eid).length == 2 and genus(h) == 2


def test_spanning_tree_and_complement():
    for g in (theta(), k4(), two_loop()):
        tree, comp = spanning_tree(g)
        assert is_spanning_tree(g, tree)
        assert len(comp) == genus(g)


def test_prepare_model_makes_complement_disjoint():
    for g in (theta(), k4(), two_loop()):
        h, comp = prepare_model(g)
        assert complement_disjoint(h, comp)
        assert genus(h) == genus(g)
        assert total_length(h) == total_length(g)


def test_distance_matches_networkx():
    g = random_graph(3, 6, seed=4)
    nxg = nx.MultiGraph()
    for e in g.edges:
        nxg.add_edge(e.u, e.v, weight=e.length)
    d = dict(nx.all_pairs_dijkstra_path_length(nxg))
    for a in g.vertices:
        for b in g.vertices:
            assert distance(g, g.vertex_point(a), g.vertex_point(b)) == d[a][b]


def test_distance_to_interior_point():
    g = theta()
    # along e3 from u, 1 away; also reachable via v then back along e1 (1 + 2)
    assert distance(g, g.vertex_point("u"), g.point("e3", 1)) == 1
    assert distance(g, g.vertex_point("v"), g.point("e3", 1)) == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 4), st.integers(1, 5), st.integers(0, 10_000))
def test_subdivision_preserves_length_and_genus(gen, nv, seed):
    g = random_graph(gen, nv, seed)
    h, comp = prepare_model(g)
    assert genus(h) == genus(g) == gen
    assert total_length(h) == total_length(g)
    assert complement_disjoint(h, comp)
