from fractions import Fraction as Q
from itertools import combinations

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from faithtrop.construction import synthesize_parameters
from faithtrop.embedding import (
    P1,
    EmbeddedTropicalCurve,
    Ray,
    check_balancing,
    check_injectivity,
    classify_faithfulness,
    construct_curve,
    outgoing_directions,
)
from faithtrop.genus2 import genus2_preset
from faithtrop.lattice import is_saturated
from faithtrop.resolution import (
    EmbeddingState,
    local_nonsmoothness,
    n_profile,
    resolution_step,
    resolve_to_smooth,
    state_from_json,
    state_to_json,
)
from oracles import instance, random_graph, snf_saturated


def star(dirs):
    o = tuple(Q(0) for _ in dirs[0])
    return EmbeddedTropicalCurve(len(o), [], [Ray(o, d, 1, "o", f"r{i}") for i, d in enumerate(dirs)])


def test_crossing_has_nonsmoothness_one():
    assert local_nonsmoothness(star([(1, 1), (-1, -1), (1, 0), (-1, 0)]), "o") == 1


def test_unimodular_trivalent_is_smooth():
    assert local_nonsmoothness(star([(1, 0), (0, 1), (-1, -1)]), "o") == 0


def test_unknown_vertex_rejected():
    with pytest.raises(ValueError):
        local_nonsmoothness(star([(1, 0), (-1, 0)]), "nowhere")


@pytest.mark.parametrize("name", ["theta", "k4", "two_loop"])
def test_graph_vertices_bounded_by_degree_minus_one(name):
    # equality needs every pair of tangent directions to be non-unimodular
    params, sig, curve = instance(name, 0)
    g = params.graph
    dirs = outgoing_directions(curve)
    for v in g.vertices:
        if g.degree(v) < 2:
            continue
        n = local_nonsmoothness(curve, v)
        vs = [d for d, _ in dirs[v]]
        unimodular_pair = any(snf_saturated([a, b]) for a, b in combinations(vs, 2))
        assert n <= g.degree(v) - 1
        assert (n == g.degree(v) - 1) == (not unimodular_pair)


def test_step_on_smooth_state_is_noop():
    st_ = genus2_preset()
    new, rep = resolution_step(st_)
    assert new is st_ and rep.dim_after == rep.dim_before


def test_step_lowers_every_nonsmooth_vertex():
    _, sig, _ = instance("theta", 0)
    state = EmbeddingState(sig)
    new, rep = resolution_step(state)
    assert new.dim == 4
    assert rep.decreased and rep.support_smooth
    for z, n in rep.before.items():
        if n > 0:
            assert rep.after[z] <= n - 1
    assert classify_faithfulness(new.curve, P1) == "fully_faithful"
    assert check_balancing(new.curve)


def test_new_tangent_family_is_saturated():
    _, sig, _ = instance("k4", 0)
    state = EmbeddingState(sig)
    new, rep = resolution_step(state)
    dirs = outgoing_directions(new.curve)
    for z, (e1, e0) in rep.choices.items():
        assert len(dirs[z]) >= 3
        lifted = [d for d, _ in dirs[z] if d[-1] != 0]
        assert lifted and all(is_saturated([d]) for d in lifted)


@pytest.mark.parametrize("name", ["theta", "k4", "two_loop"])
def test_resolve_to_smooth(name):
    params, sig, _ = instance(name, 0)
    C = max(params.graph.degree(v) for v in params.graph.vertices)
    final, reps = resolve_to_smooth(EmbeddingState(sig))
    assert len(reps) <= C - 1
    assert final.dim <= C + 2
    assert not any(n_profile(final).values())
    assert check_injectivity(final.curve) == []
    assert classify_faithfulness(final.curve, P1) == "fully_faithful"
    assert check_balancing(final.curve)
    assert all(r.decreased and r.support_smooth for r in reps)


def test_state_json_round_trip():
    _, sig, _ = instance("theta", 2)
    state = EmbeddingState(sig)
    back = state_from_json(state_to_json(state))
    assert back.curve.to_json() == state.curve.to_json()
    with pytest.raises(ValueError):
        state_from_json({**state_to_json(state), "version": 7})


@settings(max_examples=6, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(1, 2), st.integers(0, 1000))
def test_resolution_invariants_on_random_graphs(gen, seed):
    g = random_graph(gen, 3, seed, lengths=(1, 2))
    params = synthesize_parameters(g, seed=seed)
    sig, _ = construct_curve(params)
    final, reps = resolve_to_smooth(EmbeddingState(sig))
    assert all(r.decreased and r.support_smooth and r.faithfulness == "fully_faithful" for r in reps)
    assert not any(n_profile(final).values())
