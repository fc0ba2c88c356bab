from fractions import Fraction as Q

import pytest

from faithtrop.divisor import Divisor, is_principal
from faithtrop.embedding import TP, boundary_limit, check_balancing, check_injectivity
from faithtrop.genus2 import (
    LIFTS,
    Genus2Config,
    genus2_graph,
    genus2_preset,
    table2_divisors,
    verify_genus2,
)


@pytest.fixture(scope="module")
def state():
    return genus2_preset()


def test_table_divisors_literal():
    D1, D2, D3 = table2_divisors()
    assert D1 == {"alpha1": 1, "alpha3": -1, "alpha4": -1, "beta2": 1, "beta3": 1, "beta5": -1}
    assert {k: D2[k] for k in ("gamma1", "gamma2", "gamma3", "gamma4")} == {"gamma1": -1, "gamma2": 1, "gamma3": 1, "gamma4": -1}


def test_table_divisors_principal():
    g = genus2_graph(Genus2Config())
    for tab in table2_divisors():
        assert is_principal(g, Divisor({g.vertex_point(v): c for v, c in tab.items()}))


def test_lifts_sum_to_divisor_coefficients():
    tabs = table2_divisors()
    for x, lifts in LIFTS.items():
        tot = tuple(sum(c) for c in zip(*lifts))
        assert tot == tuple(t.get(x, 0) for t in tabs)


def test_preset_report_all_pass(state):
    rep = verify_genus2(state)
    assert rep.ok, rep.checks
    assert rep.details["alpha_hexagon"]["alpha3"] == (-2, -2, 0)


def test_ray_directions_are_the_four_primitives(state):
    assert {r.direction for r in state.curve.rays} == {(1, 1, 1), (-1, 0, 0), (0, -1, 0), (0, 0, -1)}


def test_tp3_limits_pairwise_distinct(state):
    lims = [boundary_limit(r, TP) for r in state.curve.rays]
    assert len(set(lims)) == len(lims)


def test_stem_points_balanced(state):
    assert check_balancing(state.curve)
    stems = [s for s in state.curve.segments if s.edge.startswith("E:stem")]
    assert len(stems) == sum(1 for lifts in LIFTS.values() if len(lifts) > 1)


@pytest.mark.parametrize("factor", [1, Q(1, 2), Q(1, 4)])
def test_shrinking_gap_keeps_injectivity(factor):
    cfg = Genus2Config(gap=Q(1, 5) * factor, nudge_tries=0)
    assert check_injectivity(genus2_preset(cfg).curve) == []


def test_config_validation():
    with pytest.raises(ValueError):
        Genus2Config(gap=Q(1, 2))
    with pytest.raises(ValueError):
        Genus2Config(stems={"gamma3": Q(1, 2)})
    with pytest.raises(ValueError):
        Genus2Config(stems={"alpha1": 1})
    with pytest.raises(ValueError):
        Genus2Config(spacing=0)


def test_short_stems_are_reported_not_hidden():
    rep = verify_genus2(genus2_preset(Genus2Config(stems={"gamma2": Q(1, 5), "gamma3": Q(2, 5)}, nudge_tries=2)))
    assert not rep.checks["injective"] and not rep.ok
