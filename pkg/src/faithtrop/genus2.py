"""Worked genus-2 example: two loops glued at one point, embedded in TP^3."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .divisor import Divisor, solve_poisson
from .embedding import (
    TP,
    Branch,
    EmbeddedTropicalCurve,
    ExtendedSkeleton,
    Ray,
    RayBundle,
    Segment,
    check_balancing,
    check_injectivity,
    classify_faithfulness,
    materialize,
    outgoing_directions,
)
from .lattice import is_saturated, rank
from .metric_graph import GraphPoint, build_graph
from .rational import q
from .resolution import EmbeddingState, n_profile

ALPHA = [f"alpha{i}" for i in range(1, 6)]
BETA = [f"beta{i}" for i in range(1, 6)]
GAMMA = [f"gamma{i}" for i in range(1, 5)]
DELTA = [f"delta{i}" for i in range(1, 5)]

# coefficient vectors of the lifted points over each marked point, for the
# divisors as tabulated (before the sign flip applied below)
LIFTS: dict[str, list[tuple[int, int, int]]] = {
    "alpha1": [(1, 1, 1)],
    "alpha2": [(1, 1, 1), (-1, 0, 0), (0, -1, 0)],
    "alpha3": [(-1, 0, 0), (0, -1, 0)],
    "alpha4": [(-1, 0, 0), (0, -1, 0), (0, 0, -1)],
    "alpha5": [(0, 0, -1)],
    "beta1": [(0, -1, 0)],
    "beta2": [(1, 1, 1), (0, -1, 0), (0, 0, -1)],
    "beta3": [(1, 1, 1), (0, 0, -1)],
    "beta4": [(1, 1, 1), (-1, 0, 0), (0, 0, -1)],
    "beta5": [(-1, 0, 0)],
    "gamma1": [(0, -1, 0)],
    "gamma2": [(1, 1, 1), (-1, 0, 0), (0, 0, -1)],
    "gamma3": [(1, 1, 1), (-1, 0, 0), (0, 0, -1)],
    "gamma4": [(0, -1, 0)],
    "delta1": [(0, 0, -1)],
    "delta2": [(1, 1, 1), (-1, 0, 0), (0, -1, 0)],
    "delta3": [(1, 1, 1), (-1, 0, 0), (0, -1, 0)],
    "delta4": [(0, 0, -1)],
}

HEXAGON_ALPHA = {
    "omega": (0, 0, 0),
    "alpha1": (0, 0, 1),
    "alpha2": (-1, -1, 1),
    "alpha3": (-2, -2, 0),
    "alpha4": (-2, -2, -1),
    "alpha5": (-1, -1, -1),
}
HEXAGON_BETA = {
    "omega": (0, 0, 0),
    "beta1": (1, 0, 0),
    "beta2": (2, 1, 0),
    "beta3": (2, 2, 0),
    "beta4": (1, 2, 0),
    "beta5": (0, 1, 0),
}


def table2_divisors() -> list[dict[str, int]]:
    """The three divisors on the two-loop graph, in the tabulated sign convention."""
    return [
        {"alpha1": 1, "alpha3": -1, "alpha4": -1, "beta2": 1, "beta3": 1, "beta5": -1},
        {"alpha1": 1, "alpha3": -1, "alpha4": -1, "beta1": -1, "beta3": 1, "beta4": 1,
         "gamma1": -1, "gamma2": 1, "gamma3": 1, "gamma4": -1},
        {"alpha1": 1, "alpha2": 1, "alpha4": -1, "alpha5": -1,
         "delta1": -1, "delta2": 1, "delta3": 1, "delta4": -1},
    ]


def default_stems(spacing: Fraction) -> dict[str, Fraction]:
    st = {x: spacing for x, lifts in LIFTS.items() if len(lifts) > 1}
    st.update(delta2=spacing * Fraction(11, 10), gamma3=spacing * Fraction(11, 10))
    return st


@dataclass
class Genus2Config:
    """Spacing between consecutive marked loop points, gap between the inner
    gamma/delta points, and stem lengths at points with several lifts.

    With rays pointing along minus the lift coefficients, the stem at gamma3
    must be longer than at gamma2 (its -z ray would otherwise hit the gamma2
    stem), and the stem at delta2 longer than at delta3 (so the (1,1,1) ray
    of delta2 clears the delta3 stem for every gap).
    """

    spacing: Fraction = Fraction(1)
    gap: Fraction = Fraction(1, 5)
    stems: dict[str, Fraction] | None = None
    nudge_tries: int = 20

    def __post_init__(self):
        self.spacing = q(self.spacing)
        self.gap = q(self.gap)
        stems = default_stems(self.spacing)
        stems.update({k: q(v) for k, v in (self.stems or {}).items()})
        self.stems = stems
        self.validate()

    def validate(self) -> None:
        if self.spacing <= 0 or self.gap <= 0:
            raise ValueError("spacing and gap must be positive")
        if 3 * self.gap >= self.spacing:
            raise ValueError("gap too large: the four inner points must fit inside one segment")
        unknown = sorted(set(self.stems) - {x for x, lifts in LIFTS.items() if len(lifts) > 1})
        if unknown:
            raise ValueError(f"stem lengths given for points with a single lift: {unknown}")
        bad = [k for k, v in self.stems.items() if v <= 0]
        if bad:
            raise ValueError(f"non-positive stem lengths: {bad}")
        s = self.stems
        if not s["delta3"] < s["delta2"]:
            raise ValueError("need stem(delta3) < stem(delta2)")
        if not s["gamma2"] < s["gamma3"]:
            raise ValueError("need stem(gamma2) < stem(gamma3)")


def genus2_graph(cfg: Genus2Config):
    h, g = cfg.spacing, cfg.gap
    mid = h / 2
    inner = [mid - 3 * g / 2, mid - g / 2, mid + g / 2, mid + 3 * g / 2]

    def loop(prefix, order, inner_after, inner_names):
        # order: marked points after omega; the inner points go after position inner_after
        pts, pos = [], []
        for i, name in enumerate(order):
            pos.append(h * (i + 1))
            pts.append(name)
        loop_pts = [("omega", Fraction(0))] + list(zip(pts, pos))
        base = loop_pts[inner_after][1]
        loop_pts[inner_after + 1 : inner_after + 1] = [(n, base + t) for n, t in zip(inner_names, inner)]
        loop_pts.append(("omega", h * (len(order) + 1)))
        return [(f"{prefix}{i}", a, b, tb - ta) for i, ((a, ta), (b, tb)) in enumerate(zip(loop_pts, loop_pts[1:]))]

    edges = loop("A", ALPHA, 0, GAMMA) + loop("B", BETA, 1, DELTA)
    verts = ["omega"] + ALPHA + BETA + GAMMA + DELTA
    return build_graph(verts, edges)


def genus2_preset(cfg: Genus2Config | None = None) -> EmbeddingState:
    cfg = cfg or Genus2Config()
    g = genus2_graph(cfg)
    Fs = []
    for tab in table2_divisors():
        D = Divisor({g.vertex_point(v): -c for v, c in tab.items()})
        F = solve_poisson(g, D)
        if not F.integral:
            raise ValueError("tabulated divisor is not principal")
        Fs.append(F.shift(-F.vertex_value("omega")))
    stems = dict(cfg.stems)
    for attempt in range(cfg.nudge_tries + 1):
        bundles = {}
        for x, lifts in LIFTS.items():
            br = [Branch(f"{x}.{j}", tuple(-c for c in v)) for j, v in enumerate(lifts)]
            bundles[g.vertex_point(x)] = RayBundle(br, stems.get(x, Fraction(0)) if len(lifts) > 1 else Fraction(0))
        state = EmbeddingState(materialize(ExtendedSkeleton(g, bundles), Fs))
        if not check_injectivity(state.curve):
            return state
        # distinct small nudges; delta2 and gamma3 get the largest so both orderings survive
        order = sorted(stems, key=lambda x: (x in ("delta2", "gamma3"), x))
        stems = {x: stems[x] + cfg.spacing * Fraction(j + 1, 997 * (attempt + 1)) for j, x in enumerate(order)}
    return state


def _point(state: EmbeddingState, v: str):
    return tuple(F.vertex_value(v) for F in state.sigma.coords)


def _on_loop(state: EmbeddingState, prefix: str) -> list[str]:
    g = state.sigma.graph
    return sorted({x for e in g.edges if e.id.startswith(prefix) for x in (e.u, e.v)})


def _between(state: EmbeddingState, names: list[str]) -> set[str]:
    """Vertices of the refined graph lying in the closed stretch first..last of ``names``."""
    g = state.sigma.graph
    lo, hi = names[0], names[-1]
    out = {lo}
    frontier = [lo]
    while frontier:
        x = frontier.pop()
        for e in g.incident(x):
            y = e.other(x)
            if y in out or e.id.startswith("E:"):
                continue
            if x == hi:
                continue
            # stay on the arc from lo that reaches hi without passing a named loop point
            if y in ALPHA + BETA + ["omega"]:
                continue
            out.add(y)
            frontier.append(y)
    return out


@dataclass
class Genus2Report:
    checks: dict[str, bool]
    details: dict[str, object]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": self.checks, "details": self.details}


def verify_genus2(state: EmbeddingState, expect_hexagon: bool = True) -> Genus2Report:
    curve = state.curve
    checks, details = {}, {}
    F1, F2, F3 = (F for F in state.sigma.coords)

    bump_a = _between(state, GAMMA)
    bump_b = _between(state, DELTA)
    alpha_pts = [v for v in _on_loop(state, "A") if v not in bump_a]
    beta_pts = [v for v in _on_loop(state, "B") if v not in bump_b]
    checks["alpha_in_plane_x_eq_y"] = all(F1.vertex_value(v) == F2.vertex_value(v) for v in alpha_pts)
    checks["beta_in_plane_z_eq_0"] = all(F3.vertex_value(v) == 0 for v in beta_pts)

    if expect_hexagon:
        got_a = {v: tuple(int(c) for c in _point(state, v)) for v in HEXAGON_ALPHA}
        got_b = {v: tuple(int(c) for c in _point(state, v)) for v in HEXAGON_BETA}
        checks["alpha_hexagon"] = got_a == HEXAGON_ALPHA
        checks["beta_hexagon"] = got_b == HEXAGON_BETA
        details["alpha_hexagon"] = got_a

    coll = check_injectivity(curve)
    checks["injective"] = not coll
    details["collisions"] = [(c.first, c.second) for c in coll]

    prof = n_profile(curve)
    checks["smooth"] = all(n == 0 for n in prof.values())
    details["nonsmooth"] = {k: v for k, v in prof.items() if v}

    dirs = outgoing_directions(curve)
    a1 = [d for d, _ in dirs["alpha1"]]
    checks["lattice_alpha1_x_eq_y"] = all(d[0] == d[1] for d in a1) and rank(a1) == 2 and is_saturated(a1)
    om = [d for d, _ in dirs["omega"]]
    checks["lattice_omega_Z3"] = rank(om) == 3 and is_saturated(om)

    checks["unit_weights"] = all(s.weight == 1 for s in curve.segments) and all(r.weight == 1 for r in curve.rays)
    checks["balanced"] = check_balancing(curve)
    cls = classify_faithfulness(curve, TP)
    details["faithfulness_tp3"] = cls
    checks["fully_faithful_tp3"] = cls == "fully_faithful"
    details["ray_directions"] = sorted({r.direction for r in curve.rays})
    return Genus2Report(checks, details)


def wagner_fixture() -> EmbeddedTropicalCurve:
    """Two plane squares through the origin with naive rays; one crossing at (-2,-2)."""
    P = {
        "w": (0, 0), "A1": (0, 1), "A2": (-1, 1), "A3": (-1, 0),
        "B1": (1, 0), "B2": (1, -1), "B3": (0, -1),
        "S1": (-2, -1), "S2": (-1, -2), "S3": (-2, 2), "S4": (2, -2),
    }
    P = {k: tuple(Fraction(c) for c in v) for k, v in P.items()}
    edges = [
        ("w", "A1"), ("A1", "A2"), ("A2", "A3"), ("A3", "w"),
        ("w", "B1"), ("B1", "B2"), ("B2", "B3"), ("B3", "w"),
        ("A3", "S1"), ("B3", "S2"), ("A2", "S3"), ("B2", "S4"),
    ]
    rays = [
        ("A1", (1, 1)), ("B1", (1, 1)),
        ("S1", (-1, 0)), ("S1", (0, -1)), ("S2", (-1, 0)), ("S2", (0, -1)),
        ("S3", (-1, 0)), ("S3", (0, 1)), ("S4", (1, 0)), ("S4", (0, -1)),
    ]
    segs = [Segment(P[a], P[b], 1, (a, b), f"{a}-{b}") for a, b in edges]
    rs = [Ray(P[v], d, 1, v, f"{v}:{d[0]},{d[1]}") for v, d in rays]
    return EmbeddedTropicalCurve(2, segs, rs, dict(P))
