"""Non-smoothness invariant and the coordinate-appending resolution step."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .divisor import Divisor, PLFunction, divisor_of, solve_poisson
from .embedding import (
    P1,
    EmbeddedTropicalCurve,
    Sigma,
    SigmaRay,
    classify_faithfulness,
    curve_of,
    outgoing_directions,
)
from .lattice import max_saturated_rank_subset, maximal_saturated_subset, primitive_part
from .metric_graph import GraphPoint, MetricGraph, spanning_tree


@dataclass
class EmbeddingState:
    """Rayed graph plus coordinates, kept refined so curve nodes are graph vertices."""

    sigma: Sigma
    curve: EmbeddedTropicalCurve = field(init=False)

    def __post_init__(self):
        self.sigma = self.sigma.refined()
        self.sigma.check_consistency()
        self.curve = curve_of(self.sigma)

    @property
    def dim(self) -> int:
        return self.sigma.dim


def local_nonsmoothness(state: EmbeddingState | EmbeddedTropicalCurve, x: str) -> int:
    curve = state.curve if isinstance(state, EmbeddingState) else state
    dirs = outgoing_directions(curve).get(x)
    if dirs is None:
        raise ValueError(f"{x!r} is not a finite vertex of the image")
    vs = [d for d, _ in dirs]
    return len(vs) - 1 - max_saturated_rank_subset(vs)


def n_profile(state: EmbeddingState | EmbeddedTropicalCurve) -> dict[str, int]:
    curve = state.curve if isinstance(state, EmbeddingState) else state
    return {x: len(d) - 1 - max_saturated_rank_subset([v for v, _ in d]) for x, d in sorted(outgoing_directions(curve).items())}


@dataclass
class StepReport:
    dim_before: int
    dim_after: int
    before: dict[str, int]
    after: dict[str, int]
    choices: dict[str, tuple[str, str]]
    support: list[str]
    faithfulness: str

    @property
    def decreased(self) -> bool:
        return all(self.after[z] <= max(n - 1, 0) for z, n in self.before.items())

    @property
    def support_smooth(self) -> bool:
        return all(self.after[x] == 0 for x in self.support)

    def to_json(self) -> dict:
        nonzero = lambda prof: {k: v for k, v in prof.items() if v}
        return {
            "dim_before": self.dim_before,
            "dim_after": self.dim_after,
            "n_before": nonzero(self.before),
            "n_after": nonzero(self.after),
            "max_before": max(self.before.values(), default=0),
            "max_after": max(self.after.values(), default=0),
            "decreased": self.decreased,
            "support_smooth": self.support_smooth,
            "faithfulness": self.faithfulness,
        }


def _edge_direction(sig: Sigma, eid: str, z: str) -> tuple[int, ...]:
    e = sig.graph.edge(eid)
    sl = [F.slopes(eid)[0][2] for F in sig.coords]
    if e.u != z:
        sl = [-x for x in sl]
    return primitive_part([int(x) for x in sl])


def resolution_step(state: EmbeddingState, tag: str = "r") -> tuple[EmbeddingState, StepReport]:
    """Append one coordinate that lowers n by at least one at every non-smooth vertex."""
    before = n_profile(state)
    bad = [z for z, n in before.items() if n > 0]
    if not bad:
        return state, StepReport(state.dim, state.dim, before, before, {}, [], classify_faithfulness(state.curve, P1))
    sig = state.sigma
    k = sig.dim

    # pick e(z)_1 and e(z)_0 outside a maximal saturated family; edges before rays
    picks: dict[str, list[tuple[str, object]]] = {}
    for z in bad:
        pieces = [("edge", e.id, _edge_direction(sig, e.id, z)) for e in sig.graph.incident(z) if e.u != e.v]
        pieces += [("ray", i, primitive_part([-c for c in r.coeffs])) for i, r in enumerate(sig.rays) if r.vertex == z]
        S = set(maximal_saturated_subset([d for _, _, d in pieces]))
        rest = [p for i, p in enumerate(pieces) if i not in S]
        assert len(rest) >= 2, f"too few free directions at {z}"
        picks[z] = [(kind, ident) for kind, ident, _ in rest[:2]]

    # rays that were picked become unit stems
    for z in bad:
        for j, (kind, ident) in enumerate(picks[z]):
            if kind == "ray":
                sig, eid, _ = sig.stemify([ident], 1, name=f"{tag}.stem:{sig.rays[ident].label}")
                picks[z][j] = ("edge", eid)

    cuts: dict[str, list[tuple[Fraction, int, str]]] = {}
    choices = {}
    for z in bad:
        (_, e1), (_, e0) = picks[z]
        choices[z] = (e1, e0)
        for eid, signs in ((e1, (-1, -1, 1)), (e0, (1, 1, -1))):
            e = sig.graph.edge(eid)
            t = e.length / 12
            for m, sgn in zip((1, 2, 3), signs):
                off = m * t if e.u == z else e.length - m * t
                cuts.setdefault(eid, []).append((off, sgn, z))
    _, comp = spanning_tree(sig.graph)
    for eid in comp:
        ln = sig.graph.edge(eid).length
        for off, sgn in ((ln / 3, 1), (5 * ln / 12, -1), (7 * ln / 12, -1), (2 * ln / 3, 1)):
            cuts.setdefault(eid, []).append((off, sgn, "P"))

    D = {}
    labels = {}
    n = 0
    for eid in sorted(cuts):
        pts = sorted(cuts[eid])
        names = [f"{tag}.{n + i}" for i in range(len(pts))]
        n += len(pts)
        sig, vs = sig.split(eid, [o for o, _, _ in pts], names)
        for v, (_, sgn, owner) in zip(vs, pts):
            D[GraphPoint(vertex=v)] = sgn
            labels[v] = owner
    D = Divisor(D)
    F = solve_poisson(sig.graph, D)
    if not F.integral or divisor_of(F) != D:
        raise AssertionError("bump divisor is not principal")
    rays = [SigmaRay(r.vertex, r.coeffs + (0,), r.label) for r in sig.rays]
    rays += [
        SigmaRay(p.vertex, (0,) * k + (c,), f"{tag}:{labels[p.vertex]}:{p.vertex}")
        for p, c in D.items()
    ]
    new = EmbeddingState(Sigma(sig.graph, rays, list(sig.coords) + [F]))
    after = n_profile(new)
    rep = StepReport(k, k + 1, before, after, choices, [p.vertex for p in D.support()], classify_faithfulness(new.curve, P1))
    return new, rep


def resolve_to_smooth(state: EmbeddingState, max_steps: int = 64) -> tuple[EmbeddingState, list[StepReport]]:
    reports = []
    for i in range(max_steps):
        if not any(n_profile(state).values()):
            return state, reports
        state, rep = resolution_step(state, tag=f"r{i + 1}")
        reports.append(rep)
    raise RuntimeError("resolution did not terminate")


STATE_VERSION = 1


def state_to_json(state: EmbeddingState) -> dict:
    sig = state.sigma
    return {
        "version": STATE_VERSION,
        "kind": "state",
        "graph": sig.graph.to_json(),
        "rays": [{"vertex": r.vertex, "coeffs": list(r.coeffs), "label": r.label} for r in sig.rays],
        "coords": [F.to_json() for F in sig.coords],
        "curve": state.curve.to_json(),
    }


def state_from_json(data: dict) -> EmbeddingState:
    if data.get("kind") != "state":
        raise ValueError("not an embedding state file")
    if data.get("version") != STATE_VERSION:
        raise ValueError(f"unsupported state schema version {data.get('version')!r}")
    g = MetricGraph.from_json(data["graph"])
    rays = [SigmaRay(r["vertex"], tuple(int(c) for c in r["coeffs"]), r["label"]) for r in data["rays"]]
    coords = [PLFunction.from_json(g, F) for F in data["coords"]]
    return EmbeddingState(Sigma(g, rays, coords))
