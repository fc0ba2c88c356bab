"""Extended skeleta, their tropical images, and faithfulness checks."""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd, inf
from typing import Sequence

import numpy as np

from .divisor import Divisor, PLFunction, divisor_of
from .lattice import primitive_part
from .metric_graph import Edge, GraphPoint, MetricGraph, add_leaf, split_edge
from .rational import q, qstr

SCHEMA_VERSION = 1
P1 = "p1cube"
TP = "tp"


# ---------------------------------------------------------------- skeleta


@dataclass(frozen=True)
class Branch:
    label: str
    coeffs: tuple[int, ...]


@dataclass
class RayBundle:
    branches: list[Branch]
    stem: Fraction = Fraction(0)

    @property
    def total(self) -> tuple[int, ...]:
        return tuple(sum(c) for c in zip(*(b.coeffs for b in self.branches)))


@dataclass
class ExtendedSkeleton:
    """A metric graph with bundles of infinite rays at finitely many points.

    Each branch records the divisor coefficients of the lifted point it runs
    to; along the branch coordinate i has slope minus that coefficient.
    """

    base: MetricGraph
    bundles: dict[GraphPoint, RayBundle]
    names: dict[GraphPoint, str] = field(default_factory=dict)


@dataclass(frozen=True)
class SigmaRay:
    vertex: str
    coeffs: tuple[int, ...]
    label: str


@dataclass
class Sigma:
    """Finite part of an extended skeleton as a graph, rays at its vertices,
    and the coordinate functions on the finite part."""

    graph: MetricGraph
    rays: list[SigmaRay]
    coords: list[PLFunction]

    @property
    def dim(self) -> int:
        return len(self.coords)

    def check_consistency(self) -> None:
        """div(F_i) on the finite part must equal the ray coefficients at each vertex."""
        expect = [dict() for _ in self.coords]
        for r in self.rays:
            for i, c in enumerate(r.coeffs):
                p = GraphPoint(vertex=r.vertex)
                expect[i][p] = expect[i].get(p, 0) + c
        for i, F in enumerate(self.coords):
            if divisor_of(F) != Divisor(expect[i]):
                diff = divisor_of(F) - Divisor(expect[i])
                raise ValueError(f"coefficient mismatch in coordinate {i + 1}: {diff!r}")

    def split(self, eid: str, offsets, names=None) -> tuple["Sigma", list[str]]:
        offsets = sorted(set(q(t) for t in offsets))
        if not offsets:
            return self, []
        e = self.graph.edge(eid)
        h, new_vs, pieces = split_edge(self.graph, eid, offsets, names)
        cuts = [Fraction(0)] + offsets + [e.length]
        coords = []
        for F in self.coords:
            pc = {k: v for k, v in F.pieces.items() if k != eid}
            for pid, lo, hi in zip(pieces, cuts, cuts[1:]):
                bp = [(lo, F.on_edge(eid, lo))] + [(t, v) for t, v in F.pieces[eid] if lo < t < hi] + [(hi, F.on_edge(eid, hi))]
                pc[pid] = tuple((t - lo, v) for t, v in bp)
            coords.append(PLFunction(h, pc))
        return Sigma(h, list(self.rays), coords), new_vs

    def refined(self) -> "Sigma":
        """Subdivide until every breakpoint of every coordinate is a vertex."""
        sig = self
        for e in list(self.graph.edges):
            ts = sorted({t for F in self.coords for t, _ in F.pieces[e.id][1:-1]})
            sig, _ = sig.split(e.id, ts)
        return sig

    def stemify(self, ray_indices, length, name: str | None = None) -> tuple["Sigma", str, str]:
        """Turn the first ``length`` of some rays sharing a vertex into one finite edge.

        Returns the new sigma, the new edge id and the tip vertex.
        """
        if isinstance(ray_indices, int):
            ray_indices = [ray_indices]
        rays = list(self.rays)
        v = rays[ray_indices[0]].vertex
        if any(rays[i].vertex != v for i in ray_indices):
            raise ValueError("stem rays must share a vertex")
        name = name or f"stem:{rays[ray_indices[0]].label}"
        length = q(length)
        h, tip, eid = add_leaf(self.graph, v, length, leaf=name, eid=f"E:{name}")
        tot = [sum(rays[i].coeffs[n] for i in ray_indices) for n in range(self.dim)]
        coords = []
        for F, c in zip(self.coords, tot):
            base = F.vertex_value(v)
            pc = dict(F.pieces)
            pc[eid] = ((Fraction(0), base), (length, base - c * length))
            coords.append(PLFunction(h, pc))
        for i in ray_indices:
            rays[i] = SigmaRay(tip, rays[i].coeffs, rays[i].label)
        return Sigma(h, rays, coords), eid, tip


def materialize(sk: ExtendedSkeleton, Fs: Sequence[PLFunction]) -> Sigma:
    g = sk.base
    sig = Sigma(g, [], list(Fs))
    where: dict[GraphPoint, str] = {}
    by_edge: dict[str, list[GraphPoint]] = {}
    for p in sk.bundles:
        if p.is_vertex:
            where[p] = p.vertex
        else:
            by_edge.setdefault(p.edge, []).append(p)
    for eid, pts in sorted(by_edge.items()):
        pts.sort(key=lambda p: p.offset)
        names = [sk.names.get(p, f"{eid}@{qstr(p.offset)}") for p in pts]
        sig, new_vs = sig.split(eid, [p.offset for p in pts], names)
        where.update(zip(pts, new_vs))
    rays = []
    for p in sorted(sk.bundles):
        b = sk.bundles[p]
        for br in b.branches:
            if len(br.coeffs) != len(Fs):
                raise ValueError(f"branch {br.label} has {len(br.coeffs)} coefficients for {len(Fs)} functions")
            rays.append(SigmaRay(where[p], tuple(br.coeffs), br.label))
    sig = Sigma(sig.graph, rays, sig.coords)
    for p in sorted(sk.bundles):
        b = sk.bundles[p]
        if b.stem > 0 and b.branches:
            labels = {x.label for x in b.branches}
            idx = [i for i, r in enumerate(sig.rays) if r.vertex == where[p] and r.label in labels]
            sig, _, _ = sig.stemify(idx, b.stem, name=f"stem:{sk.names.get(p, where[p])}")
    sig.check_consistency()
    return sig


# ---------------------------------------------------------------- curves


Point = tuple[Fraction, ...]


@dataclass(frozen=True)
class Segment:
    start: Point
    end: Point
    weight: int
    nodes: tuple[str, str]
    edge: str = ""


@dataclass(frozen=True)
class Ray:
    base: Point
    direction: tuple[int, ...]
    weight: int
    node: str
    label: str = ""


@dataclass
class EmbeddedTropicalCurve:
    dim: int
    segments: list[Segment]
    rays: list[Ray]
    node_points: dict[str, Point] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "dim": self.dim,
            "segments": [
                {"from": _pt(s.start), "to": _pt(s.end), "weight": s.weight, "nodes": list(s.nodes), "edge": s.edge}
                for s in self.segments
            ],
            "rays": [
                {
                    "base": _pt(r.base),
                    "dir": list(r.direction),
                    "weight": r.weight,
                    "node": r.node,
                    "label": r.label,
                    "limit_p1": boundary_limit(r, P1).to_json(),
                    "limit_tp": boundary_limit(r, TP).to_json(),
                }
                for r in self.rays
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "EmbeddedTropicalCurve":
        if data.get("version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported embedding schema version {data.get('version')!r}")
        k = int(data["dim"])
        segs = [
            Segment(tuple(map(q, s["from"])), tuple(map(q, s["to"])), int(s["weight"]), tuple(s["nodes"]), s.get("edge", ""))
            for s in data["segments"]
        ]
        rays = [Ray(tuple(map(q, r["base"])), tuple(int(x) for x in r["dir"]), int(r.get("weight", 1)), r["node"], r.get("label", "")) for r in data["rays"]]
        for item in segs + rays:
            pts = [item.start, item.end] if isinstance(item, Segment) else [item.base]
            if any(len(p) != k for p in pts):
                raise ValueError("point of wrong dimension")
        nodes = {}
        for s in segs:
            nodes[s.nodes[0]] = s.start
            nodes[s.nodes[1]] = s.end
        for r in rays:
            nodes[r.node] = r.base
        return cls(k, segs, rays, nodes)


def _pt(p: Point) -> list[str]:
    return [qstr(x) for x in p]


def stretching_factor(slopes: Sequence[int]) -> int:
    """gcd of the coordinate slopes along an edge."""
    g = reduce(gcd, (abs(int(s)) for s in slopes), 0)
    if g == 0:
        raise ValueError("collapsed edge")
    return g


def curve_of(sig: Sigma) -> EmbeddedTropicalCurve:
    sig = sig.refined()
    g = sig.graph
    pts = {v: tuple(F.vertex_value(v) for F in sig.coords) for v in g.vertices}
    segs = []
    for e in g.edges:
        slopes = [F.slopes(e.id)[0][2] for F in sig.coords]
        if any(s.denominator != 1 for s in slopes):
            raise ValueError(f"non-integral slope on {e.id}")
        w = stretching_factor([int(s) for s in slopes])
        segs.append(Segment(pts[e.u], pts[e.v], w, (e.u, e.v), e.id))
    rays = []
    for r in sig.rays:
        d = tuple(-c for c in r.coeffs)
        w = stretching_factor(d)
        rays.append(Ray(pts[r.vertex], tuple(x // w for x in d), w, r.vertex, r.label))
    used = {v for s in segs for v in s.nodes} | {r.node for r in rays}
    return EmbeddedTropicalCurve(sig.dim, segs, rays, {v: pts[v] for v in used})


def tropicalize(sk: ExtendedSkeleton, Fs: Sequence[PLFunction]) -> EmbeddedTropicalCurve:
    return curve_of(materialize(sk, Fs))


# ---------------------------------------------------------------- boundary


@dataclass(frozen=True)
class BoundaryPoint:
    """Limit of a ray in (TP^1)^k or TP^k.

    For TP^k ``coords`` has k+1 homogeneous entries (the last one is the
    appended coordinate); ``-inf`` marks coordinates that leave, and points
    are equal up to adding a constant to all finite entries.
    """

    kind: str
    coords: tuple

    def key(self):
        if self.kind == P1:
            return self.coords
        finite = [c for c in self.coords if c != -inf]
        c0 = finite[0]
        return tuple(c if c == -inf else c - c0 for c in self.coords)

    def __eq__(self, other):
        return isinstance(other, BoundaryPoint) and self.kind == other.kind and self.key() == other.key()

    def __hash__(self):
        return hash((self.kind, self.key()))

    def to_json(self) -> list[str]:
        return ["inf" if c == inf else "-inf" if c == -inf else qstr(c) for c in self.coords]

    def __repr__(self):
        inner = ", ".join("∞" if c == inf else "-∞" if c == -inf else qstr(c) for c in self.coords)
        return f"[{inner}]" if self.kind == TP else f"({inner})"


def boundary_limit(ray: Ray, compactification: str) -> BoundaryPoint:
    d = ray.direction
    if not any(d):
        raise ValueError("zero direction")
    if compactification == P1:
        return BoundaryPoint(P1, tuple(b if x == 0 else (inf if x > 0 else -inf) for b, x in zip(ray.base, d)))
    if compactification == TP:
        dd = list(d) + [0]
        bb = list(ray.base) + [Fraction(0)]
        m = max(dd)
        return BoundaryPoint(TP, tuple(b if x == m else -inf for b, x in zip(bb, dd)))
    raise ValueError(f"unknown compactification {compactification!r}")


def limit_collisions(c: EmbeddedTropicalCurve, compactification: str) -> list[tuple[int, int]]:
    """Pairs of ray indices with equal boundary limits."""
    groups: dict[BoundaryPoint, list[int]] = {}
    for i, r in enumerate(c.rays):
        groups.setdefault(boundary_limit(r, compactification), []).append(i)
    return [(a, b) for idx in groups.values() for n, a in enumerate(idx) for b in idx[n + 1 :]]


# ---------------------------------------------------------------- injectivity


@dataclass(frozen=True)
class Collision:
    first: str
    second: str
    point: Point | None
    overlap: bool = False


def _pieces(c: EmbeddedTropicalCurve):
    out = []
    for i, s in enumerate(c.segments):
        u = tuple(b - a for a, b in zip(s.start, s.end))
        out.append((s.start, u, Fraction(1), set(s.nodes), f"seg:{s.edge or i}"))
    for i, r in enumerate(c.rays):
        out.append((r.base, tuple(Fraction(x) for x in r.direction), None, {r.node}, f"ray:{r.label or i}"))
    return out


def _boxes(pieces, k):
    lo = np.empty((len(pieces), k))
    hi = np.empty((len(pieces), k))
    for n, (A, u, tmax, _, _) in enumerate(pieces):
        a = np.array([float(x) for x in A])
        du = np.array([float(x) for x in u])
        if tmax is None:
            lo[n] = np.where(du < 0, -np.inf, a)
            hi[n] = np.where(du > 0, np.inf, a)
        else:
            b = a + du
            lo[n] = np.minimum(a, b)
            hi[n] = np.maximum(a, b)
    pad = 1e-7 * (1.0 + np.abs(np.nan_to_num(lo, posinf=0, neginf=0)) + np.abs(np.nan_to_num(hi, posinf=0, neginf=0)))
    return lo - pad, hi + pad


def candidate_pairs(pieces, k) -> list[tuple[int, int]]:
    """Float bounding-box prefilter (boxes padded, so it only over-reports)."""
    if not pieces:
        return []
    lo, hi = _boxes(pieces, k)
    n = len(pieces)
    out = []
    for i in range(n - 1):
        ok = np.all((lo[i] <= hi[i + 1 :]) & (lo[i + 1 :] <= hi[i]), axis=1)
        out.extend((i, i + 1 + j) for j in np.nonzero(ok)[0])
    return out


def _in(t, tmax) -> bool:
    return t >= 0 and (tmax is None or t <= tmax)


def intersect(p1, p2):
    """Exact intersection of two pieces: None, ("point", X) or ("overlap", X)."""
    A, u, t1, _, _ = p1
    B, w, t2, _, _ = p2
    k = len(A)
    BA = [b - a for a, b in zip(A, B)]
    # find a nonzero 2x2 minor of [u | w]
    for i in range(k):
        for j in range(i + 1, k):
            det = u[i] * w[j] - u[j] * w[i]
            if det:
                # t u - s w = BA
                t = (BA[i] * w[j] - BA[j] * w[i]) / det
                s = (u[j] * BA[i] - u[i] * BA[j]) / det
                if not (_in(t, t1) and _in(s, t2)):
                    return None
                X = tuple(a + t * x for a, x in zip(A, u))
                if any(X[m] != B[m] + s * w[m] for m in range(k)):
                    return None
                return ("point", X)
    # parallel: w = lam * u
    m = next(i for i in range(k) if u[i])
    lam = w[m] / u[m]
    t0 = BA[m] / u[m]
    if any(BA[i] != t0 * u[i] for i in range(k)):
        return None
    ends = [t0] + ([t0 + lam * t2] if t2 is not None else [])
    if t2 is None:
        lo2, hi2 = (t0, None) if lam > 0 else (None, t0)
    else:
        lo2, hi2 = min(ends), max(ends)
    lo1, hi1 = Fraction(0), t1
    lo = lo1 if lo2 is None else max(lo1, lo2)
    hi = hi1 if hi2 is None else (hi2 if hi1 is None else min(hi1, hi2))
    if hi is not None and lo > hi:
        return None
    X = tuple(a + lo * x for a, x in zip(A, u))
    if hi is not None and lo == hi:
        return ("point", X)
    return ("overlap", X)


def _check_pairs(args):
    pieces, pts, pairs = args
    out = []
    for i, j in pairs:
        res = intersect(pieces[i], pieces[j])
        if res is None:
            continue
        kind, X = res
        shared = pieces[i][3] & pieces[j][3]
        if kind == "point" and any(pts[n] == X for n in shared):
            continue
        out.append(Collision(pieces[i][4], pieces[j][4], X, kind == "overlap"))
    return out


def check_injectivity(c: EmbeddedTropicalCurve, jobs: int = 1, prefilter: bool = True) -> list[Collision]:
    """All crossings/overlaps between pieces, ignoring shared endpoints of adjacent pieces."""
    pieces = _pieces(c)
    pts = c.node_points or _node_points(c)
    if prefilter:
        pairs = candidate_pairs(pieces, c.dim)
    else:
        pairs = [(i, j) for i in range(len(pieces)) for j in range(i + 1, len(pieces))]
    if jobs <= 1 or len(pairs) < 2000:
        return _check_pairs((pieces, pts, pairs))
    chunks = [pairs[i::jobs] for i in range(jobs)]
    with ProcessPoolExecutor(jobs) as ex:
        res = list(ex.map(_check_pairs, [(pieces, pts, ch) for ch in chunks]))
    out = [x for r in res for x in r]
    return sorted(out, key=lambda x: (x.first, x.second))


def _node_points(c):
    nodes = {}
    for s in c.segments:
        nodes[s.nodes[0]] = s.start
        nodes[s.nodes[1]] = s.end
    for r in c.rays:
        nodes[r.node] = r.base
    return nodes


# ---------------------------------------------------------------- local structure


def outgoing_directions(c: EmbeddedTropicalCurve) -> dict[str, list[tuple[tuple[int, ...], int]]]:
    """Per node: (primitive outgoing direction, weight) of every incident piece."""
    out: dict[str, list] = {}
    for s in c.segments:
        diff = [b - a for a, b in zip(s.start, s.end)]
        den = reduce(lambda x, y: x * y // gcd(x, y), (d.denominator for d in diff), 1)
        prim = primitive_part([int(d * den) for d in diff])
        out.setdefault(s.nodes[0], []).append((prim, s.weight))
        out.setdefault(s.nodes[1], []).append((tuple(-x for x in prim), s.weight))
    for r in c.rays:
        out.setdefault(r.node, []).append((r.direction, r.weight))
    return out


def unbalanced_nodes(c: EmbeddedTropicalCurve) -> list[str]:
    bad = []
    for node, dirs in outgoing_directions(c).items():
        tot = [sum(w * d[i] for d, w in dirs) for i in range(c.dim)]
        if any(tot):
            bad.append(node)
    return bad


def check_balancing(c: EmbeddedTropicalCurve) -> bool:
    """Weighted primitive outgoing directions sum to zero at every finite node."""
    return not unbalanced_nodes(c)


def classify_faithfulness(c: EmbeddedTropicalCurve, compactification: str, jobs: int = 1) -> str:
    if check_injectivity(c, jobs=jobs) or any(s.weight != 1 for s in c.segments) or any(r.weight != 1 for r in c.rays):
        return "not_faithful"
    if limit_collisions(c, compactification):
        return "totally_faithful"
    return "fully_faithful"


# ---------------------------------------------------------------- the construction


def extended_skeleton(params, divisors=None) -> ExtendedSkeleton:
    """Ray bundles of the three-function construction, read off D1, D2, D3.

    Points whose coefficient vector vanishes (c_e, d_e on tree edges) carry
    no lifted point and get no ray.
    """
    from .construction import MARKS, target_divisors

    D = divisors or target_divisors(params, check=False)
    g = params.graph
    bundles, names = {}, {}
    for e in g.edges:
        for m in MARKS:
            p = params.point(e.id, m)
            co = tuple(Di[p] for Di in D)
            if any(co):
                bundles[p] = RayBundle([Branch(f"{m}:{e.id}", co)])
            names[p] = f"{m}:{e.id}"
    for v in g.vertices:
        p = g.vertex_point(v)
        co = tuple(Di[p] for Di in D)
        bundles[p] = RayBundle([Branch(f"vertex:{v}", co)])
    return ExtendedSkeleton(g, bundles, names)


def construct_curve(params) -> tuple[Sigma, EmbeddedTropicalCurve]:
    from .construction import build_coordinate_functions

    Fs = build_coordinate_functions(params)
    sig = materialize(extended_skeleton(params), Fs)
    return sig, curve_of(sig)
