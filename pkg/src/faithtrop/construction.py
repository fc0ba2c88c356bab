"""Parameter synthesis and verification, and the three coordinate functions.

Every edge carries marked points c < a < p < q < b < d, symmetric in pairs
about the midpoint.  Offsets are measured from the edge's low-r endpoint
``v(e)``; the high-r endpoint is ``w(e)``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd, lcm

from .divisor import Divisor, PLFunction, divisor_of, is_principal
from .metric_graph import (
    GraphPoint,
    MetricGraph,
    add_leaf,
    prepare_model,
    split_edge,
    vertex_distances,
)
from .rational import q, qstr

MARKS = ("c", "a", "p", "q", "b", "d")
MAX_PIECES = 5000


class ParameterError(ValueError):
    pass


@dataclass
class ParameterSet:
    graph: MetricGraph
    complement: tuple[str, ...]
    orient: dict[str, tuple[str, str]]
    offsets: dict[str, dict[str, Fraction]]
    r: dict[str, Fraction]
    s: dict[str, int] = field(default_factory=dict)
    leaf_root: str | None = None

    @property
    def tree(self) -> list[str]:
        comp = set(self.complement)
        return [e.id for e in self.graph.edges if e.id not in comp]

    def in_tree(self, eid: str) -> bool:
        return eid not in self.complement

    def phi_to_offset(self, eid: str, phi: Fraction) -> Fraction:
        e = self.graph.edge(eid)
        return phi if self.orient[eid][0] == e.u else e.length - phi

    def point(self, eid: str, mark: str) -> GraphPoint:
        return self.graph.point(eid, self.phi_to_offset(eid, self.offsets[eid][mark]))

    def spread(self) -> Fraction:
        return max(self.r.values()) - min(self.r.values())

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "complement": list(self.complement),
            "orient": {k: list(v) for k, v in sorted(self.orient.items())},
            "offsets": {k: {m: qstr(x) for m, x in v.items()} for k, v in sorted(self.offsets.items())},
            "r": {k: qstr(v) for k, v in sorted(self.r.items())},
            "s": dict(sorted(self.s.items())),
            "leaf_root": self.leaf_root,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ParameterSet":
        g = MetricGraph.from_json(data["graph"])
        return cls(
            graph=g,
            complement=tuple(data["complement"]),
            orient={k: tuple(v) for k, v in data["orient"].items()},
            offsets={k: {m: q(x) for m, x in v.items()} for k, v in data["offsets"].items()},
            r={k: q(v) for k, v in data["r"].items()},
            s={k: int(v) for k, v in data["s"].items()},
            leaf_root=data.get("leaf_root"),
        )


# ---------------------------------------------------------------- functions


def _edge_profile(params: ParameterSet, eid: str, which: int) -> list[tuple[Fraction, Fraction]]:
    """Breakpoints of F_which on edge ``eid`` in phi coordinates."""
    e = params.graph.edge(eid)
    ln = e.length
    o = params.offsets[eid]
    c, a, p = o["c"], o["a"], o["p"]
    qq, b, d = o["q"], o["b"], o["d"]
    if which == 1:
        return [(0, 0), (p, p), (qq, p), (ln, 0)]
    if which == 3:
        v, w = params.orient[eid]
        return [(0, params.r[v]), (a, params.r[v]), (b, params.r[w]), (ln, params.r[w])]
    s = params.s[eid]
    if params.in_tree(eid):
        return [(0, 0), (p, s * p), (qq, s * p), (ln, 0)]
    fc = s * c
    fa = fc + (s - 1) * (a - c)
    fp = fa + s * (p - a)
    return [(0, 0), (c, fc), (a, fa), (p, fp), (qq, fp), (b, fa), (d, fc), (ln, 0)]


def build_coordinate_functions(params: ParameterSet) -> tuple[PLFunction, PLFunction, PLFunction]:
    """F1, F2, F3 with F1 = F2 = 0 and F3 = r at every vertex."""
    _check_structure(params)
    out = []
    for which in (1, 2, 3):
        pieces = {}
        for e in params.graph.edges:
            prof = _edge_profile(params, e.id, which)
            pieces[e.id] = [(params.phi_to_offset(e.id, q(t)), q(v)) for t, v in prof]
        out.append(PLFunction.from_breakpoints(params.graph, pieces))
    return tuple(out)


def target_divisors(params: ParameterSet, check: bool = True) -> tuple[Divisor, Divisor, Divisor]:
    _check_structure(params)
    g = params.graph
    d1, d2, d3 = [], [], []
    for e in g.edges:
        v, w = params.orient[e.id]
        pt = lambda m: params.point(e.id, m)  # noqa: E731
        s = params.s[e.id]
        for x, n in ((g.vertex_point(v), 1), (g.vertex_point(w), 1), (pt("p"), -1), (pt("q"), -1)):
            d1.append((x, n))
            d2.append((x, s * n))
        d3 += [(pt("a"), 1), (pt("b"), -1)]
        if not params.in_tree(e.id):
            d2 += [(pt("c"), -1), (pt("a"), 1), (pt("b"), 1), (pt("d"), -1)]
    D = (Divisor(d1), Divisor(d2), Divisor(d3))
    if check:
        for i, Di in enumerate(D, 1):
            if not is_principal(g, Di):
                raise ParameterError(f"D{i} is not principal")
    return D


def _check_structure(params: ParameterSet) -> None:
    g = params.graph
    for e in g.edges:
        if e.id not in params.orient or e.id not in params.offsets:
            raise ParameterError(f"edge {e.id} has no parameters")
        v, w = params.orient[e.id]
        if {v, w} != {e.u, e.v} or v == w:
            raise ParameterError(f"edge {e.id}: bad orientation")
        o = params.offsets[e.id]
        seq = [Fraction(0)] + [o[m] for m in MARKS] + [e.length]
        if any(x >= y for x, y in zip(seq, seq[1:])):
            raise ParameterError(f"edge {e.id}: marked points out of order")
        for m1, m2 in (("c", "d"), ("a", "b"), ("p", "q")):
            if o[m1] + o[m2] != e.length:
                raise ParameterError(f"edge {e.id}: {m1},{m2} not symmetric about the midpoint")


# ---------------------------------------------------------------- verification


@dataclass
class Condition:
    name: str
    passed: bool
    witness: str = ""


def _distinct(values: dict, name: str) -> Condition:
    seen: dict = {}
    for k, v in values.items():
        if v in seen:
            return Condition(name, False, f"{seen[v]} and {k} share value {v}")
        seen[v] = k
    return Condition(name, True)


def _min_on(F: list[tuple[Fraction, Fraction]], lo: Fraction, hi: Fraction) -> Fraction:
    def at(t):
        for (a, va), (b, vb) in zip(F, F[1:]):
            if a <= t <= b:
                return va + (vb - va) * (t - a) / (b - a)
        raise ValueError(t)

    pts = [lo, hi] + [t for t, _ in F if lo < t < hi]
    return min(at(t) for t in pts)


def verify_parameters(params: ParameterSet) -> list[Condition]:
    """Check every placement and integer condition; reports, never raises."""
    try:
        _check_structure(params)
    except ParameterError as exc:
        return [Condition("structure", False, str(exc))]
    out = [Condition("structure", True)]
    g = params.graph
    edges = [e.id for e in g.edges]
    off = [e for e in edges if params.r[params.orient[e][1]] - params.r[params.orient[e][0]] != params.offsets[e]["b"] - params.offsets[e]["a"]]
    out.append(Condition("ab_distance", not off, f"dist(a,b) != r(w) - r(v) on {off[:3]}" if off else ""))
    tree, comp = params.tree, list(params.complement)
    o = params.offsets
    ln = {e.id: e.length for e in g.edges}

    def band(lo_mark, hi_mark, mirror):
        key = (lambda e, m: ln[e] - o[e][m]) if mirror else (lambda e, m: o[e][m])
        return max(key(e, lo_mark) for e in edges), min(key(e, hi_mark) for e in edges)

    ok, wit = True, ""
    checks = [
        ("c", "a", False),
        ("a", "p", False),
        ("d", "b", True),
        ("b", "q", True),
    ]
    for lo, hi, mir in checks:
        mx, mn = band(lo, hi, mir)
        if not mx < mn:
            ok, wit = False, f"max {lo} {mx} >= min {hi} {mn}"
    half = min(ln.values()) / 2
    if not max(o[e]["p"] for e in edges) < half:
        ok, wit = False, "some p_e not left of every midpoint"
    if not max(ln[e] - o[e]["q"] for e in edges) < half:
        ok, wit = False, "some q_e not right of every midpoint"
    out.append(Condition("interval", ok, wit))

    bad = [e for e in edges if not params.r[params.orient[e][1]] - params.r[params.orient[e][0]] < ln[e]]
    out.append(Condition("r_gap", not bad, f"|r(w)-r(v)| >= length on {bad[:3]}" if bad else ""))
    out.append(_distinct(params.r, "R1"))
    out.append(_distinct({e: o[e]["a"] for e in edges}, "R2"))

    f3p = {e: params.r[params.orient[e][0]] + o[e]["p"] - o[e]["a"] for e in edges}
    f3q = {e: params.r[params.orient[e][1]] - (o[e]["b"] - o[e]["q"]) for e in edges}
    out.append(_distinct({e: o[e]["c"] for e in comp}, "C_distinct"))
    out.append(_distinct(f3p, "P_distinct"))
    out.append(_distinct(f3q, "Q_distinct"))
    clash = [(e, e2) for e in edges for e2 in edges if f3p[e] == f3q[e2]]
    out.append(Condition("PQ_distinct", not clash, f"F3(p_{clash[0][0]}) = F3(q_{clash[0][1]})" if clash else ""))

    if set(params.s) != set(edges):
        out.append(Condition("S", False, "s(e) missing"))
        return out
    s = params.s
    small = [e for e in edges if s[e] <= 1]
    out.append(Condition("S0", not small, f"s <= 1 on {small[:3]}" if small else ""))
    out.append(_distinct(s, "S1"))
    prof = {e: _edge_profile(params, e, 2) for e in edges}
    f2 = {e: {m: _value_at(prof[e], o[e][m]) for m in MARKS} for e in edges}
    out.append(_distinct({e: f2[e]["p"] for e in edges}, "S2"))
    spread = params.spread()

    w3 = ""
    for e in tree:
        for e2 in comp:
            gap = f2[e2]["c"] - f2[e]["p"]
            if not gap > spread:
                w3 = f"tree {e} vs complement {e2}: gap {gap} <= {spread}"
                break
        if w3:
            break
    out.append(Condition("S3", not w3, w3))

    w4 = ""
    ivs = sorted((f2[e]["c"], f2[e]["p"], e) for e in comp)
    for (lo1, hi1, e1), (lo2, hi2, e2) in zip(ivs, ivs[1:]):
        if not lo2 - hi1 > spread:
            w4 = f"intervals of {e1} and {e2} within {spread}"
            break
    out.append(Condition("S4", not w4, w4))

    w5 = ""
    for e in tree:
        bound = f2[e]["p"] + s[e] * spread
        for e2 in comp:
            lo = max(o[e]["p"], Fraction(0))
            hi = min(o[e]["q"], ln[e2])
            if lo > hi:
                continue
            if not _min_on(prof[e2], lo, hi) > bound:
                w5 = f"tree {e} vs complement {e2}"
                break
        if w5:
            break
    out.append(Condition("S5", not w5, w5))

    w6 = ""
    for v in g.vertices:
        tot = sum(s[x.id] for x in g.incident(v))
        if gcd(g.degree(v), tot) != 1:
            w6 = f"vertex {v}: deg {g.degree(v)} vs sum {tot}"
            break
    out.append(Condition("S6", not w6, w6))
    return out


def _value_at(prof, t):
    for (a, va), (b, vb) in zip(prof, prof[1:]):
        a, b, va, vb = q(a), q(b), q(va), q(vb)
        if a <= t <= b:
            return va + (vb - va) * (t - a) / (b - a)
    raise ValueError(t)


def all_pass(report: list[Condition]) -> bool:
    return all(c.passed for c in report)


# ---------------------------------------------------------------- synthesis


def _frac_gcd(xs) -> Fraction:
    den = reduce(lcm, (x.denominator for x in xs), 1)
    num = reduce(gcd, (int(x * den) for x in xs), 0)
    return Fraction(num, den)


def equalize(g: MetricGraph, comp) -> tuple[MetricGraph, tuple[str, ...]]:
    """Subdivide every edge into pieces of one common length with no parallel edges.

    Each complement edge keeps its middle piece as the complement edge.
    """
    unit = _frac_gcd([e.length for e in g.edges])
    while True:
        total = sum(e.length / unit for e in g.edges)
        if total > MAX_PIECES:
            raise ParameterError(f"equal-length subdivision needs {total} edges")
        h, new_comp = g, []
        for e in g.edges:
            n = int(e.length / unit)
            if n > 1:
                h, _, pieces = split_edge(h, e.id, [unit * i for i in range(1, n)])
            else:
                pieces = [e.id]
            if e.id in comp:
                new_comp.append(pieces[len(pieces) // 2])
        ends = [frozenset((e.u, e.v)) for e in h.edges]
        if len(set(ends)) == len(ends) and all(e.u != e.v for e in h.edges):
            return h, tuple(new_comp)
        unit /= 2


def attach_leaf(g: MetricGraph, comp) -> tuple[MetricGraph, str]:
    """Add a leaf edge at a degree-2 tree vertex (the sweep root z)."""
    compset = set(comp)
    comp_vertices = {x for e in comp for x in (g.edge(e).u, g.edge(e).v)}
    cands = [v for v in sorted(g.vertices) if g.degree(v) == 2 and v not in comp_vertices]
    z = cands[0] if cands else sorted(g.vertices)[0]
    del compset
    h, _, _ = add_leaf(g, z, g.min_length)
    return h, z


def _choose_r(g: MetricGraph, rng: random.Random) -> dict[str, Fraction]:
    L = g.min_length
    n = 10**6
    ks = rng.sample(range(n), len(g.vertices))
    return {v: L / 4 * Fraction(k, n) for v, k in zip(sorted(g.vertices), ks)}


def _place(g: MetricGraph, comp, r, rng: random.Random) -> tuple[dict, dict]:
    L = g.min_length
    orient, offsets = {}, {}
    deltas = {}
    for e in g.edges:
        v, w = (e.u, e.v) if r[e.u] < r[e.v] else (e.v, e.u)
        orient[e.id] = (v, w)
        deltas[e.id] = r[w] - r[v]
    min_d = min(deltas.values())
    n = 10**6
    for e in g.edges:
        ln = e.length
        a = (ln - deltas[e.id]) / 2
        p = ln / 2 - min_d / 2 * Fraction(rng.randrange(n // 20, n - n // 20), n)
        c = L / 16 * (1 + Fraction(rng.randrange(1, n), n))
        offsets[e.id] = {"c": c, "a": a, "p": p, "q": ln - p, "b": ln - a, "d": ln - c}
    return orient, offsets


def choose_s(params: ParameterSet, rng: random.Random | None = None) -> dict[str, int]:
    """Pick s(e) meeting the coprimality and separation conditions.

    ``params.leaf_root`` is the sweep root z; the leaf edge at z is the last
    edge adjusted for coprimality.
    """
    g = params.graph
    z = params.leaf_root
    if z is None:
        raise ParameterError("choose_s needs a leaf root")
    leaf_edge = next(e.id for e in g.edges if (e.u == z and g.degree(e.v) == 1) or (e.v == z and g.degree(e.u) == 1))
    leaf_vertex = g.edge(leaf_edge).other(z)

    s = {e.id: p for e, p in zip(sorted(g.edges, key=lambda e: e.id), _primes(len(g.edges)))}

    # coprimality sweep toward z
    dist = vertex_distances(g, [(z, Fraction(0))])
    parent = {}
    for v in g.vertices:
        if v == z:
            continue
        for e in sorted(g.incident(v), key=lambda e: e.id):
            w = e.other(v)
            if dist[w] + e.length == dist[v]:
                parent[v] = e.id
                break
    order = sorted((v for v in g.vertices if v not in (z, leaf_vertex)), key=lambda v: (-dist[v], v))
    for v in order:
        while gcd(g.degree(v), sum(s[x.id] for x in g.incident(v))) != 1:
            s[parent[v]] += 1
    while gcd(g.degree(z), sum(s[x.id] for x in g.incident(z))) != 1:
        s[leaf_edge] += 1

    # spread by multiples of the lcm of degrees (keeps every coprimality)
    M = reduce(lcm, (g.degree(v) for v in g.vertices), 1)
    base = dict(s)
    o = params.offsets
    spread = params.spread()
    prof_params = ParameterSet(g, params.complement, params.orient, o, params.r, s, z)

    def f2(eid, mark):
        return _value_at(_edge_profile(prof_params, eid, 2), o[eid][mark])

    assigned: dict[str, int] = {}
    tree = sorted(params.tree)
    comp = sorted(params.complement)
    used_s, used_p = set(), set()
    for eid in tree:
        t = 0
        while True:
            s[eid] = base[eid] + t * M
            if s[eid] not in used_s and f2(eid, "p") not in used_p:
                break
            t += 1
        assigned[eid] = s[eid]
        used_s.add(s[eid])
        used_p.add(f2(eid, "p"))
    tree_top = max((f2(e, "p") for e in tree), default=Fraction(0))
    ceiling = tree_top
    ln = {e.id: e.length for e in g.edges}
    for eid in comp:
        t = 0
        while True:
            s[eid] = base[eid] + t * M
            ok = s[eid] not in used_s and f2(eid, "c") - ceiling > spread and f2(eid, "p") not in used_p
            if ok:
                prof = _edge_profile(prof_params, eid, 2)
                for e in tree:
                    lo, hi = o[e]["p"], min(o[e]["q"], ln[eid])
                    if lo <= hi and not _min_on(prof, lo, hi) > f2(e, "p") + s[e] * spread:
                        ok = False
                        break
            if ok:
                break
            t += 1
        used_s.add(s[eid])
        used_p.add(f2(eid, "p"))
        ceiling = f2(eid, "p")
    return dict(s)


def _primes(n: int) -> list[int]:
    out, k = [], 2
    while len(out) < n:
        if all(k % p for p in out if p * p <= k):
            out.append(k)
        k += 1
    return out


def synthesize_parameters(g: MetricGraph, seed: int = 0, complement=None, max_tries: int = 200) -> ParameterSet:
    """Choose a suitable model and all parameters; deterministic in ``seed``.

    ``g`` may be any connected metric graph; it is first prepared (disjoint
    complement), subdivided to equal edge lengths, and given a leaf edge.
    """
    if complement is None:
        g, complement = prepare_model(g)
    g, complement = equalize(g, complement)
    g, z = attach_leaf(g, complement)
    rng = random.Random(seed)
    last = None
    for _ in range(max_tries):
        r = _choose_r(g, rng)
        orient, offsets = _place(g, complement, r, rng)
        params = ParameterSet(g, tuple(complement), orient, offsets, r, {}, z)
        pre = verify_parameters(params)
        if not all(c.passed for c in pre if c.name not in ("S",)):
            last = pre
            continue
        params.s = choose_s(params)
        rep = verify_parameters(params)
        if all_pass(rep):
            return params
        last = rep
    failed = [c for c in last if not c.passed]
    raise ParameterError(f"could not synthesize parameters: {failed}")
