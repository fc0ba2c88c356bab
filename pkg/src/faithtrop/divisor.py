"""Divisors and piecewise-linear functions on metric graphs.

Principality is decided by an exact Kirchhoff solve: with edge resistance
equal to edge length, the potential whose outgoing-slope sums equal a
degree-zero divisor is unique up to a constant, and the divisor is principal
iff every slope of that potential is an integer.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping

from .metric_graph import GraphPoint, MetricGraph, is_spanning_tree
from .rational import q, qstr, solve


class Divisor:
    """Finite formal integer combination of rational points."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[GraphPoint, int] | Iterable[tuple[GraphPoint, int]] = ()):
        c: dict[GraphPoint, int] = defaultdict(int)
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for p, n in items:
            if int(n) != n:
                raise ValueError(f"non-integer coefficient {n!r}")
            c[p] += int(n)
        self._c = {p: n for p, n in c.items() if n}

    def __getitem__(self, p: GraphPoint) -> int:
        return self._c.get(p, 0)

    def items(self):
        return sorted(self._c.items())

    def support(self) -> list[GraphPoint]:
        return sorted(self._c)

    @property
    def degree(self) -> int:
        return sum(self._c.values())

    def is_effective(self) -> bool:
        return all(n > 0 for n in self._c.values())

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor(list(self._c.items()) + list(other._c.items()))

    def __neg__(self) -> "Divisor":
        return Divisor({p: -n for p, n in self._c.items()})

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + (-other)

    def __mul__(self, k: int) -> "Divisor":
        return Divisor({p: k * n for p, n in self._c.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, Divisor) and self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __len__(self) -> int:
        return len(self._c)

    def __repr__(self) -> str:
        terms = " ".join(f"{n:+d}{p!r}" for p, n in self.items())
        return f"Divisor({terms or '0'})"

    def to_json(self) -> list:
        return [{"point": point_to_json(p), "coeff": n} for p, n in self.items()]

    @classmethod
    def from_json(cls, g: MetricGraph, data: list) -> "Divisor":
        return cls((point_from_json(g, d["point"]), d["coeff"]) for d in data)


def point_to_json(p: GraphPoint) -> dict:
    if p.is_vertex:
        return {"vertex": p.vertex}
    return {"edge": p.edge, "offset": qstr(p.offset)}


def point_from_json(g: MetricGraph, d: dict) -> GraphPoint:
    if "vertex" in d:
        return g.vertex_point(d["vertex"])
    return g.point(d["edge"], d["offset"])


@dataclass(frozen=True)
class PLFunction:
    """Continuous piecewise-linear function stored as per-edge breakpoints.

    ``pieces[eid]`` lists ``(offset, value)`` pairs from offset 0 (the edge's
    first endpoint) to its length, strictly increasing in offset.
    """

    graph: MetricGraph
    pieces: Mapping[str, tuple[tuple[Fraction, Fraction], ...]]

    def __post_init__(self):
        vals: dict[str, Fraction] = {}
        for e in self.graph.edges:
            bp = self.pieces.get(e.id)
            if not bp or len(bp) < 2:
                raise ValueError(f"edge {e.id} has no breakpoints")
            if bp[0][0] != 0 or bp[-1][0] != e.length:
                raise ValueError(f"edge {e.id}: breakpoints must span [0, {e.length}]")
            if any(b[0] >= c[0] for b, c in zip(bp, bp[1:])):
                raise ValueError(f"edge {e.id}: offsets not increasing")
            for v, val in ((e.u, bp[0][1]), (e.v, bp[-1][1])):
                if vals.setdefault(v, val) != val:
                    raise ValueError(f"discontinuous at vertex {v}")

    @classmethod
    def from_breakpoints(cls, g: MetricGraph, pieces: Mapping[str, Iterable[tuple]]) -> "PLFunction":
        clean = {}
        for eid, bp in pieces.items():
            pts = sorted((q(t), q(v)) for t, v in bp)
            out = []
            for t, v in pts:
                if out and out[-1][0] == t:
                    if out[-1][1] != v:
                        raise ValueError(f"edge {eid}: two values at offset {t}")
                    continue
                out.append((t, v))
            clean[eid] = tuple(_drop_collinear(out))
        return cls(g, clean)

    @classmethod
    def constant(cls, g: MetricGraph, c=0) -> "PLFunction":
        c = q(c)
        return cls(g, {e.id: ((Fraction(0), c), (e.length, c)) for e in g.edges})

    def vertex_value(self, v: str) -> Fraction:
        e = self.graph.incident(v)[0]
        bp = self.pieces[e.id]
        return bp[0][1] if e.u == v else bp[-1][1]

    def slopes(self, eid: str) -> list[tuple[Fraction, Fraction, Fraction]]:
        """``(start, end, slope)`` per linear piece, in the edge's own direction."""
        bp = self.pieces[eid]
        return [(a, b, (vb - va) / (b - a)) for (a, va), (b, vb) in zip(bp, bp[1:])]

    @property
    def integral(self) -> bool:
        return all(s.denominator == 1 for e in self.graph.edges for _, _, s in self.slopes(e.id))

    def breakpoints(self) -> list[GraphPoint]:
        out = [GraphPoint(vertex=v) for v in self.graph.vertices]
        for e in self.graph.edges:
            out.extend(GraphPoint(edge=e.id, offset=t) for t, _ in self.pieces[e.id][1:-1])
        return out

    def __call__(self, x: GraphPoint) -> Fraction:
        return evaluate(self, x)

    def on_edge(self, eid: str, t) -> Fraction:
        t = q(t)
        bp = self.pieces[eid]
        for (a, va), (b, vb) in zip(bp, bp[1:]):
            if a <= t <= b:
                return va + (vb - va) * (t - a) / (b - a)
        raise ValueError(f"offset {t} outside edge {eid}")

    def _combine(self, other: "PLFunction", op) -> "PLFunction":
        if other.graph is not self.graph and other.graph != self.graph:
            raise ValueError("functions live on different graphs")
        out = {}
        for e in self.graph.edges:
            ts = sorted({t for t, _ in self.pieces[e.id]} | {t for t, _ in other.pieces[e.id]})
            out[e.id] = tuple(_drop_collinear([(t, op(self.on_edge(e.id, t), other.on_edge(e.id, t))) for t in ts]))
        return PLFunction(self.graph, out)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self):
        return PLFunction(self.graph, {k: tuple((t, -v) for t, v in bp) for k, bp in self.pieces.items()})

    def shift(self, c) -> "PLFunction":
        c = q(c)
        return PLFunction(self.graph, {k: tuple((t, v + c) for t, v in bp) for k, bp in self.pieces.items()})

    def equals_up_to_constant(self, other: "PLFunction") -> bool:
        v0 = self.graph.vertices[0]
        d = self - other
        c = d.vertex_value(v0)
        return all(val == c for bp in d.pieces.values() for _, val in bp)

    def to_json(self) -> dict:
        return {"edges": {k: [[qstr(t), qstr(v)] for t, v in bp] for k, bp in sorted(self.pieces.items())}}

    @classmethod
    def from_json(cls, g: MetricGraph, data: dict) -> "PLFunction":
        return cls.from_breakpoints(g, {k: [tuple(x) for x in bp] for k, bp in data["edges"].items()})


def _drop_collinear(pts):
    out = list(pts[:1])
    for i in range(1, len(pts)):
        if i < len(pts) - 1 and len(out) >= 1:
            (a, va), (b, vb), (c, vc) = out[-1], pts[i], pts[i + 1]
            if (vb - va) * (c - b) == (vc - vb) * (b - a):
                continue
        out.append(pts[i])
    return out


def evaluate(F: PLFunction, x: GraphPoint) -> Fraction:
    """Value of ``F`` at ``x`` by linear interpolation."""
    if x.is_vertex:
        return F.vertex_value(x.vertex)
    return F.on_edge(x.edge, x.offset)


def divisor_of(F: PLFunction) -> Divisor:
    """Sum of outgoing slopes at every point."""
    if not F.integral:
        raise ValueError("divisor_of needs integer slopes")
    g = F.graph
    c: dict[GraphPoint, int] = defaultdict(int)
    for e in g.edges:
        sl = F.slopes(e.id)
        c[GraphPoint(vertex=e.u)] += int(sl[0][2])
        c[GraphPoint(vertex=e.v)] -= int(sl[-1][2])
        for (_, b, s1), (_, _, s2) in zip(sl, sl[1:]):
            c[GraphPoint(edge=e.id, offset=b)] += int(s2 - s1)
    return Divisor(c)


def _edge_charges(g: MetricGraph, D: Divisor) -> dict[str, list[tuple[Fraction, int]]]:
    ch: dict[str, list] = defaultdict(list)
    for p, n in D.items():
        if not p.is_vertex:
            if p.edge not in g._by_id:
                raise ValueError(f"divisor point {p!r} not on graph")
            ch[p.edge].append((p.offset, n))
    return ch


def solve_poisson(g: MetricGraph, D: Divisor) -> PLFunction:
    """Potential whose outgoing-slope sums equal ``D``, zero at the first vertex id.

    Interior charges on an edge are folded into the vertex equations in
    closed form, so the exact solve is only |V| x |V|.
    """
    if D.degree != 0:
        raise ValueError("no solution: divisor degree is not zero")
    verts = sorted(g.vertices)
    root = verts[0]
    idx = {v: i for i, v in enumerate(verts[1:])}
    n = len(idx)
    a = [[Fraction(0)] * n for _ in range(n)]
    b = [Fraction(0)] * n
    for v in verts[1:]:
        b[idx[v]] += D[GraphPoint(vertex=v)]
    charges = _edge_charges(g, D)

    def add(row_v, col_v, val):
        if row_v in idx and col_v in idx:
            a[idx[row_v]][idx[col_v]] += val

    for e in g.edges:
        ln = e.length
        ch = charges.get(e.id, [])
        # outgoing slope at u: (F(v)-F(u))/ln + sum m (t-ln)/ln ; at v: (F(u)-F(v))/ln - sum m t/ln
        cu = sum((m * (t - ln) for t, m in ch), Fraction(0)) / ln
        cv = -sum((m * t for t, m in ch), Fraction(0)) / ln
        if e.u in idx:
            b[idx[e.u]] -= cu
        if e.v in idx:
            b[idx[e.v]] -= cv
        inv = 1 / ln
        add(e.u, e.v, inv)
        add(e.u, e.u, -inv)
        add(e.v, e.u, inv)
        add(e.v, e.v, -inv)
    sol = solve(a, b) if n else []
    val = {root: Fraction(0)}
    val.update({v: sol[i] for v, i in idx.items()})
    pieces = {}
    for e in g.edges:
        ln = e.length
        ch = sorted(charges.get(e.id, []))
        fu, fv = val[e.u], val[e.v]

        def f(x, fu=fu, fv=fv, ln=ln, ch=ch):
            s = fu + (fv - fu) * x / ln
            for t, m in ch:
                s += m * (x * (t - ln) / ln if x <= t else t * (x - ln) / ln)
            return s

        ts = [Fraction(0)] + [t for t, _ in ch] + [ln]
        pieces[e.id] = tuple((t, f(t)) for t in ts)
    return PLFunction(g, pieces)


def is_principal(g: MetricGraph, D: Divisor) -> bool:
    """True iff ``D = div(F)`` for some PL function with integer slopes."""
    if D.degree != 0:
        return False
    return solve_poisson(g, D).integral


def is_break_divisor(g: MetricGraph, B: Divisor) -> bool:
    """Search spanning-tree complements for one carrying one point of ``B`` per edge."""
    from .metric_graph import genus

    if not B.is_effective() or B.degree != genus(g):
        return False
    pts = [p for p, n in B.items() for _ in range(n)]
    cands = []
    for p in pts:
        if p.is_vertex:
            cands.append(sorted({e.id for e in g.incident(p.vertex)}))
        else:
            cands.append([p.edge])
    all_ids = {e.id for e in g.edges}
    for choice in product(*cands):
        if len(set(choice)) != len(choice):
            continue
        if is_spanning_tree(g, all_ids - set(choice)):
            return True
    return not pts and is_spanning_tree(g, all_ids)
