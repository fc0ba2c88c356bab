"""Metric graphs with exact rational edge lengths."""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .rational import q, qstr


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    length: Fraction

    def other(self, x: str) -> str:
        return self.v if x == self.u else self.u


@dataclass(frozen=True)
class GraphPoint:
    """A vertex, or a point on an edge at ``offset`` from the edge's first endpoint.

    Build through :meth:`MetricGraph.point` so that endpoint offsets normalize
    to vertices.
    """

    vertex: str | None = None
    edge: str | None = None
    offset: Fraction | None = None

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    def sort_key(self):
        if self.vertex is not None:
            return (0, self.vertex, "", 0)
        return (1, "", self.edge, self.offset)

    def __lt__(self, other: "GraphPoint") -> bool:
        return self.sort_key() < other.sort_key()

    def __repr__(self) -> str:
        if self.vertex is not None:
            return f"<{self.vertex}>"
        return f"<{self.edge}@{qstr(self.offset)}>"


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class MetricGraph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    _by_id: dict = field(init=False, repr=False, compare=False, hash=False)
    _incident: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        by_id = {e.id: e for e in self.edges}
        inc: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            inc[e.u].append(e)
            if e.v != e.u:
                inc[e.v].append(e)
            else:
                inc[e.u].append(e)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_incident", inc)

    def edge(self, eid: str) -> Edge:
        return self._by_id[eid]

    def incident(self, v: str) -> list[Edge]:
        """Edges at ``v``; a loop appears twice."""
        return self._incident[v]

    def degree(self, v: str) -> int:
        return len(self._incident[v])

    def point(self, edge: str, offset) -> GraphPoint:
        e = self._by_id[edge]
        t = q(offset)
        if t < 0 or t > e.length:
            raise GraphError(f"offset {t} outside edge {edge} of length {e.length}")
        if t == 0:
            return GraphPoint(vertex=e.u)
        if t == e.length:
            return GraphPoint(vertex=e.v)
        return GraphPoint(edge=edge, offset=t)

    def vertex_point(self, v: str) -> GraphPoint:
        if v not in self._incident:
            raise GraphError(f"unknown vertex {v!r}")
        return GraphPoint(vertex=v)

    @property
    def min_length(self) -> Fraction:
        return min(e.length for e in self.edges)

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"id": e.id, "ends": [e.u, e.v], "length": qstr(e.length)} for e in self.edges],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: dict) -> "MetricGraph":
        try:
            verts = data["vertices"]
            edges = [(e["id"], e["ends"][0], e["ends"][1], e["length"]) for e in data["edges"]]
        except (KeyError, IndexError, TypeError) as exc:
            raise GraphError(f"malformed graph JSON: {exc!r}") from None
        return build_graph(verts, edges)


def build_graph(vertices: Iterable[str], edges: Iterable[tuple]) -> MetricGraph:
    """Validate and build a connected metric graph from ``(id, u, v, length)`` tuples."""
    verts = tuple(str(v) for v in vertices)
    if len(set(verts)) != len(verts):
        raise GraphError("duplicate vertex id")
    if not verts:
        raise GraphError("graph has no vertices")
    vs = set(verts)
    out = []
    seen = set()
    for eid, u, v, length in edges:
        eid, u, v = str(eid), str(u), str(v)
        if eid in seen:
            raise GraphError(f"duplicate edge id {eid!r}")
        seen.add(eid)
        for x in (u, v):
            if x not in vs:
                raise GraphError(f"edge {eid!r} has dangling endpoint {x!r}")
        try:
            ln = q(length)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise GraphError(f"edge {eid!r}: bad length {length!r}") from exc
        if ln <= 0:
            raise GraphError(f"edge {eid!r} has non-positive length {ln}")
        out.append(Edge(eid, u, v, ln))
    g = MetricGraph(verts, tuple(out))
    if not _connected(g, verts, out):
        raise GraphError("graph is disconnected")
    return g


def _connected(g, verts, edges) -> bool:
    seen = {verts[0]}
    stack = [verts[0]]
    while stack:
        x = stack.pop()
        for e in g.incident(x):
            y = e.other(x)
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(verts)


def genus(g: MetricGraph) -> int:
    return len(g.edges) - len(g.vertices) + 1


def _fresh(taken, base: str) -> str:
    name, i = base, 1
    while name in taken:
        i += 1
        name = f"{base}_{i}"
    return name


def split_edge(g: MetricGraph, eid: str, offsets, vertex_names=None) -> tuple[MetricGraph, list[str], list[str]]:
    """Split edge ``eid`` at the given interior offsets.

    Returns the new graph, the new vertex ids in order from ``e.u`` and the
    ids of the pieces in order.
    """
    e = g.edge(eid)
    offs = sorted(set(q(t) for t in offsets))
    for t in offs:
        if not 0 < t < e.length:
            raise GraphError(f"offset {t} not interior to {eid}")
    taken_v = set(g.vertices)
    taken_e = {x.id for x in g.edges}
    new_vs = []
    for i, _ in enumerate(offs):
        want = vertex_names[i] if vertex_names else f"{eid}.v{i + 1}"
        name = _fresh(taken_v, want)
        taken_v.add(name)
        new_vs.append(name)
    chain = [e.u] + new_vs + [e.v]
    cuts = [Fraction(0)] + offs + [e.length]
    pieces = []
    for i in range(len(chain) - 1):
        name = _fresh(taken_e, f"{eid}.{i}") if len(chain) > 2 else eid
        taken_e.add(name)
        pieces.append(Edge(name, chain[i], chain[i + 1], cuts[i + 1] - cuts[i]))
    edges = []
    for x in g.edges:
        edges.extend(pieces if x.id == eid else [x])
    return MetricGraph(g.vertices + tuple(new_vs), tuple(edges)), new_vs, [p.id for p in pieces]


def subdivide(g: MetricGraph, p: GraphPoint) -> MetricGraph:
    """Make ``p`` a vertex; a no-op if it already is one."""
    if p.is_vertex:
        return g
    return split_edge(g, p.edge, [p.offset])[0]


def add_leaf(g: MetricGraph, at: str, length, leaf: str = "leaf", eid: str = "leaf") -> tuple[MetricGraph, str, str]:
    leaf = _fresh(set(g.vertices), leaf)
    eid = _fresh({e.id for e in g.edges}, eid)
    e = Edge(eid, at, leaf, q(length))
    return MetricGraph(g.vertices + (leaf,), g.edges + (e,)), leaf, eid


def spanning_tree(g: MetricGraph) -> tuple[frozenset[str], tuple[str, ...]]:
    """Kruskal over edge ids in lexicographic order; returns (tree ids, complement ids)."""
    parent = {v: v for v in g.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree, comp = set(), []
    for e in sorted(g.edges, key=lambda e: e.id):
        a, b = find(e.u), find(e.v)
        if a == b:
            comp.append(e.id)
        else:
            parent[a] = b
            tree.add(e.id)
    return frozenset(tree), tuple(comp)


def is_spanning_tree(g: MetricGraph, tree_ids) -> bool:
    tree_ids = set(tree_ids)
    if len(tree_ids) != len(g.vertices) - 1:
        return False
    parent = {v: v for v in g.vertices}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for eid in tree_ids:
        e = g.edge(eid)
        a, b = find(e.u), find(e.v)
        if a == b:
            return False
        parent[a] = b
    return True


def complement_disjoint(g: MetricGraph, comp) -> bool:
    """No complement edge is a loop and no two complement edges share a vertex."""
    seen = set()
    for eid in comp:
        e = g.edge(eid)
        if e.u == e.v or e.u in seen or e.v in seen:
            return False
        seen.update((e.u, e.v))
    return True


def prepare_model(g: MetricGraph) -> tuple[MetricGraph, tuple[str, ...]]:
    """Subdivide so a spanning-tree complement is pairwise vertex-disjoint.

    If the lexicographic Kruskal complement is already disjoint the graph is
    returned unchanged; otherwise every complement edge is trisected and its
    middle third becomes the complement edge.
    """
    _, comp = spanning_tree(g)
    if complement_disjoint(g, comp):
        return g, comp
    new_comp = []
    for eid in comp:
        e = g.edge(eid)
        g, _, pieces = split_edge(g, eid, [e.length / 3, 2 * e.length / 3])
        new_comp.append(pieces[1])
    return g, tuple(new_comp)


def _locate(g: MetricGraph, x: GraphPoint) -> list[tuple[str, Fraction]]:
    """Vertices reachable from x directly, with distances."""
    if x.is_vertex:
        return [(x.vertex, Fraction(0))]
    e = g.edge(x.edge)
    return [(e.u, x.offset), (e.v, e.length - x.offset)]


def vertex_distances(g: MetricGraph, sources: list[tuple[str, Fraction]]) -> dict[str, Fraction]:
    dist = {}
    heap = [(d, v) for v, d in sources]
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if v in dist:
            continue
        dist[v] = d
        for e in g.incident(v):
            w = e.other(v)
            if w not in dist:
                heapq.heappush(heap, (d + e.length, w))
    return dist


def distance(g: MetricGraph, x: GraphPoint, y: GraphPoint) -> Fraction:
    """Exact shortest-path distance between two points of the graph."""
    if x == y:
        return Fraction(0)
    best = None
    if not x.is_vertex and not y.is_vertex and x.edge == y.edge:
        best = abs(x.offset - y.offset)
    dist = vertex_distances(g, _locate(g, x))
    for v, d in _locate(g, y):
        cand = dist[v] + d
        if best is None or cand < best:
            best = cand
    return best
