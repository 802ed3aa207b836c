#!/usr/bin/env python3
"""
Graph model: finite multigraphs, graph-maps into R^n, smoothing,
homeomorphism testing and isomorphism enumeration
"""

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from networkx.algorithms.isomorphism import MultiGraphMatcher

from frechet_errors import EnumerationCapExceeded, GraphModelError
from geometry import (Polyline, Reparameterization, Tolerances, concat_many,
                      reparameterize, resolve_tolerances, reverse)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Edge:
    edge_id: str
    u: str
    v: str

    @property
    def is_loop(self) -> bool:
        return self.u == self.v


class MultiGraph:
    """Finite multigraph; self-loops and parallel edges allowed"""

    def __init__(self, vertex_ids: Iterable, edges: Iterable):
        self.vertex_ids: Tuple[str, ...] = tuple(sorted({str(v) for v in vertex_ids}))
        known = set(self.vertex_ids)
        parsed: List[Edge] = []
        seen = set()
        for item in edges:
            edge = item if isinstance(item, Edge) else Edge(*(str(x) for x in item))
            if edge.edge_id in seen:
                raise GraphModelError(f"duplicate edge id {edge.edge_id!r}")
            if edge.u not in known or edge.v not in known:
                raise GraphModelError(f"edge {edge.edge_id!r} references an unknown vertex")
            seen.add(edge.edge_id)
            parsed.append(edge)
        self.edges: Tuple[Edge, ...] = tuple(parsed)
        self._by_id = {e.edge_id: e for e in self.edges}
        self._incident: Dict[str, List[Tuple[str, int]]] = {v: [] for v in self.vertex_ids}
        for e in self.edges:
            self._incident[e.u].append((e.edge_id, 0))
            self._incident[e.v].append((e.edge_id, 1))
        for entries in self._incident.values():
            entries.sort()

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._by_id[edge_id]
        except KeyError:
            raise GraphModelError(f"unknown edge id {edge_id!r}") from None

    def incident(self, vertex: str) -> List[Tuple[str, int]]:
        """Edge ends at a vertex as (edge_id, end); end 0 is the edge's u side"""
        return list(self._incident[vertex])

    def degree(self, vertex: str) -> int:
        return len(self._incident[vertex])

    def to_networkx(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(self.vertex_ids)
        for e in self.edges:
            g.add_edge(e.u, e.v, key=e.edge_id)
        return g

    def __repr__(self):
        return f"MultiGraph(vertices={len(self.vertex_ids)}, edges={len(self.edges)})"


@dataclass(frozen=True)
class TopoEdge:
    """
    A topological edge of a smoothed graph: a maximal chain of original edges
    joined at degree-2 vertices. chain lists (original edge_id, forward) in
    traversal order from u to v.
    """
    edge_id: str
    u: str
    v: str
    chain: Tuple[Tuple[str, bool], ...]
    is_circle: bool = False


class SmoothedGraph:
    """A multigraph with every degree-2 vertex suppressed; circle components flagged"""

    def __init__(self, source: MultiGraph, topo_edges: Sequence[TopoEdge], vertices: Sequence[str]):
        self.source = source
        self.topo_edges: Dict[str, TopoEdge] = {t.edge_id: t for t in topo_edges}
        self.graph = MultiGraph(vertices, [Edge(t.edge_id, t.u, t.v) for t in topo_edges])
        self.circles: Tuple[str, ...] = tuple(t.edge_id for t in topo_edges if t.is_circle)
        self.branch_vertices: Tuple[str, ...] = tuple(
            v for v in self.graph.vertex_ids
            if not any(self.topo_edges[eid].is_circle for eid, _ in self.graph.incident(v)))

    def branch_graph(self) -> nx.MultiGraph:
        """The networkx multigraph of the branch part (circle components removed)"""
        g = nx.MultiGraph()
        g.add_nodes_from(self.branch_vertices)
        for t in self.topo_edges.values():
            if not t.is_circle:
                g.add_edge(t.u, t.v, key=t.edge_id)
        return g

    def structure_key(self) -> tuple:
        """Id-free structural signature used for equality of smoothings"""
        edges = sorted((min(t.u, t.v), max(t.u, t.v), t.is_circle) for t in self.topo_edges.values())
        return tuple(self.graph.vertex_ids), tuple(edges)

    def __repr__(self):
        return (f"SmoothedGraph(branch_vertices={len(self.branch_vertices)}, "
                f"edges={len(self.topo_edges) - len(self.circles)}, circles={len(self.circles)})")


def _walk(g: MultiGraph, start: str, first: Tuple[str, int], visited: set,
          stop) -> Tuple[str, List[Tuple[str, bool]]]:
    cur = start
    entry = first
    chain: List[Tuple[str, bool]] = []
    while True:
        eid, end = entry
        visited.add(eid)
        edge = g.edge(eid)
        forward = end == 0
        chain.append((eid, forward))
        cur = edge.v if forward else edge.u
        if stop(cur):
            return cur, chain
        arrived = (eid, 1 if forward else 0)
        options = [x for x in g.incident(cur) if x != arrived]
        entry = options[0]


def smooth(g: MultiGraph) -> SmoothedGraph:
    """Contract every maximal degree-2 chain into one topological edge"""
    branch = {v for v in g.vertex_ids if g.degree(v) != 2}
    visited: set = set()
    topo: List[TopoEdge] = []

    for b in sorted(branch):
        for entry in g.incident(b):
            if entry[0] in visited:
                continue
            end_vertex, chain = _walk(g, b, entry, visited, lambda v: v in branch)
            topo.append(TopoEdge(f"T{len(topo)}", b, end_vertex, tuple(chain)))

    vertices = set(branch)
    circles = 0
    for v in g.vertex_ids:
        open_entries = [x for x in g.incident(v) if x[0] not in visited]
        if v in branch or not open_entries:
            continue
        # first vertex met in sorted order is the smallest of its circle
        _, chain = _walk(g, v, open_entries[0], visited, lambda w, r=v: w == r)
        topo.append(TopoEdge(f"C{circles}", v, v, tuple(chain), is_circle=True))
        vertices.add(v)
        circles += 1

    smoothed = SmoothedGraph(g, topo, sorted(vertices))
    logger.debug(f"🔄 Smoothed {g} into {smoothed}")
    return smoothed


def _candidate_bound(sg: SmoothedGraph) -> int:
    # node maps a brute-force search would try: permutations within degree classes
    classes = defaultdict(int)
    for v in sg.branch_vertices:
        classes[sg.graph.degree(v)] += 1
    bound = 1
    for count in classes.values():
        bound *= math.factorial(count)
    return bound


def _cap(cap: Optional[int]) -> int:
    if cap is not None:
        return int(cap)
    from frechet_config import config
    return int(config.enumeration_cap)


def homeomorphic(g: MultiGraph, h: MultiGraph, cap: Optional[int] = None) -> bool:
    """True iff the smoothings of g and h are isomorphic multigraphs"""
    return smoothed_homeomorphic(smooth(g), smooth(h), cap)


def smoothed_homeomorphic(sg: SmoothedGraph, sh: SmoothedGraph, cap: Optional[int] = None) -> bool:
    cap = _cap(cap)
    if len(sg.circles) != len(sh.circles):
        return False
    gb, hb = sg.branch_graph(), sh.branch_graph()
    if gb.number_of_nodes() != hb.number_of_nodes() or gb.number_of_edges() != hb.number_of_edges():
        return False
    if sorted(d for _, d in gb.degree()) != sorted(d for _, d in hb.degree()):
        return False
    needed = _candidate_bound(sg)
    if needed > cap:
        raise EnumerationCapExceeded(needed, cap)
    return MultiGraphMatcher(gb, hb).is_isomorphic()


@dataclass(frozen=True)
class EdgeIsomorphism:
    """
    One combinatorial skeleton of a homeomorphism between smoothed graphs.

    edge_map holds (g_edge, h_edge, flipped); flipped means g's u end goes to
    h's v end. circle_map pairs circle components, each pairing standing for
    any rotation or reflection of the circle.
    """
    vertex_map: Tuple[Tuple[str, str], ...]
    edge_map: Tuple[Tuple[str, str, bool], ...]
    circle_map: Tuple[Tuple[str, str], ...] = ()
    circle_rotation: str = 'any'

    def sort_key(self):
        return self.vertex_map, self.edge_map, self.circle_map


def _edge_classes(sg: SmoothedGraph) -> Dict[Tuple[str, str], List[str]]:
    classes: Dict[Tuple[str, str], List[str]] = defaultdict(list)
    for t in sg.topo_edges.values():
        if not t.is_circle:
            classes[tuple(sorted((t.u, t.v)))].append(t.edge_id)
    return classes


def enumerate_isomorphisms(sg: SmoothedGraph, sh: SmoothedGraph,
                           cap: Optional[int] = None) -> List[EdgeIsomorphism]:
    """
    Every isomorphism of smoothed multigraphs, canonically ordered.

    Parallel edges are permuted in every way, self-loops taken in both
    orientations and circle components paired in every way. Raises
    EnumerationCapExceeded when the total would exceed the cap.
    """
    cap = _cap(cap)
    if len(sg.circles) != len(sh.circles):
        return []
    gb, hb = sg.branch_graph(), sh.branch_graph()
    if gb.number_of_nodes() != hb.number_of_nodes() or gb.number_of_edges() != hb.number_of_edges():
        return []

    g_classes = _edge_classes(sg)
    h_classes = _edge_classes(sh)
    circle_pairings = math.factorial(len(sg.circles))

    node_maps = []
    total = 0
    for mapping in MultiGraphMatcher(gb, hb).isomorphisms_iter():
        count = circle_pairings
        for (x, y), ids in g_classes.items():
            count *= math.factorial(len(ids)) * (2 ** len(ids) if x == y else 1)
        total += count
        if total > cap:
            raise EnumerationCapExceeded(total, cap)
        node_maps.append(dict(mapping))

    circle_options = [tuple(zip(sg.circles, perm)) for perm in itertools.permutations(sh.circles)]
    results: List[EdgeIsomorphism] = []
    for sigma in node_maps:
        per_class = []
        for (x, y), ids in sorted(g_classes.items()):
            key = tuple(sorted((sigma[x], sigma[y])))
            targets = h_classes[key]
            options = []
            for perm in itertools.permutations(targets):
                if x == y:
                    for flips in itertools.product((False, True), repeat=len(ids)):
                        options.append(tuple(zip(ids, perm, flips)))
                else:
                    options.append(tuple(
                        (gid, hid, sigma[sg.topo_edges[gid].u] != sh.topo_edges[hid].u)
                        for gid, hid in zip(ids, perm)))
            per_class.append(options)
        vertex_map = tuple(sorted(sigma.items()))
        for combo in itertools.product(*per_class):
            edge_map = tuple(sorted(itertools.chain.from_iterable(combo)))
            for circles in circle_options:
                results.append(EdgeIsomorphism(vertex_map, edge_map, tuple(sorted(circles))))

    results.sort(key=EdgeIsomorphism.sort_key)
    logger.debug(f"📊 Enumerated {len(results)} edge isomorphisms")
    return results


class GraphMap:
    """
    A graph-map pair: a multigraph with vertex points and edge polylines.

    Each edge curve runs from its u vertex's point to its v vertex's point.
    """

    def __init__(self, graph: MultiGraph, vertex_points: Mapping, edge_curves: Mapping,
                 tol: Optional[Tolerances] = None):
        tol = resolve_tolerances(tol)
        self.graph = graph
        self.vertex_points: Dict[str, np.ndarray] = {}
        self.edge_curves: Dict[str, Polyline] = {}

        dims = set()
        for v in graph.vertex_ids:
            if v not in vertex_points:
                raise GraphModelError(f"vertex {v!r} has no point")
            pt = np.asarray(vertex_points[v], dtype=float).reshape(-1)
            if not np.all(np.isfinite(pt)):
                raise GraphModelError(f"vertex {v!r} point is not finite")
            pt.setflags(write=False)
            self.vertex_points[v] = pt
            dims.add(len(pt))
        for e in graph.edges:
            if e.edge_id not in edge_curves:
                raise GraphModelError(f"edge {e.edge_id!r} has no curve")
            curve = edge_curves[e.edge_id]
            dims.add(curve.dim)
            self.edge_curves[e.edge_id] = curve
        if len(dims) > 1:
            raise GraphModelError(f"graph-map geometry mixes dimensions {sorted(dims)}")
        self.dim = dims.pop() if dims else 0

        for e in graph.edges:
            curve = self.edge_curves[e.edge_id]
            for name, want, got in (('start', e.u, curve.start), ('end', e.v, curve.end)):
                gap = float(np.linalg.norm(self.vertex_points[want] - got))
                if gap > tol.eps_dist:
                    raise GraphModelError(
                        f"edge {e.edge_id!r} {name} misses vertex {want!r} by {gap:.3g}")

    def point(self, vertex: str) -> np.ndarray:
        return self.vertex_points[vertex]

    def curve(self, edge_id: str) -> Polyline:
        return self.edge_curves[edge_id]

    def oriented_curve(self, edge_id: str, forward: bool) -> Polyline:
        curve = self.edge_curves[edge_id]
        return curve if forward else reverse(curve)

    def __repr__(self):
        return f"GraphMap(dim={self.dim}, {self.graph})"


def chain_polyline(m: GraphMap, chain: Sequence[Tuple[str, bool]],
                   tol: Optional[Tolerances] = None) -> Polyline:
    """The path traced by a chain of original edges"""
    return concat_many([m.oriented_curve(eid, fwd) for eid, fwd in chain], tol)


def closed_loop(m: GraphMap, circle: TopoEdge, tol: Optional[Tolerances] = None) -> Polyline:
    """Closed polyline of a circle component, starting at its representative vertex"""
    if not circle.is_circle:
        raise GraphModelError(f"{circle.edge_id} is not a circle component")
    return chain_polyline(m, circle.chain, tol)


def reparameterize_graph_map(m: GraphMap, maps: Mapping[str, Reparameterization]) -> GraphMap:
    """Compose edge curves with the given reparameterizations (distance 0 to m)"""
    curves = {eid: reparameterize(c, maps[eid]) if eid in maps else c
              for eid, c in m.edge_curves.items()}
    return GraphMap(m.graph, m.vertex_points, curves)


def rotate_circle_map(m: GraphMap, shift: int) -> GraphMap:
    """
    Precompose a cycle graph-map with the rotation of the cycle by shift edges.

    The graph must be a single cycle whose edges are listed in order, each
    running from one vertex to the next. The image is unchanged; the
    vertex and edge assignments move along the cycle.
    """
    g = m.graph
    k = len(g.edges)
    if k == 0 or any(g.degree(v) != 2 for v in g.vertex_ids) or len(g.vertex_ids) != k:
        raise GraphModelError("rotate_circle_map needs a single cycle graph")
    order = [e.u for e in g.edges]
    for i, e in enumerate(g.edges):
        if e.v != g.edges[(i + 1) % k].u:
            raise GraphModelError("cycle edges must be listed head to tail")
    points = {order[i]: m.point(order[(i + shift) % k]) for i in range(k)}
    curves = {g.edges[i].edge_id: m.curve(g.edges[(i + shift) % k].edge_id) for i in range(k)}
    return GraphMap(g, points, curves)


def path_graph_map(c: Polyline, tol: Optional[Tolerances] = None) -> GraphMap:
    """The interval graph a -- b carrying the curve c"""
    graph = MultiGraph(['a', 'b'], [('e', 'a', 'b')])
    return GraphMap(graph, {'a': c.start, 'b': c.end}, {'e': c}, tol)


def cycle_graph_map(points, tol: Optional[Tolerances] = None) -> GraphMap:
    """Cycle graph on the given points, straight edges v0 -> v1 -> ... -> v0"""
    pts = np.asarray(points, dtype=float)
    k = len(pts)
    if k < 2:
        raise GraphModelError("a cycle needs at least two vertices")
    ids = [f"v{i}" for i in range(k)]
    edges = [(f"e{i}", ids[i], ids[(i + 1) % k]) for i in range(k)]
    curves = {f"e{i}": Polyline([pts[i], pts[(i + 1) % k]]) for i in range(k)}
    return GraphMap(MultiGraph(ids, edges), dict(zip(ids, pts)), curves, tol)


def straight_graph_map(vertex_points: Mapping, edges: Iterable,
                       tol: Optional[Tolerances] = None) -> GraphMap:
    """Graph-map whose edges are straight segments, or given polylines for loops and parallels"""
    parsed = []
    curves = {}
    for item in edges:
        eid, u, v, *rest = item
        parsed.append((eid, u, v))
        if rest:
            curves[str(eid)] = rest[0] if isinstance(rest[0], Polyline) else Polyline(rest[0])
        else:
            curves[str(eid)] = Polyline([vertex_points[u], vertex_points[v]])
    graph = MultiGraph(vertex_points.keys(), parsed)
    return GraphMap(graph, vertex_points, curves, tol)
