#!/usr/bin/env python3
"""
Tests for multigraphs, smoothing, homeomorphism and isomorphism enumeration
"""

import itertools
import os
import sys

import numpy as np
import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from frechet_errors import EnumerationCapExceeded, GraphModelError
from geometry import Polyline
from graph_model import (GraphMap, MultiGraph, closed_loop, cycle_graph_map, enumerate_isomorphisms,
                         homeomorphic, path_graph_map, rotate_circle_map, smooth, straight_graph_map)


def path_graph(n):
    ids = [f"p{i}" for i in range(n + 1)]
    return MultiGraph(ids, [(f"e{i}", ids[i], ids[i + 1]) for i in range(n)])


def cycle_graph(n):
    ids = [f"c{i}" for i in range(n)]
    return MultiGraph(ids, [(f"e{i}", ids[i], ids[(i + 1) % n]) for i in range(n)])


def theta_graph(subdivide=0):
    vertices = ['u', 'v']
    edges = [('a', 'u', 'v'), ('b', 'u', 'v')]
    prev = 'u'
    for i in range(subdivide):
        vertices.append(f"s{i}")
        edges.append((f"s{i}e", prev, f"s{i}"))
        prev = f"s{i}"
    edges.append(('c', prev, 'v'))
    return MultiGraph(vertices, edges)


def test_multigraph_rejects_bad_edges():
    with pytest.raises(GraphModelError):
        MultiGraph(['a'], [('e', 'a', 'b')])
    with pytest.raises(GraphModelError):
        MultiGraph(['a', 'b'], [('e', 'a', 'b'), ('e', 'b', 'a')])


def test_loops_count_twice_in_degree():
    g = MultiGraph(['a'], [('l', 'a', 'a')])
    assert g.degree('a') == 2
    assert g.edge('l').is_loop


def test_smoothing_a_path_leaves_one_edge():
    sg = smooth(path_graph(5))
    assert len(sg.topo_edges) == 1
    edge = next(iter(sg.topo_edges.values()))
    assert {edge.u, edge.v} == {'p0', 'p5'}
    assert len(edge.chain) == 5


def test_smoothing_a_cycle_gives_a_circle():
    sg = smooth(cycle_graph(4))
    assert len(sg.circles) == 1
    assert sg.branch_vertices == ()


def test_homeomorphic_ignores_subdivision():
    assert homeomorphic(path_graph(1), path_graph(7))
    assert homeomorphic(cycle_graph(3), cycle_graph(9))
    assert homeomorphic(theta_graph(), theta_graph(subdivide=3))


def test_non_homeomorphic_pairs():
    assert not homeomorphic(path_graph(2), cycle_graph(3))
    assert not homeomorphic(theta_graph(), cycle_graph(4))


def test_interval_has_two_isomorphisms():
    sg = smooth(path_graph(3))
    isos = enumerate_isomorphisms(sg, smooth(path_graph(1)))
    assert len(isos) == 2
    assert sorted(flipped for iso in isos for _, _, flipped in iso.edge_map) == [False, True]


def test_theta_enumerates_parallel_permutations():
    isos = enumerate_isomorphisms(smooth(theta_graph()), smooth(theta_graph(subdivide=1)))
    # 2 vertex maps times 3! edge permutations
    assert len(isos) == 12


def test_enumeration_cap():
    with pytest.raises(EnumerationCapExceeded):
        enumerate_isomorphisms(smooth(theta_graph()), smooth(theta_graph()), cap=3)


def test_enumeration_is_deterministic():
    a = enumerate_isomorphisms(smooth(theta_graph()), smooth(theta_graph()))
    b = enumerate_isomorphisms(smooth(theta_graph()), smooth(theta_graph()))
    assert a == b


def test_graph_map_checks_endpoints():
    graph = MultiGraph(['a', 'b'], [('e', 'a', 'b')])
    with pytest.raises(GraphModelError):
        GraphMap(graph, {'a': [0, 0], 'b': [1, 0]}, {'e': Polyline([[0, 0], [2, 0]])})


def test_graph_map_rejects_mixed_dimensions():
    graph = MultiGraph(['a', 'b'], [('e', 'a', 'b')])
    with pytest.raises(GraphModelError):
        GraphMap(graph, {'a': [0, 0, 0], 'b': [1, 0, 0]}, {'e': Polyline([[0, 0], [1, 0]])})


def test_path_graph_map_carries_curve():
    c = Polyline([[0, 0], [1, 1], [2, 0]])
    m = path_graph_map(c)
    assert np.allclose(m.point('a'), [0, 0])
    assert m.curve('e') is c


def test_closed_loop_of_cycle_map():
    m = cycle_graph_map([[0, 0], [1, 0], [1, 1], [0, 1]])
    sg = smooth(m.graph)
    loop = closed_loop(m, sg.topo_edges[sg.circles[0]])
    assert np.allclose(loop.start, loop.end)
    assert loop.size == 5


def test_rotate_circle_map_keeps_image():
    m = cycle_graph_map([[0, 0], [1, 0], [1, 1], [0, 1]])
    rotated = rotate_circle_map(m, 1)
    assert np.allclose(rotated.point('v0'), [1, 0])
    assert np.allclose(rotated.curve('e0').vertices, m.curve('e1').vertices)
    with pytest.raises(GraphModelError):
        rotate_circle_map(path_graph_map(Polyline([[0, 0], [1, 0]])), 1)


def test_straight_graph_map_accepts_polyline_edges():
    m = straight_graph_map({'u': [0, 0], 'v': [2, 0]},
                           [('s', 'u', 'v'), ('t', 'u', 'v', [[0, 0], [1, 1], [2, 0]])])
    assert m.curve('s').size == 2
    assert m.curve('t').size == 3


def graph(vertices, edges):
    return MultiGraph(vertices, [(f"e{i}", u, v) for i, (u, v) in enumerate(edges)])


def triangle_with_chord():
    return graph('abcd', [('a', 'b'), ('b', 'c'), ('c', 'a'), ('c', 'd'), ('d', 'a')])


# pairwise non-homeomorphic shapes with at most 6 edges
BASE_SHAPES = {
    'interval': graph('ab', [('a', 'b')]),
    'circle': graph('abc', [('a', 'b'), ('b', 'c'), ('c', 'a')]),
    'theta': graph('ab', [('a', 'b'), ('a', 'b'), ('a', 'b')]),
    'wedge': graph('a', [('a', 'a'), ('a', 'a')]),
    'dumbbell': graph('ab', [('a', 'a'), ('a', 'b'), ('b', 'b')]),
    'star': graph('oabc', [('o', 'a'), ('o', 'b'), ('o', 'c')]),
    'lollipop': graph('abcd', [('a', 'b'), ('b', 'c'), ('c', 'a'), ('a', 'd')]),
    'k4': graph('abcd', [('a', 'b'), ('a', 'c'), ('a', 'd'), ('b', 'c'), ('b', 'd'), ('c', 'd')]),
}


def subdivide_edge(g, edge_id):
    mid = f"m_{edge_id}"
    edges = []
    for e in g.edges:
        if e.edge_id == edge_id:
            edges += [(f"{edge_id}a", e.u, mid), (f"{edge_id}b", mid, e.v)]
        else:
            edges.append((e.edge_id, e.u, e.v))
    return MultiGraph(list(g.vertex_ids) + [mid], edges)


def random_subdivision(g, rng, max_edges=6):
    while len(g.edges) < max_edges and rng.random() < 0.6:
        g = subdivide_edge(g, g.edges[int(rng.integers(len(g.edges)))].edge_id)
    return g


def test_theta_and_triangle_with_chord_are_homeomorphic():
    assert homeomorphic(theta_graph(), triangle_with_chord())
    assert len(enumerate_isomorphisms(smooth(theta_graph()), smooth(triangle_with_chord()))) == 12


def test_homeomorphism_is_an_equivalence_relation():
    rng = np.random.default_rng(5)
    pool = []
    for name, g in BASE_SHAPES.items():
        pool.append((name, g))
        pool.append((name, random_subdivision(g, rng)))
    related = [[homeomorphic(g, h) for _, h in pool] for _, g in pool]
    n = len(pool)
    for i in range(n):
        assert related[i][i]
        for j in range(n):
            assert related[i][j] == related[j][i]
            assert related[i][j] == (pool[i][0] == pool[j][0])
            for k in range(n):
                if related[i][j] and related[j][k]:
                    assert related[i][k]


def test_smoothing_is_idempotent():
    rng = np.random.default_rng(6)
    for g in list(BASE_SHAPES.values()) + [cycle_graph(5), theta_graph(subdivide=2)]:
        once = smooth(random_subdivision(g, rng))
        twice = smooth(once.graph)
        assert twice.structure_key() == once.structure_key()
        assert len(twice.circles) == len(once.circles)


def brute_force_isomorphisms(sg, sh):
    """Every vertex bijection and edge bijection that respects endpoints"""
    gv, hv = list(sg.branch_vertices), list(sh.branch_vertices)
    ge = [t for t in sg.topo_edges.values() if not t.is_circle]
    he = [t for t in sh.topo_edges.values() if not t.is_circle]
    found = set()
    if len(gv) != len(hv) or len(ge) != len(he):
        return found
    for image in itertools.permutations(hv):
        sigma = dict(zip(gv, image))
        for perm in itertools.permutations(he):
            if any({sigma[g.u], sigma[g.v]} != {h.u, h.v} for g, h in zip(ge, perm)):
                continue
            flip_options = [(False, True) if g.u == g.v else (sigma[g.u] != h.u,) for g, h in zip(ge, perm)]
            for flips in itertools.product(*flip_options):
                edge_map = tuple(sorted((g.edge_id, h.edge_id, f) for g, h, f in zip(ge, perm, flips)))
                found.add((tuple(sorted(sigma.items())), edge_map))
    return found


def test_enumeration_matches_brute_force():
    shapes = list(BASE_SHAPES.values()) + [
        graph('ab', [('a', 'b')] * 5),
        graph('ab', [('a', 'b'), ('a', 'b'), ('a', 'b'), ('a', 'a')]),
        graph('a', [('a', 'a')] * 3),
    ]
    for g in shapes:
        sg = smooth(g)
        if sg.circles:
            continue
        for sh in (sg, smooth(subdivide_edge(g, g.edges[0].edge_id))):
            assert len(sh.topo_edges) <= 8
            isos = enumerate_isomorphisms(sg, sh)
            listed = {(iso.vertex_map, iso.edge_map) for iso in isos}
            assert len(listed) == len(isos)
            assert listed == brute_force_isomorphisms(sg, sh)
