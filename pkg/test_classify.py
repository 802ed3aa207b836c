#!/usr/bin/env python3
"""
Tests for C / I / E classification of curves and graph-maps
"""

import logging
import os
import sys

import numpy as np
import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from classify import (CurveClass, classify, classify_graph_map, classify_path, detect_backtracking,
                      detect_pauses)
from geometry import Polyline, Tolerances, apply_affine, random_rotation, reverse, zero_extend
from graph_model import cycle_graph_map, straight_graph_map

TOL = Tolerances()


def test_class_order():
    assert CurveClass.C.admits(CurveClass.E)
    assert CurveClass.I.admits(CurveClass.E)
    assert not CurveClass.E.admits(CurveClass.I)
    assert CurveClass.parse('immersion') is CurveClass.I
    with pytest.raises(ValueError):
        CurveClass.parse('smooth')


def test_pause_detection():
    c = Polyline([[0, 0], [1, 0], [1, 0], [2, 0]], params=[0.0, 0.3, 0.6, 1.0])
    assert detect_pauses(c, TOL) == [(0.3, 0.6)]
    assert classify_path(c, TOL).class_label is CurveClass.C


def test_constant_curve_is_one_pause():
    assert detect_pauses(Polyline([[1.0, 1.0]]), TOL) == [(0.0, 1.0)]


def test_backtracking_detection():
    c = Polyline([[0, 0], [2, 0], [1, 0]])
    found = detect_backtracking(c, TOL)
    assert len(found) == 1
    assert found[0] == pytest.approx(c.params[1])
    assert classify_path(c, TOL).class_label is CurveClass.C


def test_sharp_turn_is_not_a_backtrack():
    c = Polyline([[0, 0], [2, 0], [0, 0.01]])
    assert detect_backtracking(c, TOL) == []


def test_crossing_makes_an_immersion():
    c = Polyline([[0, 0], [2, 2], [2, 0], [0, 2]])
    report = classify_path(c, TOL)
    assert report.class_label is CurveClass.I
    assert len(report.self_contacts) == 1
    assert report.meets('I') and not report.meets('E')


def test_simple_arc_is_an_embedding():
    report = classify(Polyline([[0, 0], [1, 0], [1, 1]]), TOL)
    assert report.class_label is CurveClass.E
    assert report.summary() == ('E', 0, 0, 0, 0)


def test_cycle_graph_map_is_an_embedding():
    m = cycle_graph_map([[0, 0], [1, 0], [1, 1], [0, 1]])
    assert classify_graph_map(m, TOL).class_label is CurveClass.E


def test_crossing_edges_make_an_immersion():
    m = straight_graph_map({'a': [0, 0], 'b': [1, 1], 'c': [0, 1], 'd': [1, 0]},
                           [('ab', 'a', 'b'), ('cd', 'c', 'd')])
    report = classify_graph_map(m, TOL)
    assert report.class_label is CurveClass.I
    assert report.self_contacts[0].edges == ('ab', 'cd')


def test_vertex_injectivity_failure():
    # two edges leave 'o' in the same direction
    m = straight_graph_map({'o': [0, 0], 'x': [1, 0], 'y': [2, 0]},
                           [('ox', 'o', 'x'), ('oy', 'o', 'y')])
    report = classify_graph_map(m, TOL)
    assert 'o' in report.vertex_violations
    assert report.class_label is CurveClass.C


def test_report_serializes():
    data = classify(Polyline([[0, 0], [2, 2], [2, 0], [0, 2]]), TOL).to_dict()
    assert data['class'] == 'I'
    assert data['self_contacts'][0]['kind'] == 'crossing'


def test_figure_eight_wedge_is_an_immersion():
    m = straight_graph_map({'o': [0, 0]}, [
        ('a', 'o', 'o', [[0, 0], [4, 1], [4, -1], [0, 0]]),
        ('b', 'o', 'o', [[0, 0], [2, -3], [2, 3], [0, 0]]),
    ])
    report = classify_graph_map(m, TOL)
    assert report.class_label is CurveClass.I
    assert report.pauses == [] and report.backtracks == [] and report.vertex_violations == []
    assert report.self_contacts
    assert all(c.kind == 'crossing' for c in report.self_contacts)


def subdivide(c, fraction=0.37):
    """Insert a collinear vertex inside every segment"""
    verts, params = [c.vertices[0]], [c.params[0]]
    for k in range(c.size - 1):
        a, b = c.vertices[k], c.vertices[k + 1]
        verts += [a + fraction * (b - a), b]
        params += [c.params[k] + fraction * (c.params[k + 1] - c.params[k]), c.params[k + 1]]
    return Polyline(np.array(verts), np.array(params))


def sample_curves():
    rng = np.random.default_rng(21)
    curves = [
        Polyline([[0, 0], [2, 0], [1, 0]]),
        Polyline([[0, 0], [1, 0], [1, 0], [2, 0]], params=[0.0, 0.3, 0.6, 1.0]),
        Polyline([[0, 0], [2, 2], [2, 0], [0, 2]]),
        Polyline([[0, 0], [1, 0], [1, 1]]),
    ]
    for _ in range(20):
        curves.append(Polyline(rng.uniform(0.0, 1.0, size=(int(rng.integers(3, 9)), 2))))
    for _ in range(5):
        curves.append(Polyline(rng.uniform(0.0, 1.0, size=(int(rng.integers(3, 9)), 3))))
    return rng, curves


def test_class_survives_subdivision_and_reversal():
    _, curves = sample_curves()
    for c in curves:
        label = classify_path(c, TOL).class_label
        assert classify_path(subdivide(c), TOL).class_label is label
        assert classify_path(reverse(c), TOL).class_label is label


def test_class_survives_rigid_motions():
    rng, curves = sample_curves()
    for c in curves:
        report = classify_path(c, TOL)
        for dim in (c.dim, 3):
            moved = apply_affine(zero_extend(c, dim), random_rotation(dim, rng), rng.uniform(-3.0, 3.0, size=dim))
            moved_report = classify_path(moved, TOL)
            assert moved_report.class_label is report.class_label
            assert len(moved_report.self_contacts) == len(report.self_contacts)
            assert len(moved_report.backtracks) == len(report.backtracks)


def test_grazing_reversal_and_vertex_failures_are_warnings(caplog):
    with caplog.at_level(logging.WARNING, logger='classify'):
        classify_path(Polyline([[0, 0], [2, 0], [0, 0.0005]]), TOL)
        classify_graph_map(straight_graph_map({'o': [0, 0], 'x': [1, 0], 'y': [2, 0]},
                                              [('ox', 'o', 'x'), ('oy', 'o', 'y')]), TOL)
    messages = [r.getMessage() for r in caplog.records if r.levelno == logging.WARNING]
    assert any('grazing reversal' in m for m in messages)
    assert any('Vertex injectivity' in m for m in messages)
