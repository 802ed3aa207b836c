#!/usr/bin/env python3
"""
Tests for the discrete, continuous, path and graph Fréchet engines
"""

import math
import os
import sys

import numpy as np
import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from frechet import (continuous_frechet, coupled_distance, discrete_frechet, extract_matching,
                     free_space_decision, frechet_enclosure, graph_frechet, graph_frechet_match,
                     matching_for, path_frechet)
from frechet_errors import DecisionError, DimensionMismatch
from geometry import Polyline, Reparameterization, Tolerances, apply_affine, random_rotation, reparameterize, reverse
from graph_model import cycle_graph_map, path_graph_map, rotate_circle_map

TOL = Tolerances()

FLAT = Polyline([[0, 0], [2, 0]])
TENT = Polyline([[0, 0], [1, 1], [2, 0]])


def random_curve(rng, n=6, dim=2):
    return Polyline(rng.uniform(-1, 1, size=(n, dim)))


def test_discrete_parallel_segments():
    assert discrete_frechet(Polyline([[0, 0], [1, 0]]), Polyline([[0, 1], [1, 1]])) == pytest.approx(1.0)


def test_discrete_exceeds_continuous_on_tent():
    assert discrete_frechet(FLAT, TENT) == pytest.approx(math.sqrt(2))
    assert continuous_frechet(FLAT, TENT, TOL) == pytest.approx(1.0, abs=TOL.eps_dist)


def test_decision_brackets_the_distance():
    assert not free_space_decision(FLAT, TENT, 0.99)[0]
    assert free_space_decision(FLAT, TENT, 1.01)[0]


def test_decision_rejects_negative_epsilon():
    with pytest.raises(DecisionError):
        free_space_decision(FLAT, TENT, -1.0)


def test_enclosure_is_tight_and_above_endpoints():
    rng = np.random.default_rng(11)
    p, q = random_curve(rng), random_curve(rng, n=8)
    enc = frechet_enclosure(p, q, TOL)
    assert enc.width <= TOL.eps_dist
    ends = max(np.linalg.norm(p.start - q.start), np.linalg.norm(p.end - q.end))
    assert enc.lo >= ends - 1e-12
    assert enc.hi <= discrete_frechet(p, q) + 1e-12


def test_point_curve_distance():
    point = Polyline([[0.0, 0.0]])
    assert continuous_frechet(point, Polyline([[0, 0], [3, 4]]), TOL) == pytest.approx(5.0)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        continuous_frechet(FLAT, Polyline([[0, 0, 0], [1, 0, 0]]), TOL)


def test_extract_matching_requires_true_decision():
    ok, fsd = free_space_decision(FLAT, TENT, 0.5)
    assert not ok
    with pytest.raises(DecisionError):
        extract_matching(fsd, FLAT, TENT)


def test_matching_realizes_the_distance():
    rng = np.random.default_rng(5)
    p, q = random_curve(rng, 7), random_curve(rng, 5)
    matching, enc = matching_for(p, q, TOL)
    assert np.all(np.diff(matching.s) >= 0) and np.all(np.diff(matching.t) >= 0)
    assert tuple(matching.breakpoints[0]) == (0.0, 0.0)
    assert tuple(matching.breakpoints[-1]) == (1.0, 1.0)
    assert matching.realized_sup <= enc.hi + TOL.eps_dist + 1e-12


def test_reparameterization_has_distance_zero():
    rng = np.random.default_rng(2)
    p = random_curve(rng, 10)
    q = reparameterize(p, Reparameterization.random(rng, 5))
    assert continuous_frechet(p, q, TOL) <= TOL.eps_dist
    assert coupled_distance(p, q) > 0.0


def test_metric_axioms_on_random_triples():
    rng = np.random.default_rng(7)
    for _ in range(5):
        p, q, r = (random_curve(rng, int(rng.integers(5, 10))) for _ in range(3))
        d_pq = continuous_frechet(p, q, TOL)
        assert continuous_frechet(p, p, TOL) <= TOL.eps_dist
        assert abs(d_pq - continuous_frechet(q, p, TOL)) <= 2 * TOL.eps_dist
        assert continuous_frechet(p, r, TOL) <= d_pq + continuous_frechet(q, r, TOL) + 3 * TOL.eps_dist


def test_rigid_motion_invariance():
    rng = np.random.default_rng(9)
    p, q = random_curve(rng, 6, 3), random_curve(rng, 6, 3)
    rot = random_rotation(3, rng)
    offset = rng.normal(size=3)
    moved = continuous_frechet(apply_affine(p, rot, offset), apply_affine(q, rot, offset), TOL)
    assert moved == pytest.approx(continuous_frechet(p, q, TOL), abs=2 * TOL.eps_dist)


def test_oriented_and_unoriented_path_distance():
    seg = Polyline([[0.0], [1.0]])
    assert path_frechet(seg, reverse(seg), oriented=True, tol=TOL) == pytest.approx(1.0, abs=TOL.eps_dist)
    assert path_frechet(seg, reverse(seg), oriented=False, tol=TOL) <= TOL.eps_dist


def test_interval_graph_distance_is_unoriented():
    rng = np.random.default_rng(4)
    p, q = random_curve(rng, 6), random_curve(rng, 5)
    d_graph = graph_frechet(path_graph_map(p), path_graph_map(q), TOL)
    assert d_graph == pytest.approx(path_frechet(p, q, oriented=False, tol=TOL), abs=2 * TOL.eps_dist)


def test_non_homeomorphic_graphs_are_infinitely_far():
    interval = path_graph_map(Polyline([[0, 0], [1, 0]]))
    triangle = cycle_graph_map([[0, 0], [1, 0], [0, 1]])
    assert math.isinf(graph_frechet(interval, triangle, TOL))


def test_rotated_cycle_is_at_distance_zero():
    angles = np.linspace(0, 2 * math.pi, 6, endpoint=False)
    m = cycle_graph_map(np.column_stack([np.cos(angles), np.sin(angles)]))
    match = graph_frechet_match(m, rotate_circle_map(m, 2), TOL)
    assert match.distance <= TOL.eps_dist
    assert len(match.circle_starts) == 1


def test_translated_cycle_costs_the_translation():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    a = cycle_graph_map(square)
    b = cycle_graph_map(square + [0.3, 0.0])
    assert graph_frechet(a, b, TOL) == pytest.approx(0.3, abs=TOL.eps_dist)
