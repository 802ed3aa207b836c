#!/usr/bin/env python3
"""
Tests for polylines, restriction/concatenation, Hausdorff and self-contacts
"""

import math
import os
import sys

import numpy as np
import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from frechet_errors import DimensionMismatch, GeometryError
from geometry import (Polyline, Reparameterization, Tolerances, apply_affine, concat, concat_many, diameter,
                      hausdorff_distance, hausdorff_estimate, point_to_polyline_distance,
                      polyline_length, random_rotation, reparameterize, restrict, reverse,
                      self_intersections, zero_extend)

TOL = Tolerances()


def test_default_params_are_chord_length():
    c = Polyline([[0, 0], [1, 0], [1, 3]])
    assert np.allclose(c.params, [0.0, 0.25, 1.0])


def test_single_vertex_is_constant_path():
    c = Polyline([[2.0, 1.0]])
    assert c.size == 1
    assert np.allclose(c.evaluate(0.7), [2.0, 1.0])
    assert polyline_length(c) == 0.0


def test_invalid_polylines_are_rejected():
    with pytest.raises(GeometryError):
        Polyline([])
    with pytest.raises(GeometryError):
        Polyline([[0.0, math.nan]])
    with pytest.raises(GeometryError):
        Polyline([[0, 0], [1, 0], [2, 0]], params=[0.0, 0.7, 0.5])
    with pytest.raises(GeometryError):
        Polyline([[0, 0], [1, 0]], params=[0.1, 1.0])


def test_length_and_evaluate():
    c = Polyline([[0, 0], [3, 0], [3, 4]])
    assert polyline_length(c) == pytest.approx(7.0)
    assert np.allclose(c.evaluate(3.0 / 7.0), [3.0, 0.0])
    assert np.allclose(c.evaluate([0.0, 1.0]), [[0, 0], [3, 4]])


def test_reverse_is_involution():
    c = Polyline([[0, 0], [1, 2], [4, 2], [5, -1]])
    r = reverse(c)
    assert np.allclose(r.start, c.end)
    assert np.allclose(r.evaluate(0.3), c.evaluate(0.7))
    assert reverse(r).allclose(c)


def test_restrict_renormalizes():
    c = Polyline([[0, 0], [2, 0]])
    piece = restrict(c, 0.25, 0.75)
    assert np.allclose(piece.vertices, [[0.5, 0], [1.5, 0]])
    assert np.allclose(piece.params, [0.0, 1.0])
    with pytest.raises(GeometryError):
        restrict(c, 0.6, 0.6)


def test_restrict_keeps_interior_vertices():
    c = Polyline([[0, 0], [1, 0], [1, 1]])
    piece = restrict(c, 0.25, 0.75)
    assert piece.size == 3
    assert np.allclose(piece.vertices[1], [1, 0])


def test_concat_joins_at_half():
    a = Polyline([[0, 0], [1, 0]])
    b = Polyline([[1, 0], [1, 1], [2, 1]])
    c = concat(a, b, TOL)
    assert np.allclose(c.evaluate(0.5), [1, 0])
    assert np.allclose(c.end, [2, 1])
    with pytest.raises(GeometryError):
        concat(a, Polyline([[5, 5], [6, 6]]), TOL)


def test_concat_many_splits_domain_evenly():
    pieces = [Polyline([[i, 0], [i + 1, 0]]) for i in range(4)]
    c = concat_many(pieces, TOL)
    assert np.allclose(c.params, [0, 0.25, 0.5, 0.75, 1.0])


def test_dimension_mismatch_is_reported():
    with pytest.raises(DimensionMismatch):
        concat(Polyline([[0, 0], [1, 0]]), Polyline([[1, 0, 0], [2, 0, 0]]), TOL)


def test_zero_extend_pads_coordinates():
    c = zero_extend(Polyline([[1, 2], [3, 4]]), 4)
    assert c.dim == 4
    assert np.allclose(c.vertices[:, 2:], 0.0)
    with pytest.raises(GeometryError):
        zero_extend(c, 2)


def test_diameter_attained_at_vertices():
    c = Polyline([[0, 0], [3, 0], [3, 4]])
    assert diameter(c) == pytest.approx(5.0)


def test_point_to_polyline_distance_is_exact():
    c = Polyline([[0, 0], [2, 0]])
    d = point_to_polyline_distance([[1, 1], [3, 0], [-1, -1]], c)
    assert np.allclose(d, [1.0, 1.0, math.sqrt(2)])


def test_hausdorff_of_parallel_segments():
    a = Polyline([[0, 0], [1, 0]])
    b = Polyline([[0, 1], [1, 1]])
    assert hausdorff_distance(a, b, TOL) == pytest.approx(1.0)


def test_hausdorff_estimate_brackets_value():
    a = Polyline([[0, 0], [1, 0], [1, 1]])
    b = Polyline([[0, 0.2], [0.5, 0.6], [1.2, 1.0]])
    est = hausdorff_estimate(a, b, TOL)
    assert est.lower <= est.upper
    assert est.lower == est.value


def test_hausdorff_ignores_parameterization():
    a = Polyline([[0, 0], [1, 0], [2, 1]])
    assert hausdorff_distance(a, reverse(a), TOL) == pytest.approx(0.0, abs=1e-12)


def test_reparameterization_keeps_image():
    rng = np.random.default_rng(3)
    c = Polyline([[0, 0], [1, 0], [1, 1], [0, 1]])
    h = Reparameterization.random(rng, 4)
    rc = reparameterize(c, h)
    assert np.allclose(rc.start, c.start) and np.allclose(rc.end, c.end)
    for t in np.linspace(0, 1, 11):
        assert np.allclose(rc.evaluate(t), c.evaluate(h(t)))


def test_reparameterization_validates_breakpoints():
    with pytest.raises(GeometryError):
        Reparameterization((0.0, 0.5, 1.0), (0.0, 0.6, 0.9))
    with pytest.raises(GeometryError):
        Reparameterization((0.0, 0.5, 0.4, 1.0), (0.0, 0.2, 0.3, 1.0))


def test_self_intersections_of_figure_eight():
    c = Polyline([[0, 0], [2, 2], [2, 0], [0, 2]])
    contacts = self_intersections(c, TOL)
    assert len(contacts) == 1
    assert contacts[0].kind == 'crossing'
    assert np.allclose(contacts[0].point, [1.0, 1.0])


def test_simple_path_has_no_self_contacts():
    c = Polyline([[0, 0], [1, 0], [1, 1], [0, 1]])
    assert self_intersections(c, TOL) == []


def test_fold_back_reports_overlap():
    c = Polyline([[0, 0], [2, 0], [1, 0]])
    contacts = self_intersections(c, TOL)
    assert [x.kind for x in contacts] == ['overlap']


def test_tolerances_reject_negative_values():
    with pytest.raises(GeometryError):
        Tolerances(eps_dist=-1.0)


def rigid_motion(rng, dim):
    return random_rotation(dim, rng), rng.uniform(-5.0, 5.0, size=dim)


def test_length_and_hausdorff_are_isometry_invariant():
    rng = np.random.default_rng(11)
    for dim in (2, 3):
        for _ in range(10):
            a = Polyline(rng.uniform(-1.0, 1.0, size=(int(rng.integers(2, 12)), dim)))
            b = Polyline(rng.uniform(-1.0, 1.0, size=(int(rng.integers(2, 12)), dim)))
            rot, shift = rigid_motion(rng, dim)
            ma, mb = apply_affine(a, rot, shift), apply_affine(b, rot, shift)
            assert polyline_length(ma) == pytest.approx(polyline_length(a), abs=1e-9)
            assert hausdorff_distance(ma, mb, TOL) == pytest.approx(hausdorff_distance(a, b, TOL), abs=1e-9)


def test_self_intersections_are_isometry_invariant():
    rng = np.random.default_rng(12)
    curves = [Polyline([[0, 0], [2, 2], [2, 0], [0, 2]]), Polyline([[0, 0], [2, 0], [1, 0], [1, 1]])]
    curves += [Polyline(rng.uniform(0.0, 1.0, size=(8, 2))) for _ in range(8)]
    for c in curves:
        before = sorted(self_intersections(c, TOL), key=lambda x: x.params)
        for dim in (2, 3):
            rot, shift = rigid_motion(rng, dim)
            moved = apply_affine(zero_extend(c, dim), rot, shift)
            after = sorted(self_intersections(moved, TOL), key=lambda x: x.params)
            assert [x.kind for x in after] == [x.kind for x in before]
            for x, y in zip(before, after):
                assert np.allclose(x.params, y.params, atol=1e-9)
                expected = rot @ np.concatenate([x.point, np.zeros(dim - 2)]) + shift
                assert np.allclose(y.point, expected, atol=1e-9)


def test_hausdorff_symmetry_and_triangle_inequality():
    rng = np.random.default_rng(13)
    for _ in range(20):
        a, b, c = (Polyline(rng.uniform(0.0, 1.0, size=(int(rng.integers(2, 10)), 2))) for _ in range(3))
        ab, bc, ac = hausdorff_estimate(a, b, TOL), hausdorff_estimate(b, c, TOL), hausdorff_estimate(a, c, TOL)
        error = max(ab.error, bc.error, ac.error)
        assert abs(ab.value - hausdorff_estimate(b, a, TOL).value) <= 2 * error + 1e-12
        assert ac.value <= ab.value + bc.value + 2 * error + 1e-12
