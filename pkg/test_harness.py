#!/usr/bin/env python3
"""
Tests for the verification harness: suites, witnesses, replay and determinism
"""

import json
import os
import sys

import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from frechet_errors import FormatError
from frechet_io import object_to_json, write_json
from geometry import Polyline, Tolerances
from harness import (PropertyResult, SuiteConfig, SuiteReport, check_immersion, counterexample_gallery,
                     determinism_check, gentle_polyline, load_gallery, random_polyline, replay_witness,
                     run_suite, verify_metric_axioms)

SMALL = dict(trials=2, frames=16, max_vertices=8)


def test_suite_config_validation():
    with pytest.raises(ValueError):
        SuiteConfig(trials=0)
    with pytest.raises(ValueError):
        SuiteConfig(min_vertices=9, max_vertices=4)
    with pytest.raises(ValueError):
        SuiteConfig(frames=1)
    assert SuiteConfig().trial_count('axioms') == 100
    assert SuiteConfig(trials=3).trial_count('balls') == 3


def test_trial_streams_are_independent_of_order():
    cfg = SuiteConfig(seed=42)
    a = random_polyline(cfg.rng(3), 2, 6)
    b = random_polyline(cfg.rng(3), 2, 6)
    assert a.allclose(b)
    assert not a.allclose(random_polyline(cfg.rng(4), 2, 6))


def test_gentle_polyline_is_an_embedding():
    from classify import classify
    cfg = SuiteConfig(seed=1)
    c = gentle_polyline(cfg.rng(0), 3, 10)
    assert classify(c).meets('E')


def test_metric_axioms_pass():
    report = verify_metric_axioms(SuiteConfig(seed=3, **SMALL))
    assert report.passed, [p.to_dict() for p in report.failures()]
    names = {p.name for p in report.properties}
    assert {'identity', 'symmetry', 'triangle', 'non_homeomorphic_infinite'} <= names
    assert report.property('identity').checked == 2


def test_gallery_suite_passes():
    report = counterexample_gallery(SuiteConfig(**SMALL))
    assert report.passed, [p.to_dict() for p in report.failures()]
    for name in ('g1_distance', 'g1_obstruction', 'g2_obstruction',
                 'g3_r3_self_cross_obstruction', 'g3_r4_lift', 'g3_lift_excess'):
        assert report.property(name).passed


def test_gallery_fixtures_decode():
    gallery = load_gallery()
    assert set(gallery) == {'G1', 'G2', 'G3'}
    assert isinstance(gallery['G3']['alpha0'], Polyline)
    assert gallery['G3']['alpha0'].dim == 3


def test_run_suite_rejects_unknown_names():
    with pytest.raises(KeyError):
        run_suite('nope', SuiteConfig(**SMALL))


def test_ball_suite_is_named_by_class_and_dim():
    report = run_suite('balls', SuiteConfig(trials=1, frames=16, max_vertices=6), 'C')
    assert report.suite == 'balls-C-dim2'
    assert report.passed, [p.to_dict() for p in report.failures()]


def test_immersion_check_bounds_dodge_cost():
    outcome = check_immersion({'p': Polyline([[0, 0], [1, 0]]), 'q': Polyline([[1, 0], [0, 0]]), 'frames': 9},
                              Tolerances())
    passed, excess = outcome['dodge_within_slack']
    assert passed and excess <= 1e-6
    assert outcome['frames_immersed'][0]


def test_determinism_check_matches_bytes():
    report = determinism_check(SuiteConfig(seed=9, **SMALL), 'sandwich')
    assert report.passed
    assert report.property('byte_identical').checked == 1


def test_report_json_is_stable():
    cfg = SuiteConfig(seed=5, **SMALL)
    first = json.loads(verify_metric_axioms(cfg).to_json())
    assert first['suite'] == 'axioms'
    assert first['timing_ms'] is None
    assert all('pass' in p for p in first['properties'])


def test_failed_property_writes_replayable_witness(tmp_path):
    p = Polyline([[0, 0], [1, 0], [1, 1]])
    q = Polyline([[0, 1], [2, 1]])
    r = Polyline([[0, 0.5], [1, 2]])
    witness = {
        'suite': 'axioms',
        'property': 'triangle',
        'check': 'axioms',
        'seed': 0,
        'trial': 7,
        'tol': {'eps_dist': 1e-6, 'eps_param': 1e-9, 'theta_tol': 1e-9},
        'inputs': {'p': object_to_json(p), 'q': object_to_json(q), 'r': object_to_json(r)},
    }
    report = SuiteReport('axioms', 0, [PropertyResult('triangle', passed=False, checked=1, failed=1,
                                                      witness=witness)])
    written = report.write(tmp_path / 'report.json')
    assert len(written) == 2
    witness_path = tmp_path / 'report.witness-triangle.json'
    assert witness_path in written
    saved = json.loads(witness_path.read_text())
    assert str(witness_path) in saved['replay']

    replayed = replay_witness(witness_path)
    assert replayed.passed
    assert replayed.property('triangle').checked == 1


def test_replay_rejects_incomplete_witness(tmp_path):
    path = tmp_path / 'broken.json'
    write_json({'check': 'axioms', 'inputs': {}}, path)
    with pytest.raises(FormatError):
        replay_witness(path)
