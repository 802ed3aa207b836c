#!/usr/bin/env python3
"""
Tests for environment-driven configuration
"""

import os
import sys

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from frechet_config import FrechetConfig


def test_defaults_without_environment(monkeypatch):
    for name in ('FRECHET_SEED', 'FRECHET_TOL', 'FRECHET_FRAMES', 'FRECHET_REPORT_TIMING'):
        monkeypatch.delenv(name, raising=False)
    cfg = FrechetConfig().load_from_environment()
    assert cfg.seed == 0
    assert cfg.tol == 1e-6
    assert cfg.frames == 64
    assert cfg.report_timing is False


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv('FRECHET_SEED', '17')
    monkeypatch.setenv('FRECHET_TOL', '1e-4')
    monkeypatch.setenv('FRECHET_REPORT_TIMING', 'True')
    monkeypatch.setenv('FRECHET_LOG_LEVEL', 'debug')
    cfg = FrechetConfig().load_from_environment()
    assert cfg.seed == 17
    assert cfg.tol == 1e-4
    assert cfg.report_timing is True
    assert cfg.log_level == 'DEBUG'


def test_bad_values_fall_back(monkeypatch):
    monkeypatch.setenv('FRECHET_FRAMES', 'many')
    monkeypatch.setenv('FRECHET_LIFT_BUMP', 'high')
    cfg = FrechetConfig().load_from_environment()
    assert cfg.frames == 64
    assert cfg.lift_bump == 0.0


def test_tolerances_follow_config(monkeypatch):
    monkeypatch.setenv('FRECHET_TOL', '0.001')
    tol = FrechetConfig().load_from_environment().tolerances()
    assert tol.eps_dist == 0.001
    assert tol.eps_param == 1e-9
