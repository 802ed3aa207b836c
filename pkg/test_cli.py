#!/usr/bin/env python3
"""
Tests for the command line: subcommands, outputs and exit codes
"""

import json
import math
import os
import sys

import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from frechet_cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, format_bracket, format_value, run_command
from frechet_io import read_frames_jsonl


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def flat(tmp_path):
    return write(tmp_path, 'flat.json', {'dim': 2, 'vertices': [[0, 0], [2, 0]]})


@pytest.fixture
def tent(tmp_path):
    return write(tmp_path, 'tent.json', {'dim': 2, 'vertices': [[0, 0], [1, 1], [2, 0]]})


@pytest.fixture
def triangle(tmp_path):
    return write(tmp_path, 'triangle.json', {
        'dim': 2,
        'vertices': {'a': [0, 0], 'b': [1, 0], 'c': [0, 1]},
        'edges': [{'id': 'ab', 'from': 'a', 'to': 'b'},
                  {'id': 'bc', 'from': 'b', 'to': 'c'},
                  {'id': 'ca', 'from': 'c', 'to': 'a'}],
    })


def parse_bracket(text):
    lo, hi = text.strip().strip('[]').split(',')
    return float(lo), float(hi)


def test_formatting():
    assert format_value(math.inf) == 'inf'
    assert format_value(1.5) == '1.5'
    assert format_bracket(0.25, math.inf) == '[0.25, inf]'


def test_dist_discrete(flat, tent, capsys):
    assert run_command(['dist', flat, tent, '--kind', 'discrete']) == EXIT_OK
    assert float(capsys.readouterr().out) == pytest.approx(math.sqrt(2))


def test_dist_continuous_prints_bracket(flat, tent, capsys):
    assert run_command(['dist', flat, tent]) == EXIT_OK
    lo, hi = parse_bracket(capsys.readouterr().out)
    assert lo <= 1.0 + 1e-9 and hi >= 1.0 - 1e-9
    assert hi - lo <= 1e-6


def test_dist_path_unoriented(tmp_path, flat, capsys):
    backwards = write(tmp_path, 'back.json', {'dim': 2, 'vertices': [[2, 0], [0, 0]]})
    assert run_command(['dist', flat, backwards, '--kind', 'path']) == EXIT_OK
    lo, hi = parse_bracket(capsys.readouterr().out)
    assert hi <= 1e-6
    assert run_command(['dist', flat, backwards, '--kind', 'path', '--oriented']) == EXIT_OK
    lo, hi = parse_bracket(capsys.readouterr().out)
    assert lo >= 2.0 - 1e-6


def test_dist_graph_across_homeomorphism_types(flat, triangle, capsys):
    assert run_command(['dist', flat, triangle, '--kind', 'graph']) == EXIT_OK
    assert capsys.readouterr().out.strip() == '[inf, inf]'


def test_classify_writes_report(tmp_path, capsys):
    eight = write(tmp_path, 'eight.json', {'dim': 2, 'vertices': [[0, 0], [2, 2], [2, 0], [0, 2]]})
    out = tmp_path / 'class.json'
    assert run_command(['classify', eight, '--out', str(out)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == 'I'
    assert json.loads(out.read_text())['class'] == 'I'


def test_morph_writes_frames_and_svg(tmp_path, flat, tent, capsys):
    frames = tmp_path / 'frames.jsonl'
    strip = tmp_path / 'strip.svg'
    code = run_command(['morph', flat, tent, '--class', 'C', '--frames', '5',
                        '--out', str(frames), '--svg', str(strip), '--verify'])
    assert code == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary['frames'] == 5
    assert summary['verification']['passed']
    records = read_frames_jsonl(frames)
    assert [r['t'] for r in records] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert strip.read_text().lstrip().startswith('<?xml')


def test_morph_frames_is_the_uniform_base_count(tmp_path, capsys):
    a = write(tmp_path, 'a.json', {'dim': 2, 'vertices': [[0, 0], [4, 0]]})
    b = write(tmp_path, 'b.json', {'dim': 2, 'vertices': [[4, 0], [0, 0]]})
    out = tmp_path / 'frames.jsonl'
    assert run_command(['morph', a, b, '--frames', '9', '--out', str(out)]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    times = [r['t'] for r in read_frames_jsonl(out)]
    assert len(times) == summary['frames'] > 9
    assert {k / 8 for k in range(9)} <= set(times)
    assert any(e['maneuver_applied'] == 'rotate_pi' for e in summary['events'])


def test_obstructed_morph_exits_one(tmp_path, capsys):
    a = write(tmp_path, 'a.json', {'dim': 1, 'vertices': [[0], [1]]})
    b = write(tmp_path, 'b.json', {'dim': 1, 'vertices': [[1], [0]]})
    out = tmp_path / 'frames.jsonl'
    assert run_command(['morph', a, b, '--frames', '9', '--out', str(out)]) == EXIT_FAILED
    summary = json.loads(capsys.readouterr().out)
    assert summary['obstruction']['constraint'] == 'dimension'
    assert out.exists()


def test_bad_json_is_a_usage_error(tmp_path, flat, capsys):
    broken = write(tmp_path, 'broken.json', {'dim': 2, 'vertices': [[0, 0], [1]]})
    assert run_command(['dist', flat, broken]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert err.startswith('error: ')
    assert 'vertices[1]' in err


def test_missing_file_is_a_usage_error(tmp_path, flat, capsys):
    assert run_command(['dist', flat, str(tmp_path / 'nope.json')]) == EXIT_USAGE
    assert capsys.readouterr().err.startswith('error: ')


def test_unknown_option_is_a_usage_error(flat, tent, capsys):
    assert run_command(['dist', flat, tent, '--kind', 'fuzzy']) == EXIT_USAGE
    assert 'error:' in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert run_command(['--help']) == EXIT_OK
    assert 'morph' in capsys.readouterr().out


def test_verify_gallery_writes_report(tmp_path, capsys):
    report = tmp_path / 'gallery.json'
    code = run_command(['verify', '--suite', 'gallery', '--frames', '16', '--report', str(report)])
    assert code == EXIT_OK
    data = json.loads(report.read_text())
    assert data['suite'] == 'gallery' and data['pass'] is True
    assert 'PASS  gallery' in capsys.readouterr().out
