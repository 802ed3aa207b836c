#!/usr/bin/env python3
"""
Tests for curve / graph JSON, frames JSONL and report JSON codecs
"""

import json
import math
import os
import sys

import numpy as np
import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from frechet_errors import FormatError
from frechet_io import (curve_from_json, curve_to_json, dumps, graph_from_json, graph_to_json, load_object,
                        read_frames_jsonl, read_json, write_frames_jsonl)
from geometry import Polyline, Tolerances
from graph_model import GraphMap
from morph import linear_morph


def field_of(data, decode=curve_from_json):
    with pytest.raises(FormatError) as exc:
        decode(data)
    return exc.value.field


def test_curve_errors_name_the_field():
    assert field_of({'vertices': [[0, 0]]}) == 'dim'
    assert field_of({'dim': 2}) == 'vertices'
    assert field_of({'dim': 2, 'vertices': [[0, 0], [1, 'x']]}) == 'vertices[1][1]'
    assert field_of({'dim': 2, 'vertices': [[0, 0], [1, 0, 0]]}) == 'vertices[1]'
    assert field_of({'dim': 2, 'vertices': [[0, 0], [1, 0]], 'params': [0.0, 0.5]}) == 'params'
    assert field_of([1, 2, 3]) == 'curve'


def test_graph_errors_name_the_field():
    base = {'dim': 2, 'vertices': {'a': [0, 0], 'b': [1, 0]}}
    assert field_of(dict(base, edges=[{'id': 'e', 'from': 'a'}]), graph_from_json) == 'edges[0].to'
    assert field_of(dict(base, edges=[{'id': 'e', 'from': 'a', 'to': 'z'}]), graph_from_json) == 'edges[0].to'
    twice = [{'id': 'e', 'from': 'a', 'to': 'b'}, {'id': 'e', 'from': 'b', 'to': 'a'}]
    assert field_of(dict(base, edges=twice), graph_from_json) == 'edges[1].id'


def test_curve_json_keeps_params():
    c = Polyline([[0, 0], [1, 0], [1, 1]], params=[0.0, 0.2, 1.0])
    back = curve_from_json(curve_to_json(c))
    assert np.allclose(back.params, c.params)


def test_graph_json_defaults_to_straight_edges():
    m = graph_from_json({'dim': 2, 'vertices': {'a': [0, 0], 'b': [1, 0]},
                         'edges': [{'id': 'e', 'from': 'a', 'to': 'b'}]})
    assert isinstance(m, GraphMap)
    assert m.curve('e').size == 2
    assert graph_to_json(m)['edges'][0]['polyline'] == [[0.0, 0.0], [1.0, 0.0]]


def test_invalid_json_text(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text('{"dim": 2,')
    with pytest.raises(FormatError):
        read_json(path)


def test_load_object_picks_graph_or_curve(tmp_path):
    path = tmp_path / 'curve.json'
    path.write_text(json.dumps({'dim': 1, 'vertices': [[0], [2]]}))
    assert isinstance(load_object(path), Polyline)


def test_dumps_is_deterministic_and_writes_inf():
    text = dumps({'b': math.inf, 'a': 1.0})
    assert text.index('"a"') < text.index('"b"')
    assert '"inf"' in text
    assert text.endswith('\n')


def test_frames_jsonl(tmp_path):
    seq = linear_morph(Polyline([[0, 0], [1, 0]]), Polyline([[0, 1], [1, 1]]), 3, Tolerances())
    path = tmp_path / 'frames.jsonl'
    write_frames_jsonl(seq, path)
    records = read_frames_jsonl(path)
    assert [r['t'] for r in records] == [0.0, 0.5, 1.0]
    assert isinstance(records[1]['curve'], Polyline)
    assert records[1]['events'] == []
