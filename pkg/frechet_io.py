#!/usr/bin/env python3
"""
JSON codecs
Curve JSON, graph JSON, frames JSONL and report JSON. Malformed input raises
FormatError naming the offending field; +inf is written as the string "inf"
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from frechet_errors import FormatError, FrechetError
from geometry import Polyline
from graph_model import GraphMap, MultiGraph

logger = logging.getLogger(__name__)


def _number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(field, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise FormatError(field, "must be finite")
    return float(value)


def _point(value, field: str, dim: int) -> List[float]:
    if not isinstance(value, list):
        raise FormatError(field, "expected a coordinate list")
    if len(value) != dim:
        raise FormatError(field, f"expected {dim} coordinates, got {len(value)}")
    return [_number(x, f"{field}[{i}]") for i, x in enumerate(value)]


def _dim(data: dict) -> int:
    if 'dim' not in data:
        raise FormatError('dim', "missing")
    dim = data['dim']
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise FormatError('dim', "must be a positive integer")
    return dim


def _vertex_rows(value, field: str, dim: int) -> List[List[float]]:
    if not isinstance(value, list) or not value:
        raise FormatError(field, "expected a non-empty list of points")
    return [_point(v, f"{field}[{i}]", dim) for i, v in enumerate(value)]


def curve_from_json(data: Any) -> Polyline:
    """{"dim": n, "vertices": [[...], ...], "params": [...] (optional)}"""
    if not isinstance(data, dict):
        raise FormatError('curve', "expected a JSON object")
    dim = _dim(data)
    if 'vertices' not in data:
        raise FormatError('vertices', "missing")
    vertices = _vertex_rows(data['vertices'], 'vertices', dim)
    params = None
    if data.get('params') is not None:
        raw = data['params']
        if not isinstance(raw, list):
            raise FormatError('params', "expected a list of numbers")
        params = [_number(t, f"params[{i}]") for i, t in enumerate(raw)]
    try:
        return Polyline(vertices, params)
    except FrechetError as e:
        raise FormatError('params' if params is not None else 'vertices', str(e)) from e


def curve_to_json(c: Polyline) -> Dict[str, Any]:
    return {
        'dim': c.dim,
        'vertices': c.vertices.tolist(),
        'params': c.params.tolist(),
    }


def graph_from_json(data: Any) -> GraphMap:
    """{"dim": n, "vertices": {id: [coords]}, "edges": [{"id", "from", "to", "polyline"}]}"""
    if not isinstance(data, dict):
        raise FormatError('graph', "expected a JSON object")
    dim = _dim(data)
    raw_vertices = data.get('vertices')
    if not isinstance(raw_vertices, dict) or not raw_vertices:
        raise FormatError('vertices', "expected a non-empty object of id -> point")
    points = {str(v): _point(p, f"vertices.{v}", dim) for v, p in raw_vertices.items()}

    raw_edges = data.get('edges')
    if not isinstance(raw_edges, list):
        raise FormatError('edges', "expected a list")
    edges, curves = [], {}
    for i, e in enumerate(raw_edges):
        where = f"edges[{i}]"
        if not isinstance(e, dict):
            raise FormatError(where, "expected an object")
        for key in ('id', 'from', 'to'):
            if key not in e:
                raise FormatError(f"{where}.{key}", "missing")
        eid, u, v = str(e['id']), str(e['from']), str(e['to'])
        for key, vid in (('from', u), ('to', v)):
            if vid not in points:
                raise FormatError(f"{where}.{key}", f"unknown vertex {vid!r}")
        if eid in curves:
            raise FormatError(f"{where}.id", f"duplicate edge id {eid!r}")
        if e.get('polyline') is not None:
            rows = _vertex_rows(e['polyline'], f"{where}.polyline", dim)
        else:
            rows = [points[u], points[v]]
        edges.append((eid, u, v))
        curves[eid] = Polyline(rows)
    try:
        return GraphMap(MultiGraph(list(points), edges), points, curves)
    except FrechetError as e:
        raise FormatError('edges', str(e)) from e


def graph_to_json(m: GraphMap) -> Dict[str, Any]:
    return {
        'dim': m.dim,
        'vertices': {v: m.point(v).tolist() for v in m.graph.vertex_ids},
        'edges': [{'id': e.edge_id, 'from': e.u, 'to': e.v,
                   'polyline': m.curve(e.edge_id).vertices.tolist()} for e in m.graph.edges],
    }


def object_from_json(data: Any) -> Union[Polyline, GraphMap]:
    """A graph-map when the object has edges, a curve otherwise"""
    if isinstance(data, dict) and 'edges' in data:
        return graph_from_json(data)
    return curve_from_json(data)


def object_to_json(obj: Union[Polyline, GraphMap]) -> Dict[str, Any]:
    return graph_to_json(obj) if isinstance(obj, GraphMap) else curve_to_json(obj)


def read_json(path: Union[str, Path]) -> Any:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(str(path), f"invalid JSON at line {e.lineno} column {e.colno}") from e


def load_object(path: Union[str, Path]) -> Union[Polyline, GraphMap]:
    return object_from_json(read_json(path))


def to_plain(value: Any) -> Any:
    """JSON-ready copy: numpy scalars and arrays unpacked, non-finite floats as strings"""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        if math.isnan(value):
            return 'nan'
        return value
    return value


def dumps(value: Any) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline"""
    return json.dumps(to_plain(value), indent=2, sort_keys=True) + '\n'


def write_json(value: Any, path: Union[str, Path]):
    Path(path).write_text(dumps(value), encoding='utf-8')
    logger.debug(f"💾 Wrote {path}")


def frame_records(seq) -> List[Dict[str, Any]]:
    """One {"t", "curve", "events"} record per frame of a morph sequence"""
    records = []
    for i, frame in enumerate(seq.frames):
        records.append({
            't': frame.t,
            'curve': object_to_json(frame.curve),
            'events': [e.to_dict() for e in seq.frame_events(i)],
        })
    return records


def write_frames_jsonl(seq, path: Union[str, Path]):
    lines = [json.dumps(to_plain(r), sort_keys=True) for r in frame_records(seq)]
    Path(path).write_text('\n'.join(lines) + '\n', encoding='utf-8')
    logger.debug(f"💾 Wrote {len(lines)} frames to {path}")


def read_frames_jsonl(path: Union[str, Path]) -> List[Dict[str, Any]]:
    records = []
    for n, line in enumerate(Path(path).read_text(encoding='utf-8').splitlines()):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise FormatError(f"line {n + 1}", f"invalid JSON at column {e.colno}") from e
        record['curve'] = object_from_json(record.get('curve'))
        records.append(record)
    return records
