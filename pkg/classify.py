#!/usr/bin/env python3
"""
Curve and graph-map classification
Continuous (C), immersion (I) or embedding (E), from pauses, backtracking,
self-contacts and vertex local injectivity
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from geometry import (Polyline, SelfContact, Tolerances, angle_between, resolve_tolerances,
                      segment_closest_points, self_intersections)
from graph_model import GraphMap

logger = logging.getLogger(__name__)


class CurveClass(Enum):
    """Curve classes, ordered C > I > E by inclusion"""
    C = 'C'
    I = 'I'
    E = 'E'

    @property
    def rank(self) -> int:
        return {'C': 0, 'I': 1, 'E': 2}[self.value]

    def admits(self, other: 'CurveClass') -> bool:
        """True when a curve of class other belongs to this class"""
        return other.rank >= self.rank

    @classmethod
    def parse(cls, label) -> 'CurveClass':
        if isinstance(label, CurveClass):
            return label
        aliases = {'c': 'C', 'continuous': 'C', 'i': 'I', 'immersion': 'I',
                   'e': 'E', 'embedding': 'E'}
        key = aliases.get(str(label).strip().lower())
        if key is None:
            raise ValueError(f"unknown class label {label!r}")
        return cls(key)


@dataclass
class ClassReport:
    """Outcome of classifying a path or a graph-map"""
    class_label: CurveClass
    pauses: List[Tuple[float, float]] = field(default_factory=list)
    backtracks: List[float] = field(default_factory=list)
    self_contacts: List[SelfContact] = field(default_factory=list)
    vertex_violations: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    edges: Dict[str, 'ClassReport'] = field(default_factory=dict)

    def meets(self, target) -> bool:
        return CurveClass.parse(target).admits(self.class_label)

    def summary(self) -> Tuple:
        """Violation signature; two reports with equal summaries describe the same situation"""
        return (self.class_label.value, len(self.pauses), len(self.backtracks),
                len(self.self_contacts), len(self.vertex_violations))

    def to_dict(self) -> dict:
        data = {
            'class': self.class_label.value,
            'pauses': [list(p) for p in self.pauses],
            'backtracks': list(self.backtracks),
            'self_contacts': [c.to_dict() for c in self.self_contacts],
            'vertex_violations': list(self.vertex_violations),
        }
        if self.warnings:
            data['warnings'] = list(self.warnings)
        if self.edges:
            data['edges'] = {eid: rep.to_dict() for eid, rep in sorted(self.edges.items())}
        return data


def _label(pauses, backtracks, contacts, violations=()) -> CurveClass:
    if pauses or backtracks or violations:
        return CurveClass.C
    if contacts:
        return CurveClass.I
    return CurveClass.E


def detect_pauses(c: Polyline, tol: Optional[Tolerances] = None) -> List[Tuple[float, float]]:
    """Maximal parameter intervals on which c stays at one point"""
    tol = resolve_tolerances(tol)
    if c.size == 1:
        return [(0.0, 1.0)]
    still = c.segment_lengths() <= tol.eps_dist
    pauses = []
    i = 0
    while i < len(still):
        if not still[i]:
            i += 1
            continue
        j = i
        anchor = c.vertices[i]
        while j < len(still) and still[j] and np.linalg.norm(c.vertices[j + 1] - anchor) <= tol.eps_dist:
            j += 1
        pauses.append((float(c.params[i]), float(c.params[j])))
        i = j
    return pauses


def _live_segments(c: Polyline, tol: Tolerances) -> np.ndarray:
    return np.flatnonzero(c.segment_lengths() > tol.eps_dist)


def _backtrack_scan(c: Polyline, tol: Tolerances, grazing: float) -> Tuple[List[float], List[str]]:
    live = _live_segments(c, tol)
    if len(live) < 2:
        return [], []
    dirs = c.vertices[live + 1] - c.vertices[live]
    angles = angle_between(dirs[:-1], -dirs[1:])
    found, warnings = [], []
    for k, angle in enumerate(angles):
        joint = float(c.params[live[k] + 1])
        if angle <= tol.theta_tol:
            found.append(joint)
        elif angle <= grazing:
            warnings.append(f"grazing reversal at t={joint:.6g} (angle {angle:.3g} rad)")
    return found, warnings


def detect_backtracking(c: Polyline, tol: Optional[Tolerances] = None) -> List[float]:
    """Interior joints where the curve folds back onto the segment it arrived on"""
    tol = resolve_tolerances(tol)
    return _backtrack_scan(c, tol, 0.0)[0]


def _grazing_angle() -> float:
    from frechet_config import config
    return config.grazing_angle


def classify_path(c: Polyline, tol: Optional[Tolerances] = None) -> ClassReport:
    """E without pauses, backtracks or self-contacts; I with self-contacts only; else C"""
    tol = resolve_tolerances(tol)
    pauses = detect_pauses(c, tol)
    backtracks, warnings = _backtrack_scan(c, tol, _grazing_angle())
    contacts = self_intersections(c, tol)
    for w in warnings:
        logger.warning(f"⚠️ {w}")
    return ClassReport(_label(pauses, backtracks, contacts), pauses, backtracks, contacts,
                       warnings=warnings)


def _leaving_direction(c: Polyline, end: int, tol: Tolerances) -> Optional[np.ndarray]:
    # direction of the first segment at that end; None when it is degenerate
    if c.size == 1:
        return None
    if end == 0:
        d = c.vertices[1] - c.vertices[0]
    else:
        d = c.vertices[-2] - c.vertices[-1]
    if np.linalg.norm(d) <= tol.eps_dist:
        return None
    return d


def _cross_edge_contacts(m: GraphMap, tol: Tolerances) -> List[SelfContact]:
    edges = m.graph.edges
    contacts: List[SelfContact] = []
    lives = {e.edge_id: _live_segments(m.curve(e.edge_id), tol) for e in edges}

    for x in range(len(edges)):
        for y in range(x + 1, len(edges)):
            ea, eb = edges[x], edges[y]
            ca, cb = m.curve(ea.edge_id), m.curve(eb.edge_id)
            la, lb = lives[ea.edge_id], lives[eb.edge_id]
            if not len(la) or not len(lb):
                continue
            ia, ib = np.repeat(la, len(lb)), np.tile(lb, len(la))
            s, t, dist = segment_closest_points(ca.vertices[ia], ca.vertices[ia + 1],
                                                cb.vertices[ib], cb.vertices[ib + 1])
            for n in np.flatnonzero(dist <= tol.eps_dist):
                i, j = ia[n], ib[n]
                da = ca.vertices[i + 1] - ca.vertices[i]
                db = cb.vertices[j + 1] - cb.vertices[j]
                sa, tb = float(s[n]), float(t[n])
                kind = 'touch'
                angle = angle_between(da, db)[0]
                if angle <= tol.theta_tol or angle >= math.pi - tol.theta_tol:
                    aa = float(da @ da)
                    proj = [float((cb.vertices[j] - ca.vertices[i]) @ da / aa),
                            float((cb.vertices[j + 1] - ca.vertices[i]) @ da / aa)]
                    lo, hi = max(0.0, min(proj)), min(1.0, max(proj))
                    if (hi - lo) * math.sqrt(aa) > tol.eps_dist:
                        sa = 0.5 * (lo + hi)
                        mid = ca.vertices[i] + sa * da
                        tb = float(np.clip((mid - cb.vertices[j]) @ db / float(db @ db), 0.0, 1.0))
                        kind = 'overlap'
                pa = float(ca.params[i] + sa * (ca.params[i + 1] - ca.params[i]))
                pb = float(cb.params[j] + tb * (cb.params[j + 1] - cb.params[j]))
                if kind != 'overlap' and _shared_vertex(ea, pa, eb, pb, tol):
                    continue
                if kind == 'touch' and (tol.eps_param < sa < 1 - tol.eps_param
                                        and tol.eps_param < tb < 1 - tol.eps_param):
                    kind = 'crossing'
                point = 0.5 * ((ca.vertices[i] + sa * da) + (cb.vertices[j] + tb * db))
                contacts.append(SelfContact((pa, pb), tuple(float(v) for v in point), kind,
                                            edges=(ea.edge_id, eb.edge_id)))
    return _dedupe(contacts, tol)


def _end_vertex(edge, param: float, tol: Tolerances) -> Optional[str]:
    if param <= tol.eps_param:
        return edge.u
    if param >= 1.0 - tol.eps_param:
        return edge.v
    return None


def _shared_vertex(ea, pa: float, eb, pb: float, tol: Tolerances) -> bool:
    va, vb = _end_vertex(ea, pa, tol), _end_vertex(eb, pb, tol)
    return va is not None and va == vb


def _dedupe(contacts: List[SelfContact], tol: Tolerances) -> List[SelfContact]:
    kept: List[SelfContact] = []
    merge = max(tol.eps_param, 1e-9)
    for c in sorted(contacts, key=lambda x: (x.edges, x.params)):
        if any(k.edges == c.edges and abs(k.params[0] - c.params[0]) <= merge
               and abs(k.params[1] - c.params[1]) <= merge for k in kept):
            continue
        kept.append(c)
    return kept


def vertex_violations(m: GraphMap, tol: Optional[Tolerances] = None) -> List[str]:
    """Vertices whose neighborhood is not mapped injectively"""
    tol = resolve_tolerances(tol)
    bad = []
    for v in m.graph.vertex_ids:
        dirs = []
        degenerate = False
        for eid, end in m.graph.incident(v):
            d = _leaving_direction(m.curve(eid), end, tol)
            if d is None:
                degenerate = True
                break
            dirs.append(d)
        if not degenerate and len(dirs) > 1:
            a, b = np.triu_indices(len(dirs), k=1)
            stack = np.array(dirs)
            degenerate = bool(np.any(angle_between(stack[a], stack[b]) <= tol.theta_tol))
        if degenerate:
            bad.append(v)
    return bad


def classify_graph_map(m: GraphMap, tol: Optional[Tolerances] = None) -> ClassReport:
    """Per-edge checks, cross-edge contacts and vertex local injectivity"""
    tol = resolve_tolerances(tol)
    pauses, backtracks, contacts, warnings = [], [], [], []
    per_edge: Dict[str, ClassReport] = {}

    for e in m.graph.edges:
        report = classify_path(m.curve(e.edge_id), tol)
        if e.is_loop:
            # a loop closes up at its vertex; that is not a self-contact
            report.self_contacts = [c for c in report.self_contacts
                                    if not (c.params[0] <= tol.eps_param and c.params[1] >= 1 - tol.eps_param)]
            report.class_label = _label(report.pauses, report.backtracks, report.self_contacts)
        report.self_contacts = [SelfContact(c.params, c.point, c.kind, edges=(e.edge_id, e.edge_id))
                                for c in report.self_contacts]
        per_edge[e.edge_id] = report
        pauses.extend(report.pauses)
        backtracks.extend(report.backtracks)
        contacts.extend(report.self_contacts)
        warnings.extend(f"{e.edge_id}: {w}" for w in report.warnings)

    contacts.extend(_cross_edge_contacts(m, tol))
    violations = vertex_violations(m, tol)
    label = _label(pauses, backtracks, contacts, violations)
    if violations:
        logger.warning(f"⚠️ Vertex injectivity fails at {violations}")
    return ClassReport(label, pauses, backtracks, contacts, violations, warnings, per_edge)


def classify(obj, tol: Optional[Tolerances] = None) -> ClassReport:
    """Classify a Polyline or a GraphMap"""
    if isinstance(obj, GraphMap):
        return classify_graph_map(obj, tol)
    return classify_path(obj, tol)
