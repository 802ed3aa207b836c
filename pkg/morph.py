#!/usr/bin/env python3
"""
Morph engine
Sampled paths in curve space: straight-line interpolation on a common
reparameterization, event scanning along it, and the local maneuvers
(reroute, dodge, Q-tip, 4D lift) that keep every frame in a target class
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from classify import CurveClass, classify
from frechet import (Matching, coupled_distance, free_space_decision, frechet_enclosure,
                     graph_frechet, graph_frechet_match, matching_for, rotate_loop)
from frechet_errors import MorphError
from geometry import (Polyline, Tolerances, angle_between, check_same_dim, resolve_tolerances,
                      restrict, reverse, segment_closest_points, zero_extend)
from graph_model import GraphMap, chain_polyline, closed_loop, smooth

logger = logging.getLogger(__name__)

Curve = Union[Polyline, GraphMap]

# Frames are never edited at t = 0 or t = 1
_EDGE_GUARD = 1e-9

# Dodge windows are halved until they fit the slack, down to this width
MIN_DODGE_WINDOW = 1e-6


class EventKind(Enum):
    PAUSE = 'pause'
    ENDPOINT_PAUSE = 'endpoint_pause'
    SINGLETON_COLLAPSE = 'singleton_collapse'
    BACKTRACK = 'backtrack'
    SELF_CROSS = 'self_cross'
    VERTEX_VIOLATION = 'vertex_violation'

    @property
    def priority(self) -> int:
        """Handling order for events at the same t"""
        return {'singleton_collapse': 0, 'pause': 1, 'endpoint_pause': 1, 'backtrack': 2,
                'self_cross': 3, 'vertex_violation': 4}[self.value]


class Maneuver(Enum):
    REROUTE = 'reroute'
    TRIM = 'trim'
    ROTATE_PI = 'rotate_pi'
    QTIP = 'qtip'
    LIFT_4D = 'lift_4d'
    NONE = 'none'


@dataclass(frozen=True)
class MorphEvent:
    """
    A violation found along a morph, and the maneuver that handled it.

    span is the t-range over which the violation was observed, window the
    t-range a maneuver edited. For self_cross, contacts lists
    (edge_a, param_a, edge_b, param_b) for every contact seen in the span.
    cost is the measured distance a maneuver added toward the target and
    slack the allowance it was checked against (dodges record both).
    """
    t: float
    kind: EventKind
    maneuver_applied: Maneuver = Maneuver.NONE
    location: Union[float, str, None] = None
    magnitude: float = 0.0
    span: Tuple[float, float] = (0.0, 0.0)
    window: Optional[Tuple[float, float]] = None
    edge: Optional[str] = None
    contacts: Tuple[Tuple[Optional[str], float, Optional[str], float], ...] = ()
    cost: Optional[float] = None
    slack: Optional[float] = None

    def applied(self, maneuver: Maneuver, magnitude: float, window: Tuple[float, float],
                cost: Optional[float] = None, slack: Optional[float] = None) -> 'MorphEvent':
        return replace(self, maneuver_applied=maneuver, magnitude=float(magnitude),
                       window=(float(window[0]), float(window[1])),
                       cost=None if cost is None else float(cost),
                       slack=None if slack is None else float(slack))

    def rescaled(self, scale: float, offset: float) -> 'MorphEvent':
        def move(x):
            return offset + scale * x
        return replace(self, t=move(self.t), span=(move(self.span[0]), move(self.span[1])),
                       window=None if self.window is None else (move(self.window[0]), move(self.window[1])))

    def to_dict(self) -> dict:
        data = {
            't': self.t,
            'kind': self.kind.value,
            'maneuver_applied': self.maneuver_applied.value,
            'location': self.location,
            'magnitude': self.magnitude,
            'span': list(self.span),
        }
        if self.window is not None:
            data['window'] = list(self.window)
        if self.edge is not None:
            data['edge'] = self.edge
        if self.cost is not None:
            data['cost'] = self.cost
        if self.slack is not None:
            data['slack'] = self.slack
        return data


@dataclass(frozen=True)
class Obstruction:
    """Which constraint could not be met, where, and by how much"""
    constraint: str
    t: float
    margin: float
    detail: str = ''

    def to_dict(self) -> dict:
        return {'constraint': self.constraint, 't': self.t, 'margin': self.margin,
                'detail': self.detail}


@dataclass(frozen=True)
class Frame:
    t: float
    curve: Curve


# ---------------------------------------------------------------------------
# Curve helpers shared by paths and graph-maps

def _extend(curve: Curve, dim: int) -> Curve:
    if curve.dim >= dim:
        return curve
    if isinstance(curve, GraphMap):
        pad = dim - curve.dim
        points = {v: np.concatenate([p, np.zeros(pad)]) for v, p in curve.vertex_points.items()}
        curves = {e: zero_extend(c, dim) for e, c in curve.edge_curves.items()}
        return GraphMap(curve.graph, points, curves)
    return zero_extend(curve, dim)


def _strand(curve: Curve, edge: Optional[str]) -> Polyline:
    return curve.curve(edge) if isinstance(curve, GraphMap) else curve


def _map_strands(curve: Curve, fn: Callable[[Polyline], Polyline], edge: Optional[str] = None) -> Curve:
    """Apply fn to the path, or to one (or every) edge curve of a graph-map"""
    if not isinstance(curve, GraphMap):
        return fn(curve)
    curves = dict(curve.edge_curves)
    for eid in ([edge] if edge is not None else list(curves)):
        curves[eid] = fn(curves[eid])
    return GraphMap(curve.graph, curve.vertex_points, curves)


def _coupled(a: Curve, b: Curve) -> float:
    """Identity-coupling upper bound on the distance of two frames"""
    if isinstance(a, GraphMap):
        worst = 0.0
        for v in a.graph.vertex_ids:
            worst = max(worst, float(np.linalg.norm(a.point(v) - b.point(v))))
        for eid in a.edge_curves:
            worst = max(worst, coupled_distance(a.curve(eid), b.curve(eid)))
        return worst
    return coupled_distance(a, b)


def _frame_distance(a: Curve, b: Curve, tol: Tolerances) -> float:
    """Certified lower bound on the distance (exact for graph-maps up to tolerance)"""
    if isinstance(a, GraphMap):
        return graph_frechet(a, b, tol)
    return frechet_enclosure(a, b, tol).lo


def _is_constant(c: Polyline, tol: Tolerances) -> bool:
    if c.size == 1:
        return True
    return bool(np.all(np.linalg.norm(c.vertices - c.vertices[0], axis=1) <= tol.eps_dist))


def _perpendicular(a: np.ndarray) -> np.ndarray:
    """A unit vector orthogonal to a, built from the least-aligned coordinate axis"""
    axis = np.zeros_like(a, dtype=float)
    axis[int(np.argmin(np.abs(a)))] = 1.0
    a_hat = a / np.linalg.norm(a)
    e = axis - (axis @ a_hat) * a_hat
    return e / np.linalg.norm(e)


def _rotation(u: np.ndarray, e: np.ndarray, theta: float) -> np.ndarray:
    """Rotation by theta in the plane of orthonormal u, e; identity on the complement"""
    dim = len(u)
    plane = np.outer(u, u) + np.outer(e, e)
    return np.eye(dim) + (math.cos(theta) - 1.0) * plane + math.sin(theta) * (np.outer(e, u) - np.outer(u, e))


def _open_window(lo: float, hi: float) -> Tuple[float, float]:
    return max(lo, _EDGE_GUARD), min(hi, 1.0 - _EDGE_GUARD)


def _window_times(lo: float, hi: float, center: float, samples: int) -> List[float]:
    """Frame times for a maneuver window: its ends, its center and a few in between"""
    times = [lo, center, hi]
    for j in range(1, samples + 1):
        times.append(lo + (center - lo) * j / (samples + 1))
        times.append(center + (hi - center) * j / (samples + 1))
    return [t for t in times if 0.0 < t < 1.0]


# ---------------------------------------------------------------------------
# Paths in curve space

class LinearInterpolant:
    """
    Straight-line homotopy (1 - t) p' + t q' on a common reparameterization.

    The ends return the inputs themselves; p' and q' are equivalent to
    them (distance 0).
    """

    def __init__(self, source: Polyline, target: Polyline, p_common: Polyline,
                 q_common: Polyline, matching: Matching):
        self.source = source
        self.target = target
        self.p_common = p_common
        self.q_common = q_common
        self.matching = matching
        self.dim = source.dim

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.q_common.vertices - self.p_common.vertices, axis=1).max())

    def blend(self, t: float) -> Polyline:
        verts = (1.0 - t) * self.p_common.vertices + t * self.q_common.vertices
        return Polyline(verts, self.p_common.params)

    def at(self, t: float) -> Curve:
        if t <= 0.0:
            return self.source
        if t >= 1.0:
            return self.target
        return self.blend(t)

    def aligned(self, center, t: float) -> Optional[Curve]:
        if center is self.target:
            return self.q_common
        if center is self.source:
            return self.p_common
        return None

    def strands(self) -> List[Tuple[Optional[str], np.ndarray, np.ndarray]]:
        return [(None, self.p_common.vertices, self.q_common.vertices)]


class GraphInterpolant:
    """Vertex points and edge curves interpolated on a's smoothed structure"""

    def __init__(self, graph, source_frame: GraphMap, target_frame: GraphMap,
                 edges: Dict[str, LinearInterpolant], source=None, target=None):
        self.graph = graph
        self.source_frame = source_frame
        self.target_frame = target_frame
        self.edges = edges
        self.source = source if source is not None else source_frame
        self.target = target if target is not None else target_frame
        self.dim = source_frame.dim

    @property
    def speed(self) -> float:
        worst = max((li.speed for li in self.edges.values()), default=0.0)
        for v in self.graph.vertex_ids:
            worst = max(worst, float(np.linalg.norm(self.target_frame.point(v) - self.source_frame.point(v))))
        return worst

    def blend(self, t: float) -> GraphMap:
        points = {v: (1.0 - t) * self.source_frame.point(v) + t * self.target_frame.point(v)
                  for v in self.graph.vertex_ids}
        curves = {eid: li.blend(t) for eid, li in self.edges.items()}
        return GraphMap(self.graph, points, curves)

    def at(self, t: float) -> Curve:
        if t <= 0.0:
            return self.source_frame
        if t >= 1.0:
            return self.target_frame
        return self.blend(t)

    def aligned(self, center, t: float) -> Optional[Curve]:
        if center is self.target:
            return self.target_frame
        if center is self.source:
            return self.source_frame
        return None

    def strands(self) -> List[Tuple[Optional[str], np.ndarray, np.ndarray]]:
        return [(eid, li.p_common.vertices, li.q_common.vertices) for eid, li in sorted(self.edges.items())]


class ManeuveredPath:
    """A path with a frame transform applied on a closed t-window"""

    def __init__(self, base, transform: Callable[[float, Curve], Curve], window: Tuple[float, float]):
        self.base = base
        self.transform = transform
        self.window = window
        self.dim = base.dim

    def at(self, t: float) -> Curve:
        curve = self.base.at(t)
        if self.window[0] <= t <= self.window[1]:
            return self.transform(t, curve)
        return curve

    def aligned(self, center, t: float):
        return self.base.aligned(center, t)


class ExtendedPath:
    """Zero-extension of every frame of a path to a higher dimension"""

    def __init__(self, base, dim: int):
        self.base = base
        self.dim = dim

    def at(self, t: float) -> Curve:
        return _extend(self.base.at(t), self.dim)

    def aligned(self, center, t: float):
        ref = self.base.aligned(center, t)
        return None if ref is None else _extend(ref, self.dim)


class PiecewisePath:
    """Consecutive paths, piece i running on its own t-range"""

    def __init__(self, pieces: Sequence[Tuple[float, float, object]]):
        self.pieces = list(pieces)
        self.dim = max(p.dim for _, _, p in self.pieces)

    def _locate(self, t: float):
        for lo, hi, path in self.pieces:
            if t <= hi:
                return lo, hi, path
        return self.pieces[-1]

    def at(self, t: float) -> Curve:
        lo, hi, path = self._locate(t)
        return _extend(path.at((t - lo) / (hi - lo)), self.dim)

    def aligned(self, center, t: float):
        lo, hi, path = self._locate(t)
        ref = path.aligned(center, (t - lo) / (hi - lo))
        return None if ref is None else _extend(ref, self.dim)


class FunctionPath:
    def __init__(self, fn: Callable[[float], Curve], dim: int):
        self.fn = fn
        self.dim = dim

    def at(self, t: float) -> Curve:
        return self.fn(t)

    def aligned(self, center, t: float):
        return None


class MorphSequence:
    """
    A sampled path in curve space.

    Frames are rendered from the underlying path at strictly increasing t,
    from 0 to 1. Sequences are immutable; maneuvers return new ones via
    evolve().
    """

    def __init__(self, path, times, target_class, source: Curve, target: Curve, speed: float,
                 events: Sequence[MorphEvent] = (), obstruction: Optional[Obstruction] = None):
        ts = np.unique(np.clip(np.concatenate([[0.0, 1.0], np.asarray(list(times), dtype=float)]), 0.0, 1.0))
        self.path = path
        self.target_class = CurveClass.parse(target_class)
        self.source = source
        self.target = target
        self.speed = float(speed)
        self.events: Tuple[MorphEvent, ...] = tuple(sorted(events, key=lambda e: (e.t, e.kind.priority)))
        self.obstruction = obstruction
        self.frames: Tuple[Frame, ...] = tuple(Frame(float(t), path.at(float(t))) for t in ts)

    @property
    def times(self) -> List[float]:
        return [f.t for f in self.frames]

    @property
    def curves(self) -> List[Curve]:
        return [f.curve for f in self.frames]

    @property
    def dim(self) -> int:
        return self.path.dim

    @property
    def ok(self) -> bool:
        return self.obstruction is None

    def evolve(self, path=None, extra_times: Sequence[float] = (), events=None,
               obstruction: Optional[Obstruction] = None, speed: Optional[float] = None) -> 'MorphSequence':
        return MorphSequence(
            path if path is not None else self.path,
            list(self.times) + list(extra_times),
            self.target_class, self.source, self.target,
            self.speed if speed is None else speed,
            self.events if events is None else events,
            obstruction if obstruction is not None else self.obstruction)

    def obstructed(self, obstruction: Obstruction, events=None) -> 'MorphSequence':
        logger.info(f"❌ Obstruction ({obstruction.constraint}) at t={obstruction.t:.6g}: {obstruction.detail}")
        return self.evolve(events=events, obstruction=obstruction)

    def frame_events(self, index: int) -> List[MorphEvent]:
        """Events whose t falls in (previous frame t, this frame t]"""
        t = self.frames[index].t
        prev = self.frames[index - 1].t if index > 0 else -math.inf
        return [e for e in self.events if prev < e.t <= t]

    def maneuver_load(self, lo: float, hi: float) -> float:
        """Total magnitude of maneuvers whose window meets [lo, hi]"""
        return sum(e.magnitude for e in self.events
                   if e.maneuver_applied is not Maneuver.NONE and e.window is not None
                   and e.window[0] <= hi and e.window[1] >= lo)

    def summary(self) -> dict:
        return {
            'frames': len(self.frames),
            'target_class': self.target_class.value,
            'speed': self.speed,
            'events': [e.to_dict() for e in self.events],
            'obstruction': None if self.obstruction is None else self.obstruction.to_dict(),
        }

    def __repr__(self):
        state = 'ok' if self.ok else f'obstructed:{self.obstruction.constraint}'
        return f"MorphSequence(frames={len(self.frames)}, class={self.target_class.value}, {state})"


# ---------------------------------------------------------------------------
# Frame-level edits

def remove_pauses(c: Polyline, tol: Optional[Tolerances] = None) -> Polyline:
    """
    Same image without pauses.

    An interior pause collapses to one vertex at the middle of its parameter
    span, so both neighbors stretch into it; a pause at either end is
    trimmed off and the rest renormalized.
    """
    tol = resolve_tolerances(tol)
    if _is_constant(c, tol):
        raise MorphError("pause spans the whole frame; it needs dodge_singleton")
    verts, params = c.vertices, c.params
    still = c.segment_lengths() <= tol.eps_dist
    if not still.any():
        return c

    keep_v, keep_u = [], []
    i = 0
    n = c.size
    while i < n:
        j = i
        while j < n - 1 and still[j]:
            j += 1
        if j == i:
            keep_v.append(verts[i])
            keep_u.append(params[i])
        elif i == 0:
            keep_v.append(verts[j])
            keep_u.append(params[j])
        elif j == n - 1:
            keep_v.append(verts[i])
            keep_u.append(params[i])
        else:
            keep_v.append(verts[i])
            keep_u.append(0.5 * (params[i] + params[j]))
        i = j + 1

    u = np.array(keep_u)
    u = (u - u[0]) / (u[-1] - u[0])
    return Polyline(np.array(keep_v), u)


def _tip_indices(c: Polyline, location: float, tol: Tolerances) -> Optional[Tuple[int, int]]:
    """Vertices between the last live segment ending at location and the first one starting there"""
    live = np.flatnonzero(c.segment_lengths() > tol.eps_dist)
    slack = 1e-8
    before = [k for k in live if c.params[k + 1] <= location + slack]
    after = [k for k in live if c.params[k] >= location - slack]
    if not before or not after:
        return None
    i_in, i_out = int(before[-1]) + 1, int(after[0])
    if i_in > i_out or i_out >= c.size - 1:
        return None
    return i_in, i_out


def qtip_cap(c: Polyline, location: float, radius: float, side: np.ndarray, segments: int,
             tol: Optional[Tolerances] = None) -> Polyline:
    """
    Replace the tip at location with a semicircular cap.

    The cap leaves the incoming segment at distance radius before the tip,
    swings around the tip point on the side given by side, and rejoins at
    distance radius beyond it, heading on to the next vertex.
    """
    tol = resolve_tolerances(tol)
    idx = _tip_indices(c, location, tol)
    if idx is None:
        return c
    i_in, i_out = idx
    V, U = c.vertices, c.params

    a = V[i_in] - V[i_in - 1]
    len_in = float(np.linalg.norm(a))
    a = a / len_in
    len_out = float(np.linalg.norm(V[i_out + 1] - V[i_out]))
    r = min(radius, 0.45 * len_in, 0.45 * len_out)
    if r <= tol.eps_dist:
        return c

    tip = 0.5 * (V[i_in] + V[i_out])
    e = side - (side @ a) * a
    norm = float(np.linalg.norm(e))
    e = _perpendicular(a) if norm <= 1e-12 else e / norm

    start = V[i_in] - r * a
    theta = np.linspace(math.pi, 0.0, segments + 1)
    arc = tip + r * (np.cos(theta)[:, None] * a + np.sin(theta)[:, None] * e)
    if np.linalg.norm(arc[0] - start) <= tol.eps_dist:
        arc = arc[1:]

    u_start = U[i_in] - (r / len_in) * (U[i_in] - U[i_in - 1])
    u_arc = np.linspace(u_start, U[i_out + 1], len(arc) + 2)[1:-1]
    verts = np.vstack([V[:i_in], start[None, :], arc, V[i_out + 1:]])
    params = np.concatenate([U[:i_in], [u_start], u_arc, U[i_out + 1:]])
    return Polyline(verts, params)


def _bump_strand(c: Polyline, knots: np.ndarray, heights: np.ndarray, direction: np.ndarray) -> Polyline:
    """Offset c along direction by the piecewise-linear profile (knots, heights)"""
    u = np.union1d(c.params, np.clip(knots, 0.0, 1.0))
    keep = np.concatenate([[True], np.diff(u) > 1e-12])
    u = u[keep]
    u[-1] = 1.0
    verts = c.evaluate(u) + np.interp(u, knots, heights)[:, None] * direction[None, :]
    return Polyline(verts, u)


# ---------------------------------------------------------------------------
# Event scanning

@dataclass(frozen=True)
class _Violation:
    kind: EventKind
    key: tuple
    location: Union[float, str, None] = None
    edge: Optional[str] = None
    contacts: tuple = ()


def _strand_violations(report, c: Polyline, edge: Optional[str], tol: Tolerances) -> List[_Violation]:
    if _is_constant(c, tol):
        kind = EventKind.SINGLETON_COLLAPSE
        return [_Violation(kind, (kind, edge), 0.5, edge)]
    found = []
    for a, b in report.pauses:
        kind = (EventKind.ENDPOINT_PAUSE if a <= tol.eps_param or b >= 1.0 - tol.eps_param
                else EventKind.PAUSE)
        loc = 0.5 * (a + b)
        found.append(_Violation(kind, (kind, edge, round(loc, 7)), loc, edge))
    for b in report.backtracks:
        kind = EventKind.BACKTRACK
        found.append(_Violation(kind, (kind, edge, round(b, 7)), b, edge))
    return found


def frame_violations(curve: Curve, target, tol: Optional[Tolerances] = None) -> List[_Violation]:
    """What keeps a frame out of the target class"""
    tol = resolve_tolerances(tol)
    target = CurveClass.parse(target)
    if target is CurveClass.C:
        return []
    report = classify(curve, tol)
    found: List[_Violation] = []
    if isinstance(curve, GraphMap):
        for eid in sorted(report.edges):
            found.extend(_strand_violations(report.edges[eid], curve.curve(eid), eid, tol))
        for v in report.vertex_violations:
            kind = EventKind.VERTEX_VIOLATION
            found.append(_Violation(kind, (kind, v), v))
    else:
        found.extend(_strand_violations(report, curve, None, tol))

    if target is CurveClass.E and report.self_contacts:
        groups: Dict[tuple, list] = {}
        for c in report.self_contacts:
            ea, eb = c.edges if c.edges is not None else (None, None)
            groups.setdefault((ea, eb), []).append((ea, c.params[0], eb, c.params[1]))
        kind = EventKind.SELF_CROSS
        for (ea, eb), contacts in sorted(groups.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
            found.append(_Violation(kind, (kind, ea, eb), contacts[0][1], ea, tuple(contacts)))
    return found


def critical_times(interp, tol: Optional[Tolerances] = None) -> List[float]:
    """
    Times in (0, 1) where a linear interpolation can leave the immersions.

    A segment direction (1 - t) dP + t dQ vanishes at the minimizer of its
    norm; consecutive directions turn anti-parallel at a common root of
    their 2x2 minors.
    """
    tol = resolve_tolerances(tol)
    times = []
    for _, P, Q in interp.strands():
        if len(P) < 2:
            continue
        dP, dQ = np.diff(P, axis=0), np.diff(Q, axis=0)
        B = dQ - dP
        bb = np.einsum('ij,ij->i', B, B)
        with np.errstate(divide='ignore', invalid='ignore'):
            ts = np.where(bb > 0, -np.einsum('ij,ij->i', dP, B) / bb, -1.0)
        for k in np.flatnonzero((ts > 0.0) & (ts < 1.0)):
            if np.linalg.norm(dP[k] + ts[k] * B[k]) <= tol.eps_dist:
                times.append(float(ts[k]))

        dim = P.shape[1]
        pairs = [(a, b) for a in range(dim) for b in range(a + 1, dim)]
        for k in range(len(dP) - 1):
            roots = None
            for a, b in pairs:
                poly = (np.polymul([B[k, a], dP[k, a]], [B[k + 1, b], dP[k + 1, b]])
                        - np.polymul([B[k, b], dP[k, b]], [B[k + 1, a], dP[k + 1, a]]))
                if np.max(np.abs(poly)) > 1e-14:
                    roots = np.roots(np.trim_zeros(poly, 'f')) if np.any(poly) else np.array([])
                    break
            if roots is None:
                continue
            for r in roots:
                if abs(r.imag) > 1e-9 or not 0.0 < r.real < 1.0:
                    continue
                t = float(r.real)
                d1, d2 = dP[k] + t * B[k], dP[k + 1] + t * B[k + 1]
                if min(np.linalg.norm(d1), np.linalg.norm(d2)) <= tol.eps_dist:
                    continue
                if angle_between(d1, -d2)[0] <= 1e-7:
                    times.append(t)
    return sorted(set(round(t, 15) for t in times))


def strand_passages(interp, t0: float = 0.0, t1: float = 1.0,
                    tol: Optional[Tolerances] = None) -> List[float]:
    """
    Instants in (t0, t1) where two strands pass through each other.

    Works when all vertices span three affine dimensions: two moving
    segments can only meet when their endpoints are coplanar, a cubic in t.
    Planar motions keep contacts over whole intervals and are left to frame
    sampling.
    """
    tol = resolve_tolerances(tol)
    segs = []
    for edge, P, Q in interp.strands():
        for k in range(len(P) - 1):
            segs.append((edge, k, P[k], P[k + 1], Q[k], Q[k + 1]))
    if len(segs) < 2:
        return []

    cloud = np.vstack([np.vstack([s[2], s[3], s[4], s[5]]) for s in segs])
    centered = cloud - cloud.mean(axis=0)
    _, sing, vt = np.linalg.svd(centered, full_matrices=False)
    if sing[0] == 0.0:
        return []
    rank = int(np.sum(sing > 1e-9 * sing[0]))
    if rank != 3:
        return []
    basis = vt[:3].T
    origin = cloud.mean(axis=0)

    def project(x):
        return (x - origin) @ basis

    idx_a, idx_b = [], []
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            if segs[i][0] == segs[j][0] and abs(segs[i][1] - segs[j][1]) <= 1:
                continue
            idx_a.append(i)
            idx_b.append(j)
    if not idx_a:
        return []
    ia, ib = np.array(idx_a), np.array(idx_b)
    starts = np.array([[project(s[2]), project(s[3]), project(s[4]), project(s[5])] for s in segs])

    def at(t):
        return (1.0 - t) * starts[:, :2] + t * starts[:, 2:]

    samples = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
    values = []
    for t in samples:
        ends = at(t)
        a0, a1 = ends[ia, 0], ends[ia, 1]
        b0, b1 = ends[ib, 0], ends[ib, 1]
        values.append(np.linalg.det(np.stack([a1 - a0, b0 - a0, b1 - a0], axis=1)))
    coeffs = np.linalg.solve(np.vander(samples, 4), np.array(values))

    found = []
    scale = max(1.0, float(np.abs(coeffs).max()))
    for n in range(len(ia)):
        poly = coeffs[:, n]
        if np.max(np.abs(poly)) <= 1e-12 * scale:
            continue
        for r in np.roots(np.trim_zeros(poly, 'f')):
            if abs(r.imag) > 1e-9 or not t0 < r.real < t1:
                continue
            t = float(r.real)
            ends = at(t)
            _, _, dist = segment_closest_points(ends[ia[n], 0][None], ends[ia[n], 1][None],
                                                ends[ib[n], 0][None], ends[ib[n], 1][None])
            if dist[0] <= 10.0 * tol.eps_dist:
                found.append(t)
    return sorted(set(round(t, 12) for t in found))


# ---------------------------------------------------------------------------
# Engine

class MorphEngine:
    """Builds and repairs morph sequences; one instance per configuration"""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)

    @staticmethod
    def _config():
        from frechet_config import config
        return config

    # -- reparameterization and the straight-line morph --------------------

    def common_reparameterize(self, p: Polyline, q: Polyline,
                              tol: Optional[Tolerances] = None) -> Tuple[Polyline, Polyline, Matching]:
        """
        Resample p and q on one parameter set so that vertex k of one is
        coupled to vertex k of the other by a near-optimal matching.
        """
        tol = resolve_tolerances(tol)
        check_same_dim(p, q)
        enclosure = None
        if p.size == q.size:
            gap = float(np.linalg.norm(p.vertices - q.vertices, axis=1).max())
            enclosure = frechet_enclosure(p, q, tol)
            if gap <= enclosure.hi + tol.eps_dist:
                breaks = np.column_stack([p.params, q.params])
                matching = Matching(breaks, gap)
                return self._resample(p, q, matching)
        matching, _ = matching_for(p, q, tol)
        return self._resample(p, q, matching)

    @staticmethod
    def _resample(p: Polyline, q: Polyline, matching: Matching) -> Tuple[Polyline, Polyline, Matching]:
        steps = np.diff(matching.s) + np.diff(matching.t)
        u = np.concatenate([[0.0], np.cumsum(steps)])
        u = u / u[-1] if u[-1] > 0 else np.linspace(0.0, 1.0, len(u))
        return Polyline(p.evaluate(matching.s), u), Polyline(q.evaluate(matching.t), u), matching

    def interpolant(self, p: Polyline, q: Polyline, tol: Optional[Tolerances] = None) -> LinearInterpolant:
        p_common, q_common, matching = self.common_reparameterize(p, q, tol)
        return LinearInterpolant(p, q, p_common, q_common, matching)

    @staticmethod
    def _uniform(k: int) -> np.ndarray:
        if k < 2:
            raise MorphError(f"a morph needs at least 2 frames, got {k}")
        return np.linspace(0.0, 1.0, k)

    def _frame_count(self, k: Optional[int]) -> int:
        return int(self._config().frames if k is None else k)

    def linear_morph(self, p: Polyline, q: Polyline, k: Optional[int] = None,
                     tol: Optional[Tolerances] = None) -> MorphSequence:
        """Straight-line morph with diagnostic events; class target C"""
        tol = resolve_tolerances(tol)
        times = self._uniform(self._frame_count(k))
        interp = self.interpolant(p, q, tol)
        events = self.scan(interp, times, CurveClass.E, tol, critical_times(interp, tol))
        self.logger.debug(f"📊 Linear morph: {len(times)} frames, {len(events)} diagnostic events")
        return MorphSequence(interp, times, CurveClass.C, p, q, interp.speed, events)

    # -- event scanning ----------------------------------------------------

    def scan(self, path, times, target, tol: Optional[Tolerances] = None,
             critical: Sequence[float] = ()) -> List[MorphEvent]:
        """
        Events along a path: violations found on sample frames, with the
        onset and end of each run bisected down to eps_param. Analytic
        critical times are sampled directly and not bisected.
        """
        tol = resolve_tolerances(tol)
        target = CurveClass.parse(target)
        found: Dict[float, List[_Violation]] = {}

        def violations_at(t: float) -> List[_Violation]:
            if t not in found:
                found[t] = frame_violations(path.at(t), target, tol)
            return found[t]

        critical = [float(t) for t in critical if 0.0 < t < 1.0]
        samples = sorted(set(float(t) for t in times) | set(critical))
        for t in samples:
            violations_at(t)
        isolated = set(critical)
        for lo, hi in zip(samples, samples[1:]):
            k_lo = {v.key for v in found[lo]}
            k_hi = {v.key for v in found[hi]}
            for key in sorted(k_lo ^ k_hi, key=str):
                present_hi = key in k_hi
                if (hi if present_hi else lo) in isolated:
                    continue
                self._bisect(violations_at, lo, hi, key, present_hi, tol)

        runs: Dict[tuple, List[Tuple[float, _Violation]]] = {}
        finished: List[List[Tuple[float, _Violation]]] = []
        for t in sorted(found):
            current = {v.key: v for v in found[t]}
            for key in list(runs):
                if key not in current:
                    finished.append(runs.pop(key))
            for key, v in current.items():
                runs.setdefault(key, []).append((t, v))
        finished.extend(runs.values())

        events = [self._event_from_run(run) for run in finished]
        events.sort(key=lambda e: (e.t, e.kind.priority, str(e.edge), str(e.location)))
        return events

    @staticmethod
    def _bisect(violations_at, lo: float, hi: float, key, present_hi: bool, tol: Tolerances):
        a, b = lo, hi
        floor = max(tol.eps_param, 1e-12)
        for _ in range(64):
            if b - a <= floor:
                break
            mid = 0.5 * (a + b)
            has = key in {v.key for v in violations_at(mid)}
            if has == present_hi:
                b = mid
            else:
                a = mid

    @staticmethod
    def _event_from_run(run: List[Tuple[float, _Violation]]) -> MorphEvent:
        t_mid, v = run[len(run) // 2]
        contacts = ()
        if v.kind is EventKind.SELF_CROSS:
            contacts = tuple(c for _, x in run for c in x.contacts)
        return MorphEvent(t=t_mid, kind=v.kind, location=v.location, span=(run[0][0], run[-1][0]),
                          edge=v.edge, contacts=contacts)

    # -- maneuvers ---------------------------------------------------------

    def _slack(self, seq: MorphSequence, t0: float, t1: float) -> float:
        return max(min(t0, 1.0 - t1), 0.0) * seq.speed

    def reroute_pause(self, seq: MorphSequence, event: MorphEvent,
                      tol: Optional[Tolerances] = None) -> MorphSequence:
        """Reparameterize the frames around a pause so it disappears; images are unchanged"""
        tol = resolve_tolerances(tol)
        if event.kind not in (EventKind.PAUSE, EventKind.ENDPOINT_PAUSE):
            raise MorphError(f"reroute_pause cannot handle a {event.kind.value} event")
        pad = 0.25 / max(len(seq.frames), 2)
        lo, hi = _open_window(event.span[0] - pad, event.span[1] + pad)
        edge = event.edge

        def transform(t, curve):
            return _map_strands(curve, lambda s: remove_pauses(s, tol) if not _is_constant(s, tol) else s, edge)

        maneuver = Maneuver.TRIM if event.kind is EventKind.ENDPOINT_PAUSE else Maneuver.REROUTE
        done = event.applied(maneuver, 0.0, (lo, hi))
        path = ManeuveredPath(seq.path, transform, (lo, hi))
        self.logger.debug(f"🔄 {maneuver.value} at t={event.t:.6g}, location {event.location}")
        return seq.evolve(path=path, extra_times=[event.t, *event.span],
                          events=self._replace_event(seq, event, done))

    def dodge_singleton(self, seq: MorphSequence, event: MorphEvent,
                        tol: Optional[Tolerances] = None, slack: Optional[float] = None) -> MorphSequence:
        """
        Rotate by pi about the collapse point instead of passing through it.

        Over [t* - w, t* + w] the frames keep the scale they had at the
        window start and turn by pi in the plane of the collapsing curve.
        w starts at the configured dodge window and is halved until the
        distance the rotated frames add toward the target is within the
        slack (by default what the window ends leave of the morph speed).
        """
        tol = resolve_tolerances(tol)
        if event.kind is not EventKind.SINGLETON_COLLAPSE:
            raise MorphError(f"dodge_singleton cannot handle a {event.kind.value} event")
        cfg = self._config()
        t_star = event.t
        if seq.dim < 2:
            return seq.obstructed(Obstruction('dimension', t_star, 0.0,
                                              "a collapse in R^1 cannot be rotated around"),
                                  self._replace_event(seq, event, event))
        edge = event.edge
        if edge is not None:
            frame = seq.path.at(t_star)
            e = frame.graph.edge(edge)
            if e.is_loop or frame.graph.degree(e.u) != 1 or frame.graph.degree(e.v) != 1:
                return seq.obstructed(Obstruction('dodge', t_star, 0.0,
                                                  f"edge {edge} collapses inside a larger component"),
                                      self._replace_event(seq, event, event))

        w = min(cfg.dodge_window, 0.25 * t_star, 0.5 * (1.0 - t_star))
        target = _strand(_extend(seq.target, seq.dim), edge)
        while True:
            plan = self._dodge_plan(seq, t_star, w, edge, tol)
            if isinstance(plan, Obstruction):
                return seq.obstructed(plan, self._replace_event(seq, event, event))
            lo, hi, rotated, magnitude = plan
            window_times = _window_times(lo, hi, t_star, cfg.event_samples + 2)
            allowance = self._slack(seq, lo, hi) if slack is None else float(slack)
            cost = max(self._added_distance(rotated(t), _strand(seq.path.at(t), edge), target, tol)
                       for t in window_times)
            if cost <= allowance + tol.eps_dist:
                break
            self.logger.debug(f"🔄 Dodge window {w:.4g} adds {cost:.4g} over slack {allowance:.4g}; shrinking")
            w *= 0.5
            if w < MIN_DODGE_WINDOW:
                return seq.obstructed(Obstruction('slack', t_star, allowance - cost,
                                                  f"dodge adds {cost:.4g} but the slack is {allowance:.4g}"),
                                      self._replace_event(seq, event, event))

        def transform(t, curve):
            strand = rotated(t)
            if not isinstance(curve, GraphMap):
                return strand
            graph_edge = curve.graph.edge(edge)
            points = dict(curve.vertex_points)
            points[graph_edge.u], points[graph_edge.v] = strand.start, strand.end
            curves = dict(curve.edge_curves)
            curves[edge] = strand
            return GraphMap(curve.graph, points, curves)

        done = event.applied(Maneuver.ROTATE_PI, magnitude, (lo, hi), cost=cost, slack=allowance)
        path = ManeuveredPath(seq.path, transform, (lo, hi))
        self.logger.debug(f"🔄 Dodging collapse at t={t_star:.6g} over [{lo:.4g}, {hi:.4g}], "
                          f"cost {cost:.4g} of slack {allowance:.4g}")
        return seq.evolve(path=path, extra_times=window_times,
                          events=self._replace_event(seq, event, done))

    def _dodge_plan(self, seq: MorphSequence, t_star: float, w: float, edge: Optional[str],
                    tol: Tolerances):
        """Half-turn frames over [t* - w, t* + w], or the Obstruction that prevents them"""
        lo, hi = t_star - w, t_star + w
        first = _strand(seq.path.at(lo), edge)
        last = _strand(seq.path.at(hi), edge)
        if first.size != last.size or not np.allclose(first.params, last.params, atol=1e-12):
            return Obstruction('dodge', t_star, 0.0, "frames around the collapse do not align")

        center = _strand(seq.path.at(t_star), edge).vertices.mean(axis=0)
        A = first.vertices - center
        B = last.vertices - center
        _, sing, vt = np.linalg.svd(np.vstack([A, B]), full_matrices=False)
        if sing[0] <= tol.eps_dist:
            return Obstruction('dodge', t_star, 0.0, "window too small to rotate")
        rank = int(np.sum(sing > 1e-9 * sing[0]))
        if rank > 2:
            return Obstruction('dodge', t_star, 0.0,
                               f"collapsing curve spans {rank} dimensions; no rotation plane")
        u = vt[0]
        e_dir = vt[1] if rank == 2 else _perpendicular(u)
        B_turned = B @ _rotation(u, e_dir, math.pi).T
        params = first.params

        def rotated(t: float) -> Polyline:
            beta = (t - lo) / (hi - lo)
            blend = (1.0 - beta) * A + beta * B_turned
            return Polyline(center + blend @ _rotation(u, e_dir, math.pi * beta).T, params)

        magnitude = 2.0 * float(max(np.linalg.norm(A, axis=1).max(), np.linalg.norm(B, axis=1).max()))
        return lo, hi, rotated, magnitude

    @staticmethod
    def _added_distance(moved: Polyline, original: Polyline, target: Polyline, tol: Tolerances) -> float:
        """How much farther from the target a frame got; never negative"""
        after = frechet_enclosure(moved, target, tol).hi
        before = frechet_enclosure(original, target, tol).lo
        return max(after - before, 0.0)

    def default_qtip_radius(self, seq: MorphSequence, event: MorphEvent,
                            tol: Optional[Tolerances] = None) -> float:
        """min(slack / 2, shortest adjacent segment / 4) at the event time"""
        tol = resolve_tolerances(tol)
        strand = _strand(seq.path.at(event.t), event.edge)
        location = self._tip_location(strand, event, tol)
        idx = _tip_indices(strand, location, tol)
        if idx is None:
            return 0.0
        i_in, i_out = idx
        shortest = min(float(np.linalg.norm(strand.vertices[i_in] - strand.vertices[i_in - 1])),
                       float(np.linalg.norm(strand.vertices[i_out + 1] - strand.vertices[i_out])))
        return min(0.5 * self._slack(seq, *event.span), 0.25 * shortest)

    @staticmethod
    def _tip_location(strand: Polyline, event: MorphEvent, tol: Tolerances) -> float:
        # earlier reroutes can move the joint; take the backtrack nearest to the event
        backtracks = classify(strand, tol).backtracks
        if not backtracks:
            return float(event.location)
        return float(min(backtracks, key=lambda b: abs(b - float(event.location))))

    def qtip_inflate(self, seq: MorphSequence, event: MorphEvent, radius: Optional[float] = None,
                     tol: Optional[Tolerances] = None) -> MorphSequence:
        """Replace the backtracking tip by a semicircular cap in frames around the event"""
        tol = resolve_tolerances(tol)
        if event.kind is not EventKind.BACKTRACK:
            raise MorphError(f"qtip_inflate cannot handle a {event.kind.value} event")
        cfg = self._config()
        if seq.dim < 2:
            return seq.obstructed(Obstruction('dimension', event.t, 0.0,
                                              "no perpendicular direction for a cap in R^1"),
                                  self._replace_event(seq, event, event))
        if radius is None:
            radius = self.default_qtip_radius(seq, event, tol)
        if radius <= 10.0 * tol.eps_dist:
            return seq.obstructed(Obstruction('slack', event.t, float(radius),
                                              "not enough slack for a Q-tip cap"),
                                  self._replace_event(seq, event, event))

        strand = _strand(seq.path.at(event.t), event.edge)
        location = self._tip_location(strand, event, tol)
        idx = _tip_indices(strand, location, tol)
        if idx is None:
            return seq.obstructed(Obstruction('qtip', event.t, 0.0, "no tip found at the backtrack"),
                                  self._replace_event(seq, event, event))
        i_in, i_out = idx
        a = strand.vertices[i_in] - strand.vertices[i_in - 1]
        a = a / np.linalg.norm(a)
        b = strand.vertices[i_out + 1] - strand.vertices[i_out]
        b = b / np.linalg.norm(b)
        b_perp = b - (b @ a) * a
        side = -b_perp / np.linalg.norm(b_perp) if np.linalg.norm(b_perp) > 1e-6 else _perpendicular(a)

        lo, hi = _open_window(max(event.span[0] - cfg.qtip_window, 0.5 * event.span[0]),
                              min(event.span[1] + cfg.qtip_window, 0.5 * (1.0 + event.span[1])))
        segments = cfg.qtip_segments
        edge = event.edge

        def transform(t, curve):
            return _map_strands(curve, lambda s: qtip_cap(s, location, radius, side, segments, tol), edge)

        spread = 0.0
        for t in (lo, hi):
            s = _strand(seq.path.at(t), edge)
            tip = _tip_indices(s, location, tol)
            if tip is not None:
                spread = max(spread, 0.5 * float(np.linalg.norm(s.vertices[tip[0]] - s.vertices[tip[1]])))
        done = event.applied(Maneuver.QTIP, radius + spread, (lo, hi))
        path = ManeuveredPath(seq.path, transform, (lo, hi))
        self.logger.debug(f"🔄 Q-tip radius {radius:.4g} at t={event.t:.6g}, location {location:.6g}")
        return seq.evolve(path=path, extra_times=_window_times(lo, hi, event.t, cfg.event_samples),
                          events=self._replace_event(seq, event, done))

    def lift_crossing_4d(self, seq: MorphSequence, event: MorphEvent, bump: Optional[float] = None,
                         tol: Optional[Tolerances] = None, slack: Optional[float] = None) -> MorphSequence:
        """
        Raise one crossing strand along an extra coordinate while the other
        passes.

        Frames below dimension 4 are zero-extended first. The bump has a flat
        top over the strand's contact parameters and linear ramps in both
        the parameter and t.
        """
        tol = resolve_tolerances(tol)
        if event.kind is not EventKind.SELF_CROSS:
            raise MorphError(f"lift_crossing_4d cannot handle a {event.kind.value} event")
        cfg = self._config()
        t0, t1 = event.span
        if slack is None:
            slack = self._slack(seq, t0, t1)
        if bump is None:
            bump = cfg.lift_bump if cfg.lift_bump > 0 else 0.5 * slack
        if bump <= 0.0:
            return seq
        if bump >= slack:
            raise MorphError(f"bump {bump:.6g} exceeds the available slack {slack:.6g}")
        if not event.contacts:
            raise MorphError("self_cross event carries no contacts")

        lifted_edge = event.contacts[0][2]
        other_edge = event.contacts[0][0]
        b_params = [c[3] for c in event.contacts]
        a_params = [c[1] for c in event.contacts]
        b_lo, b_hi = min(b_params), max(b_params)
        rho = 0.05
        if other_edge == lifted_edge:
            gap = b_lo - max(a_params)
            if gap <= 2.0 * tol.eps_param:
                return seq.obstructed(Obstruction('lift', event.t, float(gap),
                                                  "crossing strands interleave along the curve"),
                                      self._replace_event(seq, event, event))
            rho = min(rho, gap / 3.0)
        if lifted_edge is not None:
            rho = min(rho, 0.5 * b_lo, 0.5 * (1.0 - b_hi))
        if rho <= tol.eps_param:
            return seq.obstructed(Obstruction('lift', event.t, float(rho), "contact sits at a vertex"),
                                  self._replace_event(seq, event, event))

        knots = np.array([b_lo - rho, b_lo, b_hi, b_hi + rho])
        heights = np.array([0.0, 1.0, 1.0, 0.0]) * bump
        if b_hi <= b_lo:
            knots = np.array([b_lo - rho, b_lo, b_lo + rho])
            heights = np.array([0.0, 1.0, 0.0]) * bump

        target_dim = max(4, seq.dim)
        path = seq.path if seq.dim >= 4 else ExtendedPath(seq.path, 4)
        direction = self._lift_direction(path, event, target_dim, lifted_edge, b_lo, other_edge, a_params, tol)

        ramp = cfg.lift_ramp
        lo, hi = _open_window(max(t0 - ramp, 0.5 * t0), min(t1 + ramp, 0.5 * (1.0 + t1)))

        def height(t: float) -> float:
            if t0 <= t <= t1:
                return 1.0
            if t < t0:
                return (t - lo) / (t0 - lo) if t0 > lo else 1.0
            return (hi - t) / (hi - t1) if hi > t1 else 1.0

        def transform(t, curve):
            g = height(t)
            if g <= 0.0:
                return curve
            return _map_strands(curve, lambda s: _bump_strand(s, knots, g * heights, direction), lifted_edge)

        done = event.applied(Maneuver.LIFT_4D, bump, (lo, hi))
        self.logger.debug(f"🔄 Lifting strand by {bump:.4g} over t in [{lo:.4g}, {hi:.4g}]")
        return seq.evolve(path=ManeuveredPath(path, transform, (lo, hi)),
                          extra_times=_window_times(lo, hi, event.t, cfg.event_samples) + [t0, t1],
                          events=self._replace_event(seq, event, done))

    @staticmethod
    def _lift_direction(path, event: MorphEvent, dim: int, lifted_edge, b_param: float,
                        other_edge, a_params, tol: Tolerances) -> np.ndarray:
        # orthogonal to both strand tangents at the contact; the new axis for zero-extended frames
        frame = path.at(event.t)
        tangents = []
        for edge, u in ((lifted_edge, b_param), (other_edge, a_params[0])):
            s = _strand(frame, edge)
            i = int(np.clip(np.searchsorted(s.params, u, side='right') - 1, 0, s.size - 2))
            d = s.vertices[i + 1] - s.vertices[i]
            if np.linalg.norm(d) > tol.eps_dist:
                tangents.append(d)
        for axis in range(dim - 1, -1, -1):
            n = np.zeros(dim)
            n[axis] = 1.0
            for d in tangents:
                for _ in range(2):
                    d_hat = d / np.linalg.norm(d)
                    n = n - (n @ d_hat) * d_hat
            if np.linalg.norm(n) > 1e-6:
                return n / np.linalg.norm(n)
        raise MorphError("no lift direction available")

    @staticmethod
    def _replace_event(seq: MorphSequence, old: MorphEvent, new: MorphEvent) -> List[MorphEvent]:
        events = [e for e in seq.events if e != old]
        events.append(new)
        return events

    # -- composite morphs --------------------------------------------------

    def _residual(self, seq: MorphSequence, tol: Tolerances) -> MorphSequence:
        for frame in seq.frames:
            report = classify(frame.curve, tol)
            if not report.meets(seq.target_class):
                return seq.obstructed(Obstruction(
                    'residual', frame.t, 0.0,
                    f"frame classified {report.class_label.value}, needs {seq.target_class.value}"))
        return seq

    def _repair(self, seq: MorphSequence, events: Sequence[MorphEvent], tol: Tolerances,
                allow_qtip: bool, allow_lift: bool, bump: Optional[float],
                lift_slack: Optional[Callable[[MorphEvent], float]] = None) -> MorphSequence:
        """Apply the maneuver for each event in t order; stop at the first obstruction"""
        dodged: List[Tuple[float, float]] = []
        for event in sorted(events, key=lambda e: (e.t, e.kind.priority)):
            if any(lo <= event.t <= hi for lo, hi in dodged) and event.kind is not EventKind.SINGLETON_COLLAPSE:
                continue
            try:
                if event.kind is EventKind.SINGLETON_COLLAPSE:
                    seq = self.dodge_singleton(seq, event, tol)
                    if seq.ok:
                        dodged.extend(e.window for e in seq.events
                                      if e.t == event.t and e.maneuver_applied is Maneuver.ROTATE_PI)
                elif event.kind in (EventKind.PAUSE, EventKind.ENDPOINT_PAUSE):
                    seq = self.reroute_pause(seq, event, tol)
                elif event.kind is EventKind.BACKTRACK:
                    if not allow_qtip:
                        return seq.obstructed(Obstruction('backtrack', event.t, 0.0,
                                                          "a backtrack cannot be capped inside the embeddings"),
                                              self._replace_event(seq, event, event))
                    seq = self.qtip_inflate(seq, event, None, tol)
                elif event.kind is EventKind.SELF_CROSS:
                    if not allow_lift:
                        return seq.obstructed(Obstruction('self_cross', event.t, 0.0,
                                                          "strands must pass through each other"),
                                              self._replace_event(seq, event, event))
                    slack = lift_slack(event) if lift_slack is not None else None
                    seq = self.lift_crossing_4d(seq, event, bump, tol, slack)
                else:
                    return seq.obstructed(Obstruction('vertex', event.t, 0.0,
                                                      f"vertex {event.location} loses local injectivity"),
                                          self._replace_event(seq, event, event))
            except MorphError as exc:
                return seq.obstructed(Obstruction(event.kind.value, event.t, 0.0, str(exc)),
                                      self._replace_event(seq, event, event))
            if not seq.ok:
                return seq
        return self._residual(seq, tol)

    def immersion_morph(self, p: Polyline, q: Polyline, k: Optional[int] = None,
                        tol: Optional[Tolerances] = None) -> MorphSequence:
        """Linear morph repaired by reroute, dodge and Q-tip so every frame is an immersion"""
        tol = resolve_tolerances(tol)
        for name, c in (('source', p), ('target', q)):
            if not classify(c, tol).meets(CurveClass.I):
                raise MorphError(f"{name} curve is not an immersion")
        times = self._uniform(self._frame_count(k))
        interp = self.interpolant(p, q, tol)
        critical = critical_times(interp, tol)
        events = self.scan(interp, times, CurveClass.I, tol, critical)
        seq = MorphSequence(interp, list(times) + critical, CurveClass.I, p, q, interp.speed, events)
        if events and p.dim < 2:
            first = events[0]
            return seq.obstructed(Obstruction('dimension', first.t, 0.0,
                                              f"{first.kind.value} in R^1 has no way around it"))
        seq = self._repair(seq, events, tol, allow_qtip=True, allow_lift=False, bump=None)
        self._log_outcome('Immersion', seq)
        return seq

    def embedding_ball_morph(self, p: Polyline, q: Polyline, k: Optional[int] = None,
                             tol: Optional[Tolerances] = None, allow_lift: bool = False,
                             bump: Optional[float] = None, center: Optional[Curve] = None,
                             radius: Optional[float] = None) -> MorphSequence:
        """
        Linear morph between embeddings with self-contacts lifted into R^4.

        Without allow_lift a strand passage is reported as a self_cross
        obstruction. With a ball (center, radius) the lift slack is what
        is left of the radius at the crossing.
        """
        tol = resolve_tolerances(tol)
        for name, c in (('source', p), ('target', q)):
            if not classify(c, tol).meets(CurveClass.E):
                raise MorphError(f"{name} curve is not an embedding")
        times = self._uniform(self._frame_count(k))
        interp = self.interpolant(p, q, tol)
        critical = sorted(set(critical_times(interp, tol)) | set(strand_passages(interp, 0.0, 1.0, tol)))
        events = self.scan(interp, times, CurveClass.E, tol, critical)
        seq = MorphSequence(interp, list(times) + critical, CurveClass.E, p, q, interp.speed, events)

        lift_slack = None
        if center is not None and radius is not None:
            def lift_slack(event: MorphEvent) -> float:
                worst = 0.0
                for t in (event.span[0], event.t, event.span[1]):
                    frame = seq.path.at(t)
                    ref = seq.path.aligned(center, t)
                    bound = _coupled(frame, _extend(center, frame.dim))
                    if ref is not None:
                        bound = min(bound, _coupled(frame, ref))
                    worst = max(worst, bound)
                return radius - worst

        if events and p.dim < 2:
            first = events[0]
            return seq.obstructed(Obstruction('dimension', first.t, 0.0,
                                              f"{first.kind.value} in R^1 has no way around it"))
        seq = self._repair(seq, events, tol, allow_qtip=False, allow_lift=allow_lift, bump=bump,
                           lift_slack=lift_slack)
        self._log_outcome('Embedding', seq)
        return seq

    def embed_morph(self, p: Polyline, q: Polyline, k: Optional[int] = None,
                    tol: Optional[Tolerances] = None) -> MorphSequence:
        """
        Four-phase morph through single segments.

        Shrink p onto its final segment by restriction, turn that segment to
        q's final direction about its midpoint, slide and scale it onto q's
        final segment, then grow q back out by restriction.
        """
        tol = resolve_tolerances(tol)
        check_same_dim(p, q)
        for name, c in (('source', p), ('target', q)):
            if not classify(c, tol).meets(CurveClass.E):
                raise MorphError(f"{name} curve is not an embedding")
        times = list(self._uniform(self._frame_count(k))) + [0.25, 0.5, 0.75]

        if p.size == q.size and coupled_distance(p, q) <= tol.eps_dist:
            return MorphSequence(FunctionPath(lambda t: p, p.dim), times, CurveClass.E, p, q, 0.0)

        seg_p = (p.vertices[-2], p.vertices[-1])
        seg_q = (q.vertices[-2], q.vertices[-1])
        len_p = float(np.linalg.norm(seg_p[1] - seg_p[0]))
        len_q = float(np.linalg.norm(seg_q[1] - seg_q[0]))
        if len_p <= tol.eps_dist or len_q <= tol.eps_dist:
            raise MorphError("final segment has zero length")
        dir_p = (seg_p[1] - seg_p[0]) / len_p
        dir_q = (seg_q[1] - seg_q[0]) / len_q
        mid_p = 0.5 * (seg_p[0] + seg_p[1])
        mid_q = 0.5 * (seg_q[0] + seg_q[1])
        angle = float(angle_between(dir_p, dir_q)[0])

        if p.dim < 2 and angle > tol.theta_tol:
            seq = MorphSequence(FunctionPath(lambda t: p if t < 1.0 else q, p.dim), [0.0, 1.0],
                                CurveClass.E, p, q, 0.0)
            return seq.obstructed(Obstruction('dimension', 0.5, 0.0,
                                              "reversed orientations in R^1 cannot be joined"))

        if angle <= tol.theta_tol:
            plane_e = None
        else:
            w = dir_q - (dir_q @ dir_p) * dir_p
            plane_e = w / np.linalg.norm(w) if np.linalg.norm(w) > 1e-12 else _perpendicular(dir_p)
        cut_p, cut_q = float(p.params[-2]), float(q.params[-2])

        def segment(mid, direction, length):
            half = 0.5 * length * direction
            return Polyline([mid - half, mid + half])

        def frame(t: float) -> Polyline:
            if t <= 0.0:
                return p
            if t >= 1.0:
                return q
            if t <= 0.25:
                lam = cut_p * (t / 0.25)
                return restrict(p, lam, 1.0) if lam > 0 else p
            if t <= 0.5:
                beta = (t - 0.25) / 0.25
                direction = dir_p if plane_e is None else _rotation(dir_p, plane_e, angle * beta) @ dir_p
                return segment(mid_p, direction, len_p)
            if t <= 0.75:
                beta = (t - 0.5) / 0.25
                return segment((1 - beta) * mid_p + beta * mid_q, dir_q, (1 - beta) * len_p + beta * len_q)
            lam = cut_q * ((1.0 - t) / 0.25)
            return restrict(q, lam, 1.0) if lam > 0 else q

        def param_speed(c: Polyline) -> float:
            return float(np.max(c.segment_lengths() / np.diff(c.params))) if c.size > 1 else 0.0

        speed = 4.0 * max(cut_p * param_speed(p) + len_p, cut_q * param_speed(q) + len_q,
                          angle * 0.5 * len_p,
                          float(np.linalg.norm(mid_q - mid_p)) + 0.5 * abs(len_q - len_p))
        seq = MorphSequence(FunctionPath(frame, p.dim), times, CurveClass.E, p, q, speed)
        seq = self._residual(seq, tol)
        self._log_outcome('Embed', seq)
        return seq

    def concat_morphs(self, first: MorphSequence, second: MorphSequence) -> MorphSequence:
        """first on [0, 1/2] then second on [1/2, 1]"""
        path = PiecewisePath([(0.0, 0.5, first.path), (0.5, 1.0, second.path)])
        times = [0.5 * t for t in first.times] + [0.5 + 0.5 * t for t in second.times]
        events = ([e.rescaled(0.5, 0.0) for e in first.events]
                  + [e.rescaled(0.5, 0.5) for e in second.events])
        obstruction = None
        if first.obstruction is not None:
            obstruction = replace(first.obstruction, t=0.5 * first.obstruction.t)
        elif second.obstruction is not None:
            obstruction = replace(second.obstruction, t=0.5 + 0.5 * second.obstruction.t)
        target_class = min(first.target_class, second.target_class, key=lambda c: c.rank)
        return MorphSequence(path, times, target_class, first.source, second.target,
                             2.0 * max(first.speed, second.speed), events, obstruction)

    # -- graph-maps --------------------------------------------------------

    def graph_interpolant(self, a: GraphMap, b: GraphMap,
                          tol: Optional[Tolerances] = None) -> GraphInterpolant:
        """Pair a's smoothed edges with b's through the distance-minimizing isomorphism"""
        tol = resolve_tolerances(tol)
        match = graph_frechet_match(a, b, tol)
        if match.isomorphism is None or not math.isfinite(match.distance):
            raise MorphError("graph-maps are not homeomorphic; no morph exists")
        sa, sb = smooth(a.graph), smooth(b.graph)
        iso = match.isomorphism
        vertex_map = dict(iso.vertex_map)

        source_curves, target_curves, edges = {}, {}, {}
        source_points = {v: a.point(v) for v in sa.graph.vertex_ids}
        target_points = {v: b.point(vertex_map[v]) for v in sa.branch_vertices}

        for ge, he, flipped in iso.edge_map:
            pc = chain_polyline(a, sa.topo_edges[ge].chain, tol)
            qc = chain_polyline(b, sb.topo_edges[he].chain, tol)
            qc = reverse(qc) if flipped else qc
            source_curves[ge], target_curves[ge] = pc, qc
            edges[ge] = self.interpolant(pc, qc, tol)

        for gc, hc in iso.circle_map:
            g_loop = closed_loop(a, sa.topo_edges[gc], tol)
            h_loop = closed_loop(b, sb.topo_edges[hc], tol)
            start, reversed_ = match.circle_starts.get(gc, (0.0, False))
            h_loop = rotate_loop(reverse(h_loop) if reversed_ else h_loop, start, tol)
            source_curves[gc], target_curves[gc] = g_loop, h_loop
            edges[gc] = self.interpolant(g_loop, h_loop, tol)
            target_points[sa.topo_edges[gc].u] = h_loop.start

        source_frame = GraphMap(sa.graph, source_points, source_curves, tol)
        target_frame = GraphMap(sa.graph, target_points, target_curves, tol)
        return GraphInterpolant(sa.graph, source_frame, target_frame, edges, a, b)

    def graph_morph(self, a: GraphMap, b: GraphMap, target_class='I', k: Optional[int] = None,
                    tol: Optional[Tolerances] = None, bump: Optional[float] = None) -> MorphSequence:
        """
        Morph of graph-maps on a's smoothed structure: vertices move on
        straight lines, edges are repaired like path morphs, and for target E
        every cross-edge contact is lifted.
        """
        tol = resolve_tolerances(tol)
        target = CurveClass.parse(target_class)
        interp = self.graph_interpolant(a, b, tol)
        for name, frame in (('source', interp.source_frame), ('target', interp.target_frame)):
            if not classify(frame, tol).meets(target):
                raise MorphError(f"{name} graph-map is not in class {target.value}")
        times = self._uniform(self._frame_count(k))
        critical = critical_times(interp, tol)
        if target is CurveClass.E:
            critical = sorted(set(critical) | set(strand_passages(interp, 0.0, 1.0, tol)))
        events = self.scan(interp, times, target, tol, critical)
        seq = MorphSequence(interp, list(times) + critical, target, interp.source_frame,
                            interp.target_frame, interp.speed, events)
        if target is CurveClass.C:
            return seq
        if events and interp.dim < 2:
            first = events[0]
            return seq.obstructed(Obstruction('dimension', first.t, 0.0,
                                              f"{first.kind.value} in R^1 has no way around it"))
        seq = self._repair(seq, events, tol, allow_qtip=target is CurveClass.I,
                           allow_lift=target is CurveClass.E, bump=bump)
        self._log_outcome('Graph', seq)
        return seq

    # -- verification ------------------------------------------------------

    def verify_morph(self, seq: MorphSequence, center: Optional[Curve] = None,
                     radius: Optional[float] = None, tol: Optional[Tolerances] = None) -> 'VerificationReport':
        """Class membership, step continuity and (optionally) ball containment of every frame"""
        tol = resolve_tolerances(tol)
        report = VerificationReport(target_class=seq.target_class, frames_checked=len(seq.frames))
        if seq.obstruction is not None:
            report.obstruction = seq.obstruction
            report.notes.append(f"sequence carries an obstruction ({seq.obstruction.constraint})")

        for i, frame in enumerate(seq.frames):
            label = classify(frame.curve, tol).class_label
            if not seq.target_class.admits(label):
                report.class_failures.append((i, frame.t, label.value))

        for i in range(len(seq.frames) - 1):
            f0, f1 = seq.frames[i], seq.frames[i + 1]
            bound = (f1.t - f0.t) * seq.speed + seq.maneuver_load(f0.t, f1.t) + tol.eps_dist
            a, b = f0.curve, f1.curve
            if a.dim != b.dim:
                dim = max(a.dim, b.dim)
                a, b = _extend(a, dim), _extend(b, dim)
            structure_ok = not isinstance(a, GraphMap) or a.graph is b.graph
            step = _coupled(a, b) if structure_ok else math.inf
            if step > bound:
                step = _frame_distance(a, b, tol)
            report.max_step_ratio = max(report.max_step_ratio, step / bound if bound > 0 else 0.0)
            if step > bound:
                report.continuity_failures.append((i, f1.t, step, bound))

        if center is not None and radius is not None:
            for i, frame in enumerate(seq.frames):
                inside, value = self._inside_ball(seq, frame, center, radius, tol)
                report.max_center_bound = max(report.max_center_bound, value)
                if not inside:
                    report.ball_failures.append((i, frame.t, value, radius))

        report.finish()
        status = '✅' if report.passed else '❌'
        self.logger.debug(f"{status} verify_morph: {report.summary()}")
        return report

    @staticmethod
    def _inside_ball(seq: MorphSequence, frame: Frame, center: Curve, radius: float,
                     tol: Tolerances) -> Tuple[bool, float]:
        curve = frame.curve
        dim = max(curve.dim, center.dim)
        curve, ext_center = _extend(curve, dim), _extend(center, dim)
        if isinstance(curve, GraphMap):
            value = graph_frechet(curve, ext_center, tol)
            return value < radius, value

        bound = coupled_distance(curve, ext_center)
        ref = seq.path.aligned(center, frame.t)
        if ref is not None:
            bound = min(bound, coupled_distance(curve, _extend(ref, dim)))
        if bound < radius:
            return True, bound
        inner = radius * (1.0 - 1e-9)
        if free_space_decision(curve, ext_center, inner)[0]:
            return True, inner
        return False, frechet_enclosure(curve, ext_center, tol).value

    def _log_outcome(self, name: str, seq: MorphSequence):
        handled = sum(1 for e in seq.events if e.maneuver_applied is not Maneuver.NONE)
        if seq.ok:
            self.logger.debug(f"✅ {name} morph: {len(seq.frames)} frames, {handled} maneuvers")
        else:
            self.logger.debug(f"⚠️ {name} morph obstructed: {seq.obstruction.constraint}")


@dataclass
class VerificationReport:
    """Outcome of verify_morph; failures carry (frame index, t, ...) tuples"""
    target_class: CurveClass
    frames_checked: int = 0
    class_failures: List[Tuple[int, float, str]] = field(default_factory=list)
    continuity_failures: List[Tuple[int, float, float, float]] = field(default_factory=list)
    ball_failures: List[Tuple[int, float, float, float]] = field(default_factory=list)
    obstruction: Optional[Obstruction] = None
    max_step_ratio: float = 0.0
    max_center_bound: float = 0.0
    worst_frame: Optional[int] = None
    worst_t: Optional[float] = None
    passed: bool = False
    notes: List[str] = field(default_factory=list)

    def finish(self):
        self.passed = (self.obstruction is None and not self.class_failures
                       and not self.continuity_failures and not self.ball_failures)
        worst = None
        if self.ball_failures:
            worst = max(self.ball_failures, key=lambda f: f[2] - f[3])
        elif self.continuity_failures:
            worst = max(self.continuity_failures, key=lambda f: f[2] - f[3])
        elif self.class_failures:
            worst = self.class_failures[0]
        if worst is not None:
            self.worst_frame, self.worst_t = worst[0], worst[1]

    def summary(self) -> str:
        return (f"passed={self.passed} class_failures={len(self.class_failures)} "
                f"continuity_failures={len(self.continuity_failures)} "
                f"ball_failures={len(self.ball_failures)}")

    def to_dict(self) -> dict:
        return {
            'passed': self.passed,
            'target_class': self.target_class.value,
            'frames_checked': self.frames_checked,
            'class_failures': [list(f) for f in self.class_failures],
            'continuity_failures': [list(f) for f in self.continuity_failures],
            'ball_failures': [list(f) for f in self.ball_failures],
            'obstruction': None if self.obstruction is None else self.obstruction.to_dict(),
            'max_step_ratio': self.max_step_ratio,
            'max_center_bound': self.max_center_bound,
            'worst_frame': self.worst_frame,
            'worst_t': self.worst_t,
        }


# Global engine instance
morph_engine = MorphEngine()


# Export functions for easy use
def common_reparameterize(p: Polyline, q: Polyline, tol: Optional[Tolerances] = None):
    return morph_engine.common_reparameterize(p, q, tol)


def linear_morph(p: Polyline, q: Polyline, k: Optional[int] = None,
                 tol: Optional[Tolerances] = None) -> MorphSequence:
    return morph_engine.linear_morph(p, q, k, tol)


def reroute_pause(seq: MorphSequence, event: MorphEvent, tol: Optional[Tolerances] = None) -> MorphSequence:
    return morph_engine.reroute_pause(seq, event, tol)


def dodge_singleton(seq: MorphSequence, event: MorphEvent, tol: Optional[Tolerances] = None,
                    slack: Optional[float] = None) -> MorphSequence:
    return morph_engine.dodge_singleton(seq, event, tol, slack)


def qtip_inflate(seq: MorphSequence, event: MorphEvent, radius: Optional[float] = None,
                 tol: Optional[Tolerances] = None) -> MorphSequence:
    return morph_engine.qtip_inflate(seq, event, radius, tol)


def lift_crossing_4d(seq: MorphSequence, event: MorphEvent, bump: Optional[float] = None,
                     tol: Optional[Tolerances] = None, slack: Optional[float] = None) -> MorphSequence:
    return morph_engine.lift_crossing_4d(seq, event, bump, tol, slack)


def embed_morph(p: Polyline, q: Polyline, k: Optional[int] = None,
                tol: Optional[Tolerances] = None) -> MorphSequence:
    return morph_engine.embed_morph(p, q, k, tol)


def immersion_morph(p: Polyline, q: Polyline, k: Optional[int] = None,
                    tol: Optional[Tolerances] = None) -> MorphSequence:
    return morph_engine.immersion_morph(p, q, k, tol)


def embedding_ball_morph(p: Polyline, q: Polyline, k: Optional[int] = None,
                         tol: Optional[Tolerances] = None, allow_lift: bool = False,
                         bump: Optional[float] = None, center=None, radius=None) -> MorphSequence:
    return morph_engine.embedding_ball_morph(p, q, k, tol, allow_lift, bump, center, radius)


def graph_morph(a: GraphMap, b: GraphMap, target_class='I', k: Optional[int] = None,
                tol: Optional[Tolerances] = None, bump: Optional[float] = None) -> MorphSequence:
    return morph_engine.graph_morph(a, b, target_class, k, tol, bump)


def concat_morphs(first: MorphSequence, second: MorphSequence) -> MorphSequence:
    return morph_engine.concat_morphs(first, second)


def verify_morph(seq: MorphSequence, center=None, radius: Optional[float] = None,
                 tol: Optional[Tolerances] = None) -> VerificationReport:
    return morph_engine.verify_morph(seq, center, radius, tol)
