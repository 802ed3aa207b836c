#!/usr/bin/env python3
"""
Fréchet distance engines
Discrete coupling DP, free-space decision, binary-search continuous distance,
matching extraction, oriented/unoriented path distance and graph distance
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from frechet_errors import DecisionError, DimensionMismatch
from geometry import (Polyline, Tolerances, check_same_dim, concat, hausdorff_estimate,
                      resolve_tolerances, restrict, reverse)
from graph_model import (EdgeIsomorphism, GraphMap, chain_polyline, closed_loop,
                         enumerate_isomorphisms, smooth)

logger = logging.getLogger(__name__)

# Relative widening of epsilon so boundary cases count as free
_INCLUSIVE = 1e-12
_MAX_BISECTIONS = 200


def discrete_frechet(p: Polyline, q: Polyline) -> float:
    """
    Discrete Fréchet distance between the vertex sequences of p and q.

    Classic min-max coupling recurrence, evaluated one anti-diagonal at a
    time on the cdist matrix.
    """
    check_same_dim(p, q)
    dist = cdist(p.vertices, q.vertices)
    m, n = dist.shape
    ca = np.full((m + 1, n + 1), np.inf)
    ca[0, 0] = -np.inf
    for k in range(m + n - 1):
        i = np.arange(max(0, k - n + 1), min(k, m - 1) + 1)
        j = k - i
        best = np.minimum(np.minimum(ca[i, j + 1], ca[i + 1, j]), ca[i, j])
        ca[i + 1, j + 1] = np.maximum(best, dist[i, j])
    return float(ca[m, n])


def coupled_distance(p: Polyline, q: Polyline) -> float:
    """sup_t |p(t) - q(t)| under the identity coupling; an upper bound on d_FP"""
    check_same_dim(p, q)
    ts = np.union1d(p.params, q.params)
    return float(np.linalg.norm(p.evaluate(ts) - q.evaluate(ts), axis=1).max())


def _free_intervals(points: np.ndarray, seg_start: np.ndarray, seg_end: np.ndarray, eps: float):
    """
    Free sub-intervals of every segment against every point.

    Returns (lo, hi) arrays of shape (len(points), len(segments)); an empty
    interval has lo = +inf and hi = -inf.
    """
    d = seg_end - seg_start
    rel = seg_start[None, :, :] - points[:, None, :]
    a = np.einsum('ij,ij->i', d, d)[None, :]
    b = 2.0 * np.einsum('kij,ij->ki', rel, d)
    c = np.einsum('kij,kij->ki', rel, rel) - eps * eps
    shape = b.shape
    a = np.broadcast_to(a, shape)

    lo = np.full(shape, np.inf)
    hi = np.full(shape, -np.inf)

    flat = a <= 0
    inside = flat & (c <= 0)
    lo[inside], hi[inside] = 0.0, 1.0

    disc = b * b - 4.0 * a * c
    ok = ~flat & (disc >= 0)
    root = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide='ignore', invalid='ignore'):
        t1 = np.where(ok, (-b - root) / (2.0 * a), np.inf)
        t2 = np.where(ok, (-b + root) / (2.0 * a), -np.inf)
    t1 = np.maximum(t1, 0.0)
    t2 = np.minimum(t2, 1.0)
    good = ok & (t1 <= t2)
    lo[good] = t1[good]
    hi[good] = t2[good]
    return lo, hi


@dataclass
class FreeSpaceDiagram:
    """
    Free space of p and q at epsilon, with reachability.

    Cell (i, j) pairs segment i of p with segment j of q. left_* holds the
    vertical edges (vertex i of p against segment j of q, local coordinate
    along q) and bottom_* the horizontal ones (segment i of p against vertex
    j of q, local coordinate along p). reach_* are the reachable parts.
    """
    epsilon: float
    p_size: int
    q_size: int
    decision: bool
    left_free: Tuple[np.ndarray, np.ndarray] = None
    bottom_free: Tuple[np.ndarray, np.ndarray] = None
    left_reach: Tuple[np.ndarray, np.ndarray] = None
    bottom_reach: Tuple[np.ndarray, np.ndarray] = None

    @property
    def cells(self) -> Tuple[int, int]:
        return max(self.p_size - 1, 0), max(self.q_size - 1, 0)


def _point_curve_max(point: np.ndarray, c: Polyline) -> float:
    return float(np.linalg.norm(c.vertices - point, axis=1).max())


def free_space_decision(p: Polyline, q: Polyline, epsilon: float) -> Tuple[bool, FreeSpaceDiagram]:
    """Decide d_FP(p, q) <= epsilon; boundary values count as free"""
    check_same_dim(p, q)
    if epsilon < 0:
        raise DecisionError(f"epsilon must be >= 0, got {epsilon}")
    eps = epsilon * (1.0 + _INCLUSIVE) + 1e-15
    m, n = p.size, q.size

    if m == 1 or n == 1:
        value = _point_curve_max(p.start, q) if m == 1 else _point_curve_max(q.start, p)
        ok = value <= eps
        return ok, FreeSpaceDiagram(epsilon, m, n, ok)

    P, Q = p.vertices, q.vertices
    left_lo, left_hi = _free_intervals(P, Q[:-1], Q[1:], eps)                # (m, n-1)
    b_lo, b_hi = _free_intervals(Q, P[:-1], P[1:], eps)                      # (n, m-1)
    bottom_lo, bottom_hi = b_lo.T.copy(), b_hi.T.copy()                      # (m-1, n)

    lr_lo = np.full((m, n - 1), np.inf)
    lr_hi = np.full((m, n - 1), -np.inf)
    br_lo = np.full((m - 1, n), np.inf)
    br_hi = np.full((m - 1, n), -np.inf)

    start_free = np.linalg.norm(P[0] - Q[0]) <= eps
    end_free = np.linalg.norm(P[-1] - Q[-1]) <= eps

    if start_free:
        # straight runs along the two boundary lines through (0, 0)
        col_ok = left_lo[0] <= 0.0
        col_full = col_ok & (left_hi[0] >= 1.0)
        col_reach = col_ok & np.concatenate([[True], np.cumprod(col_full)[:-1].astype(bool)])
        lr_lo[0, col_reach] = left_lo[0, col_reach]
        lr_hi[0, col_reach] = left_hi[0, col_reach]

        row_ok = bottom_lo[:, 0] <= 0.0
        row_full = row_ok & (bottom_hi[:, 0] >= 1.0)
        row_reach = row_ok & np.concatenate([[True], np.cumprod(row_full)[:-1].astype(bool)])
        br_lo[row_reach, 0] = bottom_lo[row_reach, 0]
        br_hi[row_reach, 0] = bottom_hi[row_reach, 0]

        for k in range((m - 1) + (n - 1) - 1):
            i = np.arange(max(0, k - (n - 2)), min(k, m - 2) + 1)
            j = k - i
            l_ok = lr_lo[i, j] <= lr_hi[i, j]
            b_ok = br_lo[i, j] <= br_hi[i, j]

            # right edge of the cell
            f_lo, f_hi = left_lo[i + 1, j], left_hi[i + 1, j]
            new_lo = np.where(b_ok, f_lo, np.where(l_ok, np.maximum(f_lo, lr_lo[i, j]), np.inf))
            empty = new_lo > f_hi
            lr_lo[i + 1, j] = np.where(empty, np.inf, new_lo)
            lr_hi[i + 1, j] = np.where(empty, -np.inf, f_hi)

            # top edge of the cell
            f_lo, f_hi = bottom_lo[i, j + 1], bottom_hi[i, j + 1]
            new_lo = np.where(l_ok, f_lo, np.where(b_ok, np.maximum(f_lo, br_lo[i, j]), np.inf))
            empty = new_lo > f_hi
            br_lo[i, j + 1] = np.where(empty, np.inf, new_lo)
            br_hi[i, j + 1] = np.where(empty, -np.inf, f_hi)

    decision = bool(start_free and end_free
                    and (lr_hi[m - 1, n - 2] >= 1.0 or br_hi[m - 2, n - 1] >= 1.0))
    return decision, FreeSpaceDiagram(
        epsilon=epsilon, p_size=m, q_size=n, decision=decision,
        left_free=(left_lo, left_hi), bottom_free=(bottom_lo, bottom_hi),
        left_reach=(lr_lo, lr_hi), bottom_reach=(br_lo, br_hi))


@dataclass(frozen=True)
class FrechetEnclosure:
    """Guaranteed bracket lo <= d_FP <= hi"""
    lo: float
    hi: float

    @property
    def value(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def as_list(self) -> List[float]:
        return [self.lo, self.hi]


def frechet_enclosure(p: Polyline, q: Polyline, tol: Optional[Tolerances] = None) -> FrechetEnclosure:
    """Binary search on epsilon between certified lower and upper bounds"""
    tol = resolve_tolerances(tol)
    check_same_dim(p, q)

    if p.size == 1 or q.size == 1:
        value = _point_curve_max(p.start, q) if p.size == 1 else _point_curve_max(q.start, p)
        return FrechetEnclosure(value, value)

    ends = max(float(np.linalg.norm(p.start - q.start)), float(np.linalg.norm(p.end - q.end)))
    lo = max(ends, hausdorff_estimate(p, q, tol).lower)
    hi = min(discrete_frechet(p, q), coupled_distance(p, q))
    lo = min(lo, hi)

    if free_space_decision(p, q, lo)[0]:
        return FrechetEnclosure(lo, lo)

    floor = max(tol.eps_dist, 1e-15 * max(1.0, hi))
    for _ in range(_MAX_BISECTIONS):
        if hi - lo <= floor:
            break
        mid = 0.5 * (lo + hi)
        if free_space_decision(p, q, mid)[0]:
            hi = mid
        else:
            lo = mid
    return FrechetEnclosure(lo, hi)


def continuous_frechet(p: Polyline, q: Polyline, tol: Optional[Tolerances] = None) -> float:
    """d_FP(p, q) to within tol.eps_dist (midpoint of the enclosure)"""
    return frechet_enclosure(p, q, tol).value


@dataclass(frozen=True)
class Matching:
    """
    Monotone coupling of two curves given by parameter breakpoints (s_k, t_k).

    Both curves are affine in the coupled parameter between consecutive
    breakpoints, so realized_sup is attained at a breakpoint.
    """
    breakpoints: np.ndarray
    realized_sup: float

    @property
    def s(self) -> np.ndarray:
        return self.breakpoints[:, 0]

    @property
    def t(self) -> np.ndarray:
        return self.breakpoints[:, 1]


def _grid_to_param(c: Polyline, x: float) -> float:
    i = min(int(math.floor(x)), c.size - 2)
    local = x - i
    return float(c.params[i] + local * (c.params[i + 1] - c.params[i]))


def _with_grid_lines(path: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    # boundary runs can span several cells; split them at integer coordinates
    out = [path[0]]
    for (x0, y0), (x1, y1) in zip(path, path[1:]):
        if x0 == x1 and math.floor(y1) - math.ceil(y0) >= 0:
            out.extend((x0, float(y)) for y in range(int(math.ceil(y0)), int(math.floor(y1)) + 1)
                       if y0 < y < y1)
        elif y0 == y1 and math.floor(x1) - math.ceil(x0) >= 0:
            out.extend((float(x), y0) for x in range(int(math.ceil(x0)), int(math.floor(x1)) + 1)
                       if x0 < x < x1)
        out.append((x1, y1))
    return out


def extract_matching(fsd: FreeSpaceDiagram, p: Polyline, q: Polyline) -> Matching:
    """
    Lowest-leftmost monotone path through the reachable free space.

    Walking back from (1, 1), each cell is entered from its bottom edge at the
    smallest reachable p-coordinate when possible, otherwise from its left
    edge at the smallest reachable q-coordinate.
    """
    if not fsd.decision:
        raise DecisionError(f"no monotone path at epsilon={fsd.epsilon}: decision was false")
    if (fsd.p_size, fsd.q_size) != (p.size, q.size):
        raise DecisionError("free-space diagram was built for different curves")

    m, n = p.size, q.size
    if m == 1 or n == 1:
        if m == 1:
            params = np.column_stack([np.zeros(n), q.params])
            params[-1, 0] = 1.0
        else:
            params = np.column_stack([p.params, np.zeros(m)])
            params[-1, 1] = 1.0
        if m == 1 and n == 1:
            params = np.array([[0.0, 0.0], [1.0, 1.0]])
        return _finish_matching(params, p, q)

    lr_lo, _ = fsd.left_reach
    br_lo, _ = fsd.bottom_reach
    lr_ok = fsd.left_reach[0] <= fsd.left_reach[1]
    br_ok = fsd.bottom_reach[0] <= fsd.bottom_reach[1]

    x, y = float(m - 1), float(n - 1)
    i, j = m - 2, n - 2
    path = [(x, y)]
    while (x, y) != (0.0, 0.0):
        if br_ok[i, j] and i + br_lo[i, j] <= x:
            x, y = i + float(br_lo[i, j]), float(j)
            path.append((x, y))
            if j == 0:
                break
            j -= 1
        elif lr_ok[i, j] and j + lr_lo[i, j] <= y:
            x, y = float(i), j + float(lr_lo[i, j])
            path.append((x, y))
            if i == 0:
                break
            i -= 1
        else:
            raise DecisionError(f"reachability backtrace stalled in cell ({i}, {j})")
    if path[-1] != (0.0, 0.0):
        path.append((0.0, 0.0))

    path = _with_grid_lines(path[::-1])
    params = np.array([[_grid_to_param(p, gx), _grid_to_param(q, gy)] for gx, gy in path])
    return _finish_matching(params, p, q)


def _finish_matching(params: np.ndarray, p: Polyline, q: Polyline) -> Matching:
    params = np.maximum.accumulate(np.clip(params, 0.0, 1.0), axis=0)
    params[0] = (0.0, 0.0)
    params[-1] = (1.0, 1.0)
    keep = np.concatenate([[True], np.any(np.diff(params, axis=0) > 0, axis=1)])
    params = params[keep]
    sup = float(np.linalg.norm(p.evaluate(params[:, 0]) - q.evaluate(params[:, 1]), axis=1).max())
    params.setflags(write=False)
    return Matching(params, sup)


def matching_for(p: Polyline, q: Polyline, tol: Optional[Tolerances] = None) -> Tuple[Matching, FrechetEnclosure]:
    """A near-optimal matching, extracted at the upper end of the distance enclosure"""
    tol = resolve_tolerances(tol)
    enclosure = frechet_enclosure(p, q, tol)
    ok, fsd = free_space_decision(p, q, enclosure.hi)
    if not ok:
        # the enclosure's hi was decided true; retry a hair above for rounding
        ok, fsd = free_space_decision(p, q, enclosure.hi + tol.eps_dist)
    return extract_matching(fsd, p, q), enclosure


def path_frechet(p: Polyline, q: Polyline, oriented: bool = True,
                 tol: Optional[Tolerances] = None) -> float:
    """Oriented d_FP, or its unoriented variant min(d(p, q), d(p, reverse q))"""
    forward = continuous_frechet(p, q, tol)
    if oriented:
        return forward
    return min(forward, continuous_frechet(p, reverse(q), tol))


def path_enclosure(p: Polyline, q: Polyline, oriented: bool = True,
                   tol: Optional[Tolerances] = None) -> FrechetEnclosure:
    forward = frechet_enclosure(p, q, tol)
    if oriented:
        return forward
    backward = frechet_enclosure(p, reverse(q), tol)
    return forward if forward.value <= backward.value else backward


def rotate_loop(c: Polyline, s: float, tol: Optional[Tolerances] = None) -> Polyline:
    """Closed curve c traversed from parameter s back around to s"""
    if s <= 0.0 or s >= 1.0 or c.size == 1:
        return c
    return concat(restrict(c, s, 1.0), restrict(c, 0.0, s), tol)


@dataclass
class GraphMatch:
    """Minimizer of the graph Fréchet distance over enumerated isomorphisms"""
    distance: float
    isomorphism: Optional[EdgeIsomorphism] = None
    circle_starts: Dict[str, Tuple[float, bool]] = field(default_factory=dict)
    circle_error: float = 0.0
    candidates: int = 0


class GraphFrechetEngine:
    """Graph Fréchet distance with per-call caches of edge and circle distances"""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)

    def match(self, a: GraphMap, b: GraphMap, tol: Optional[Tolerances] = None,
              cap: Optional[int] = None, circle_samples: Optional[int] = None) -> GraphMatch:
        tol = resolve_tolerances(tol)
        if a.dim != b.dim:
            raise DimensionMismatch(a.dim, b.dim, "graph-maps")
        if circle_samples is None:
            from frechet_config import config
            circle_samples = config.circle_samples

        sa, sb = smooth(a.graph), smooth(b.graph)
        isos = enumerate_isomorphisms(sa, sb, cap)
        if not isos:
            self.logger.debug("📊 Graphs are not homeomorphic: distance is infinite")
            return GraphMatch(math.inf)

        edge_cache: Dict[Tuple[str, str, bool], float] = {}
        circle_cache: Dict[Tuple[str, str], Tuple[float, float, bool, float]] = {}

        def edge_distance(ge: str, he: str, flipped: bool) -> float:
            key = (ge, he, flipped)
            if key not in edge_cache:
                pc = chain_polyline(a, sa.topo_edges[ge].chain, tol)
                qc = chain_polyline(b, sb.topo_edges[he].chain, tol)
                edge_cache[key] = continuous_frechet(pc, reverse(qc) if flipped else qc, tol)
            return edge_cache[key]

        def circle_distance(gc: str, hc: str):
            key = (gc, hc)
            if key not in circle_cache:
                circle_cache[key] = self._circle_alignment(
                    closed_loop(a, sa.topo_edges[gc], tol), closed_loop(b, sb.topo_edges[hc], tol),
                    tol, circle_samples)
            return circle_cache[key]

        best = GraphMatch(math.inf, candidates=len(isos))
        for iso in isos:
            worst = 0.0
            for gv, hv in iso.vertex_map:
                worst = max(worst, float(np.linalg.norm(a.point(gv) - b.point(hv))))
            if worst >= best.distance:
                continue
            for ge, he, flipped in iso.edge_map:
                worst = max(worst, edge_distance(ge, he, flipped))
                if worst >= best.distance:
                    break
            if worst >= best.distance:
                continue
            starts, error = {}, 0.0
            for gc, hc in iso.circle_map:
                value, start, reversed_, spacing = circle_distance(gc, hc)
                worst = max(worst, value)
                starts[gc] = (start, reversed_)
                error = max(error, spacing)
                if worst >= best.distance:
                    break
            if worst < best.distance:
                best = GraphMatch(worst, iso, starts, error, len(isos))

        self.logger.debug(f"📊 Graph Fréchet over {len(isos)} isomorphisms: {best.distance:.6g}")
        return best

    def _circle_alignment(self, g_loop: Polyline, h_loop: Polyline, tol: Tolerances,
                          samples: int) -> Tuple[float, float, bool, float]:
        """
        Best alignment of two closed curves over candidate start points.

        Candidates are h's vertices plus arc-length samples, in both
        orientations. Returns (distance, start param, reversed, spacing) where
        spacing bounds the error from restricting starts to candidates.
        """
        lengths = h_loop.segment_lengths()
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        total = float(cum[-1])
        if total == 0:
            return continuous_frechet(g_loop, h_loop, tol), 0.0, False, 0.0

        samples = max(int(samples), 2)
        arc = np.union1d(cum, np.linspace(0.0, total, samples))
        spacing = float(np.diff(arc).max())
        # arc length -> parameter
        starts = np.interp(arc[:-1], cum, h_loop.params)
        g0 = g_loop.start

        best = (math.inf, 0.0, False)
        for reversed_ in (False, True):
            loop = reverse(h_loop) if reversed_ else h_loop
            cand = (1.0 - starts) % 1.0 if reversed_ else starts
            order = np.argsort(np.linalg.norm(loop.evaluate(cand) - g0, axis=1), kind='stable')
            for s in cand[order]:
                if float(np.linalg.norm(loop.evaluate(s) - g0)) >= best[0]:
                    break
                value = continuous_frechet(g_loop, rotate_loop(loop, float(s), tol), tol)
                if value < best[0]:
                    best = (value, float(s), reversed_)
        return best[0], best[1], best[2], spacing


# Global engine instance
graph_engine = GraphFrechetEngine()


# Export functions for easy use
def graph_frechet(a: GraphMap, b: GraphMap, tol: Optional[Tolerances] = None,
                  cap: Optional[int] = None) -> float:
    """d_FG(a, b): +inf when the graphs are not homeomorphic"""
    return graph_engine.match(a, b, tol, cap).distance


def graph_frechet_match(a: GraphMap, b: GraphMap, tol: Optional[Tolerances] = None,
                        cap: Optional[int] = None) -> GraphMatch:
    return graph_engine.match(a, b, tol, cap)
