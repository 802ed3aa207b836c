#!/usr/bin/env python3
"""
Verification harness
Seeded property suites for the distance and morph engines, the pinned
counterexample gallery, witness replay and determinism checks
"""

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from classify import CurveClass, classify
from frechet import (continuous_frechet, coupled_distance, discrete_frechet, frechet_enclosure,
                     graph_frechet, path_frechet)
from frechet_config import default_tolerances
from frechet_errors import FormatError
from frechet_io import dumps, object_from_json, object_to_json, read_json, write_json
from geometry import (Polyline, Reparameterization, Tolerances, diameter, hausdorff_estimate,
                      reparameterize, reverse, zero_extend)
from graph_model import (GraphMap, cycle_graph_map, path_graph_map, reparameterize_graph_map,
                         rotate_circle_map, straight_graph_map)
from morph import (concat_morphs, embedding_ball_morph, immersion_morph, linear_morph, morph_engine,
                   Maneuver, verify_morph)

logger = logging.getLogger(__name__)

FIXTURES_PATH = Path(__file__).with_name('gallery_fixtures.json')

# Trial counts used when SuiteConfig.trials is not set
DEFAULT_TRIALS = {
    'axioms': 100,
    'nonseparability': 50,
    'balls': 25,
    'gallery': 1,
    'sandwich': 200,
    'interpolation': 50,
    'immersion': 25,
    'graph': 50,
}

REPLAY_COMMAND = "python frechet_cli.py verify --witness {path}"


@dataclass
class SuiteConfig:
    """Inputs shared by every suite; one seed drives all random choices"""
    seed: int = 0
    trials: Optional[int] = None
    dim: int = 2
    tol: Tolerances = field(default_factory=default_tolerances)
    min_vertices: int = 5
    max_vertices: int = 30
    scale: float = 1.0
    frames: int = 64
    report_timing: bool = False

    def __post_init__(self):
        if self.trials is not None and self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not 2 <= self.min_vertices <= self.max_vertices:
            raise ValueError(f"vertex range [{self.min_vertices}, {self.max_vertices}] is invalid")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.frames < 2:
            raise ValueError("frames must be >= 2")

    def trial_count(self, suite: str) -> int:
        return self.trials if self.trials is not None else DEFAULT_TRIALS[suite]

    def rng(self, trial: int) -> np.random.Generator:
        """Independent stream per trial, so trial i does not depend on trials before it"""
        return np.random.default_rng([self.seed, trial])

    def vertex_count(self, rng: np.random.Generator, cap: Optional[int] = None) -> int:
        hi = self.max_vertices if cap is None else max(self.min_vertices, min(cap, self.max_vertices))
        return int(rng.integers(self.min_vertices, hi + 1))

    def tol_dict(self) -> dict:
        return {'eps_dist': self.tol.eps_dist, 'eps_param': self.tol.eps_param,
                'theta_tol': self.tol.theta_tol}

    def to_dict(self) -> dict:
        return {'seed': self.seed, 'trials': self.trials, 'dim': self.dim, 'tol': self.tol_dict(),
                'min_vertices': self.min_vertices, 'max_vertices': self.max_vertices,
                'scale': self.scale, 'frames': self.frames}


@dataclass
class PropertyResult:
    name: str
    passed: bool = True
    checked: int = 0
    failed: int = 0
    worst: Optional[float] = None
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        data = {'name': self.name, 'pass': self.passed, 'checked': self.checked, 'failed': self.failed}
        if self.worst is not None:
            data['worst'] = self.worst
        if self.witness is not None:
            data['witness'] = self.witness
        return data


@dataclass
class SuiteReport:
    """Per-property outcome of one suite run; failures carry a replayable witness"""
    suite: str
    seed: int
    properties: List[PropertyResult] = field(default_factory=list)
    timing_ms: Optional[float] = None
    config: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties)

    def property(self, name: str) -> PropertyResult:
        for p in self.properties:
            if p.name == name:
                return p
        raise KeyError(name)

    def failures(self) -> List[PropertyResult]:
        return [p for p in self.properties if not p.passed]

    def to_dict(self) -> dict:
        data = {
            'suite': self.suite,
            'seed': self.seed,
            'pass': self.passed,
            'properties': [p.to_dict() for p in self.properties],
            'timing_ms': self.timing_ms,
        }
        if self.config:
            data['config'] = self.config
        if self.notes:
            data['notes'] = list(self.notes)
        return data

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def write(self, path: Union[str, Path]) -> List[Path]:
        """Write the report and one standalone witness file per failed property"""
        path = Path(path)
        written = []
        for prop in self.failures():
            if prop.witness is None:
                continue
            witness_path = path.with_name(f"{path.stem}.witness-{prop.name}.json")
            witness = dict(prop.witness)
            witness['replay'] = REPLAY_COMMAND.format(path=witness_path)
            write_json(witness, witness_path)
            prop.witness = witness
            written.append(witness_path)
        write_json(self.to_dict(), path)
        return [path] + written


Check = Callable[[Dict[str, Any], Tolerances], Dict[str, Tuple[bool, float]]]


class _Tally:
    """Runs checks trial by trial and folds their outcomes into PropertyResults"""

    def __init__(self, suite: str, cfg: SuiteConfig):
        self.suite = suite
        self.cfg = cfg
        self.results: Dict[str, PropertyResult] = {}
        self.started = time.perf_counter()

    def _result(self, name: str) -> PropertyResult:
        if name not in self.results:
            self.results[name] = PropertyResult(name)
        return self.results[name]

    def run(self, trial: int, check_name: str, inputs: Dict[str, Any]) -> Dict[str, Tuple[bool, float]]:
        check = CHECKS[check_name]
        try:
            outcome = check(inputs, self.cfg.tol)
        except Exception as e:
            logger.error(f"❌ {self.suite} trial {trial}: {check_name} raised {type(e).__name__}: {e}")
            outcome = {f"{check_name}_error": (False, math.nan)}
            inputs = dict(inputs, error=f"{type(e).__name__}: {e}")
        for name, (ok, value) in outcome.items():
            result = self._result(name)
            result.checked += 1
            if value is not None and not math.isnan(value):
                result.worst = value if result.worst is None else max(result.worst, value)
            if not ok:
                result.failed += 1
                if result.passed:
                    result.passed = False
                    result.witness = self._witness(trial, check_name, name, inputs)
                    logger.warning(f"⚠️ {self.suite}: property {name} failed on trial {trial}")
        return outcome

    def _witness(self, trial: int, check_name: str, prop: str, inputs: Dict[str, Any]) -> dict:
        return {
            'suite': self.suite,
            'property': prop,
            'check': check_name,
            'seed': self.cfg.seed,
            'trial': trial,
            'tol': self.cfg.tol_dict(),
            'inputs': _encode_inputs(inputs),
        }

    def report(self) -> SuiteReport:
        report = SuiteReport(self.suite, self.cfg.seed, list(self.results.values()),
                             config=self.cfg.to_dict())
        if self.cfg.report_timing:
            report.timing_ms = round((time.perf_counter() - self.started) * 1000.0, 3)
        status = '✅' if report.passed else '❌'
        logger.info(f"{status} Suite {self.suite}: "
                    f"{sum(p.passed for p in report.properties)}/{len(report.properties)} properties pass")
        return report


def _encode_inputs(inputs: Dict[str, Any]) -> Dict[str, Any]:
    encoded = {}
    for key, value in inputs.items():
        if isinstance(value, (Polyline, GraphMap)):
            encoded[key] = object_to_json(value)
        elif isinstance(value, Reparameterization):
            encoded[key] = {'xs': list(value.xs), 'ys': list(value.ys)}
        elif isinstance(value, np.ndarray):
            encoded[key] = value.tolist()
        else:
            encoded[key] = value
    return encoded


def _decode_inputs(inputs: Dict[str, Any]) -> Dict[str, Any]:
    decoded = {}
    for key, value in inputs.items():
        if isinstance(value, dict) and 'vertices' in value:
            decoded[key] = object_from_json(value)
        elif isinstance(value, dict) and 'xs' in value:
            decoded[key] = Reparameterization(tuple(value['xs']), tuple(value['ys']))
        else:
            decoded[key] = value
    return decoded


# ---------------------------------------------------------------------------
# Curve generators

def random_polyline(rng: np.random.Generator, dim: int, n: int, scale: float = 1.0) -> Polyline:
    """n vertices uniform in the cube [-scale, scale]^dim"""
    return Polyline(rng.uniform(-scale, scale, size=(n, dim)))


def gentle_polyline(rng: np.random.Generator, dim: int, n: int, scale: float = 1.0) -> Polyline:
    """Strictly increasing first coordinate, bounded wiggle in the others; always an embedding"""
    x = np.cumsum(rng.uniform(0.2, 1.0, size=n))
    x = scale * (x - x[0]) / (x[-1] - x[0])
    if dim == 1:
        return Polyline(x[:, None])
    rest = rng.uniform(-0.3 * scale, 0.3 * scale, size=(n, dim - 1))
    return Polyline(np.column_stack([x, rest]))


def perturb_gentle(rng: np.random.Generator, c: Polyline, amount: float) -> Polyline:
    """Small perturbation that keeps the first coordinate strictly increasing"""
    verts = c.vertices.copy()
    gap = float(np.diff(verts[:, 0]).min())
    verts[:, 0] += rng.uniform(-0.25, 0.25, size=len(verts)) * gap
    if c.dim > 1:
        verts[:, 1:] += rng.normal(0.0, amount, size=(len(verts), c.dim - 1))
    return Polyline(verts)


def theta_graph_map(offset=(0.0, 0.0)) -> GraphMap:
    """Two branch vertices joined by a straight edge and two bent ones"""
    dx, dy = offset
    u, v = np.array([dx, dy]), np.array([2.0 + dx, dy])
    top, bottom = np.array([1.0 + dx, 1.0 + dy]), np.array([1.0 + dx, -1.0 + dy])
    return straight_graph_map({'u': u, 'v': v}, [
        ('s', 'u', 'v'),
        ('t', 'u', 'v', [u, top, v]),
        ('b', 'u', 'v', [u, bottom, v]),
    ])


def _translate_graph_map(m: GraphMap, w: np.ndarray) -> GraphMap:
    points = {v: m.point(v) + w for v in m.graph.vertex_ids}
    curves = {eid: Polyline(c.vertices + w, c.params) for eid, c in m.edge_curves.items()}
    return GraphMap(m.graph, points, curves)


def interval_graph_map(dim: int) -> GraphMap:
    end = np.zeros(dim)
    end[0] = 1.0
    return path_graph_map(Polyline([np.zeros(dim), end]))


def triangle_graph_map(dim: int) -> GraphMap:
    pts = np.zeros((3, max(dim, 2)))
    pts[1, 0] = 1.0
    pts[2, 1] = 1.0
    if dim == 1:
        pts = np.array([[0.0], [1.0], [2.0]])
    return cycle_graph_map(pts)


# ---------------------------------------------------------------------------
# Checks: each takes decoded inputs and returns {property: (pass, measured value)}

def check_axioms(x: Dict[str, Any], tol: Tolerances) -> Dict[str, Tuple[bool, float]]:
    p, q, r = x['p'], x['q'], x['r']
    d_pp = continuous_frechet(p, p, tol)
    d_pq = continuous_frechet(p, q, tol)
    d_qp = continuous_frechet(q, p, tol)
    d_qr = continuous_frechet(q, r, tol)
    d_pr = continuous_frechet(p, r, tol)
    excess = d_pr - d_pq - d_qr
    return {
        'identity': (d_pp <= tol.eps_dist, d_pp),
        'symmetry': (abs(d_pq - d_qp) <= 2 * tol.eps_dist, abs(d_pq - d_qp)),
        'triangle': (excess <= 3 * tol.eps_dist, excess),
    }


def check_non_homeomorphic(x: Dict[str, Any], tol: Tolerances) -> Dict[str, Tuple[bool, float]]:
    d = graph_frechet(x['a'], x['b'], tol)
    return {'non_homeomorphic_infinite': (math.isinf(d), None)}


def check_reparameterization(x: Dict[str, Any], tol: Tolerances) -> Dict[str, Tuple[bool, float]]:
    p, h = x['p'], x['h']
    q = reparameterize(p, h)
    d = continuous_frechet(p, q, tol)
    gap = coupled_distance(p, q)
    need = 0.1 * diameter(p)
    return {
        'reparameterization_distance_zero': (d <= tol.eps_dist, d),
        'sup_norm_gap': (gap >= need, need - gap),
    }


def check_graph_reparameterization(x: Dict[str, Any], tol: Tolerances) -> Dict[str, Tuple[bool, float]]:
    m = x['m']
    k = len(m.graph.edges)
    rotated = rotate_circle_map(m, k // 2)
    rng = np.random.default_rng(int(x.get('seed', 0)))
    bent = reparameterize_graph_map(m, {e.edge_id: Reparameterization.random(rng, 3)
                                        for e in m.graph.edges})
    d_rot = graph_frechet(m, rotated, tol)
    d_rep = graph_frechet(m, bent, tol)
    return {
        'circle_rotation_distance_zero': (d_rot <= tol.eps_dist, d_rot),
        'graph_reparameterization_distance_zero': (d_rep <= tol.eps_dist, d_rep),
    }


def check_sandwich(x: Dict[str, Any], tol: Tolerances) -> Dict[str, Tuple[bool, float]]:
    p, q = x['p'], x['q']
    haus = hausdorff_estimate(p, q, tol)
    enclosure = frechet_enclosure(p, q, tol)
    disc = discrete_frechet(p, q)
    longest = float(max(p.segment_lengths().max(), q.segment_lengths().max()))
    return {
        'hausdorff_below_continuous': (haus.lower <= enclosure.hi + tol.eps_dist, haus.lower - enclosure.hi),
        'continuous_below_discrete': (enclosure.lo <= disc + tol.eps_dist, enclosure.lo - disc),
        'discrete_gap_bounded': (disc - enclosure.lo <= longest + tol.eps_dist, disc - enclosure.lo - longest),
        'enclosure_width': (enclosure.width <= tol.eps_dist * (1.0 + 1e-9), enclosure.width),
    }


def check_interpolation(x: Dict[str, Any], tol: Tolerances) -> Dict[str, Tuple[bool, float]]:
    p, q, k = x['p'], x['q'], int(x['frames'])
    d0 = frechet_enclosure(p, q, tol).value
    interp = morph_engine.interpolant(p, q, tol)
    times = np.linspace(0.0, 1.0, k)
    frames = [interp.blend(float(t)) for t in times]
    slack = 2 * tol.eps_dist

    worst_contraction = -math.inf
    for t, frame in zip(times, frames):
        bound = (1.0 - t) * (d0 + slack)
        value = coupled_distance(frame, interp.q_common)
        if value > bound:
            value = frechet_enclosure(frame, interp.q_common, tol).lo
        worst_contraction = max(worst_contraction, value - bound)

    worst_modulus = -math.inf
    for i in range(k):
        for j in range(i + 1, k):
            bound = (times[j] - times[i]) * d0 + slack
            value = coupled_distance(frames[i], frames[j])
            if value > bound:
                value = frechet_enclosure(frames[i], frames[j], tol).lo
            worst_modulus = max(worst_modulus, value - bound)
    return {
        'contraction': (worst_contraction <= 0.0, worst_contraction),
        'modulus': (worst_modulus <= 0.0, worst_modulus),
    }


def check_immersion(x: Dict[str, Any], tol: Tolerances) -> Dict[str, Tuple[bool, float]]:
    p, q, k = x['p'], x['q'], int(x['frames'])
    seq = immersion_morph(p, q, k, tol)
    report = verify_morph(seq, tol=tol)
    outcome = {'frames_immersed': (seq.ok and report.passed, float(len(report.class_failures)))}
    dodges = [e for e in seq.events if e.maneuver_applied is Maneuver.ROTATE_PI]
    if dodges:
        excess = max(e.cost - e.slack for e in dodges)
        outcome['dodge_within_slack'] = (excess <= tol.eps_dist, excess)
    if x.get('expect_events'):
        handled = sum(1 for e in seq.events if e.maneuver_applied is not Maneuver.NONE)
        outcome['adversarial_events_logged'] = (handled >= 1, float(handled))
    return outcome


def check_r1_obstruction(x: Dict[str, Any], tol: Tolerances) -> Dict[str, Tuple[bool, float]]:
    seq = immersion_morph(x['p'], x['q'], int(x['frames']), tol)
    return {'r1_reversed_obstruction': (not seq.ok, None)}


def _ball_sequence(x: Dict[str, Any], tol: Tolerances):
    p0, p1, p2 = x['p0'], x['p1'], x['p2']
    k, delta = int(x['frames']), float(x['delta'])
    label = CurveClass.parse(x['class'])
    if label is CurveClass.C:
        return concat_morphs(linear_morph(p1, p0, k, tol), linear_morph(p0, p2, k, tol))
    if label is CurveClass.I:
        return concat_morphs(immersion_morph(p1, p0, k, tol), immersion_morph(p0, p2, k, tol))
    lift = bool(x.get('allow_lift', True))
    return concat_morphs(
        embedding_ball_morph(p1, p0, k, tol, lift, None, p0, delta),
        embedding_ball_morph(p0, p2, k, tol, lift, None, p0, delta))


def check_ball(x: Dict[str, Any], tol: Tolerances) -> Dict[str, Tuple[bool, float]]:
    """
    Morph p1 -> p0 -> p2 and check every frame stays in the class and
    strictly inside the ball of radius delta around p0. expect is
    'inside', 'obstruction' or 'either'.
    """
    seq = _ball_sequence(x, tol)
    expect = x.get('expect', 'inside')
    outcome: Dict[str, Tuple[bool, float]] = {}
    if expect == 'obstruction':
        outcome['obstructed'] = (not seq.ok, None)
    else:
        report = verify_morph(seq, x['p0'], float(x['delta']), tol) if seq.ok else None
        inside = report is not None and report.passed
        value = report.max_center_bound / float(x['delta']) if report is not None else math.nan
        name = 'inside_ball' if expect == 'inside' else 'inside_ball_or_obstruction'
        outcome[name] = (inside or (expect == 'either' and not seq.ok), value)
    lifts = int(x.get('min_lifts', 0))
    if lifts:
        count = sum(1 for e in seq.events if e.maneuver_applied is Maneuver.LIFT_4D)
        outcome['lift_events_logged'] = (count >= lifts, float(count))
    return outcome


def check_interval_graph(x: Dict[str, Any], tol: Tolerances) -> Dict[str, Tuple[bool, float]]:
    p, q = x['p'], x['q']
    d_graph = graph_frechet(path_graph_map(p), path_graph_map(q), tol)
    d_path = path_frechet(p, q, oriented=False, tol=tol)
    gap = abs(d_graph - d_path)
    return {'interval_equals_unoriented_path': (gap <= 2 * tol.eps_dist, gap)}


def check_theta_translate(x: Dict[str, Any], tol: Tolerances) -> Dict[str, Tuple[bool, float]]:
    m = x['m']
    w = np.asarray(x['w'], dtype=float)
    d = graph_frechet(m, _translate_graph_map(m, w), tol)
    gap = abs(d - float(np.linalg.norm(w)))
    return {'theta_translate_distance': (gap <= tol.eps_dist, gap)}


def load_gallery(path: Union[str, Path, None] = None) -> Dict[str, Dict[str, Any]]:
    """Gallery scenarios with their curves decoded"""
    raw = read_json(path or FIXTURES_PATH)
    return {name: _decode_inputs(scenario) for name, scenario in raw.items()}


def _lift_excess(seq, p: Polyline, q: Polyline, tol: Tolerances) -> float:
    """Largest increase of the distance to q that the lift adds over the straight-line frames"""
    interp = morph_engine.interpolant(p, q, tol)
    dim = seq.dim
    ref = zero_extend(interp.q_common, dim)
    worst = 0.0
    for frame in seq.frames:
        if not 0.0 < frame.t < 1.0:
            continue
        base = zero_extend(interp.blend(frame.t), dim)
        worst = max(worst, coupled_distance(frame.curve, ref) - coupled_distance(base, ref))
    return worst


def check_gallery(x: Dict[str, Any], tol: Tolerances) -> Dict[str, Tuple[bool, float]]:
    scenario = x['scenario']
    fixture = load_gallery()[scenario]
    a0, a1 = fixture['alpha0'], fixture['alpha1']
    k = int(x['frames'])
    d = continuous_frechet(a0, a1, tol)
    gap = abs(d - fixture['distance'])
    prefix = scenario.lower()
    outcome = {f"{prefix}_distance": (gap <= fixture['distance_tol'], gap)}

    if scenario == 'G1':
        seq = immersion_morph(a0, a1, k, tol)
        outcome['g1_obstruction'] = (not seq.ok, None)
    elif scenario == 'G2':
        seq = embedding_ball_morph(a0, a1, k, tol)
        outcome['g2_obstruction'] = (not seq.ok, None)
    elif scenario == 'G3':
        seq = embedding_ball_morph(a0, a1, k, tol, allow_lift=False)
        blocked = not seq.ok and seq.obstruction.constraint == 'self_cross'
        outcome['g3_r3_self_cross_obstruction'] = (blocked, None)

        bump = fixture['bump']
        lifted = embedding_ball_morph(a0, a1, k, tol, allow_lift=True, bump=bump)
        radius = fixture['radius'] + 2 * tol.eps_dist
        report = verify_morph(lifted, a1, radius, tol)
        has_lift = any(e.maneuver_applied is Maneuver.LIFT_4D for e in lifted.events)
        outcome['g3_r4_lift'] = (lifted.ok and has_lift and report.passed, report.max_center_bound)
        excess = _lift_excess(lifted, a0, a1, tol)
        outcome['g3_lift_excess'] = (excess <= bump + tol.eps_dist, excess)
    return outcome


CHECKS: Dict[str, Check] = {
    'axioms': check_axioms,
    'non_homeomorphic': check_non_homeomorphic,
    'reparameterization': check_reparameterization,
    'graph_reparameterization': check_graph_reparameterization,
    'sandwich': check_sandwich,
    'interpolation': check_interpolation,
    'immersion': check_immersion,
    'r1_obstruction': check_r1_obstruction,
    'ball': check_ball,
    'interval_graph': check_interval_graph,
    'theta_translate': check_theta_translate,
    'gallery': check_gallery,
}


# ---------------------------------------------------------------------------
# Suites

def verify_metric_axioms(cfg: SuiteConfig) -> SuiteReport:
    """Identity, symmetry and triangle inequality on random triples; +inf across homeomorphism types"""
    tally = _Tally('axioms', cfg)
    trials = cfg.trial_count('axioms')
    for trial in range(trials):
        rng = cfg.rng(trial)
        p, q, r = (random_polyline(rng, cfg.dim, cfg.vertex_count(rng), cfg.scale) for _ in range(3))
        tally.run(trial, 'axioms', {'p': p, 'q': q, 'r': r})
    tally.run(trials, 'non_homeomorphic', {'a': interval_graph_map(cfg.dim), 'b': triangle_graph_map(cfg.dim)})
    return tally.report()


def _reparameterization_pair(rng: np.random.Generator, cfg: SuiteConfig) -> Tuple[Polyline, Reparameterization]:
    p = random_polyline(rng, cfg.dim, cfg.vertex_count(rng), cfg.scale)
    need = 0.1 * diameter(p)
    h = Reparameterization.random(rng, breakpoints=5)
    for _ in range(50):
        if coupled_distance(p, reparameterize(p, h)) >= need:
            break
        h = Reparameterization.random(rng, breakpoints=5)
    return p, h


def nonseparability_witness(cfg: SuiteConfig) -> SuiteReport:
    """Distinct parameterizations of one curve at distance 0 while far apart in sup-norm"""
    tally = _Tally('nonseparability', cfg)
    trials = cfg.trial_count('nonseparability')
    for trial in range(trials):
        p, h = _reparameterization_pair(cfg.rng(trial), cfg)
        tally.run(trial, 'reparameterization', {'p': p, 'h': h})
    if cfg.dim >= 2:
        angles = np.linspace(0.0, 2 * math.pi, 6, endpoint=False)
        ring = np.zeros((6, cfg.dim))
        ring[:, 0], ring[:, 1] = np.cos(angles), np.sin(angles)
        tally.run(trials, 'graph_reparameterization', {'m': cycle_graph_map(ring), 'seed': cfg.seed})
    return tally.report()


def _ball_members(rng: np.random.Generator, cfg: SuiteConfig, label: CurveClass,
                  reversed_member: bool) -> Tuple[Polyline, Polyline, Polyline]:
    n = cfg.vertex_count(rng, cap=12)
    p0 = gentle_polyline(rng, cfg.dim, n, cfg.scale)
    amount = 0.05 * cfg.scale
    p1 = perturb_gentle(rng, p0, amount)
    p2 = perturb_gentle(rng, p0, amount)
    if reversed_member:
        p1 = reverse(p1)
    return p0, p1, p2


def ball_connectivity_experiment(cfg: SuiteConfig, class_label='C') -> SuiteReport:
    """
    Sample (p0, p1, p2), set delta to 1.2 times the larger member distance
    and morph p1 -> p0 -> p2 with the class's morph. In R^1, immersion
    members with reversed orientation must be reported as obstructed;
    embeddings below R^4 may be obstructed but never silently wrong.
    """
    label = CurveClass.parse(class_label)
    suite = f"balls-{label.value}-dim{cfg.dim}"
    tally = _Tally(suite, cfg)
    trials = cfg.trial_count('balls')
    for trial in range(trials):
        rng = cfg.rng(trial)
        reversed_member = label is CurveClass.I and cfg.dim == 1 and trial % 2 == 1
        p0, p1, p2 = _ball_members(rng, cfg, label, reversed_member)
        delta = 1.2 * max(continuous_frechet(p1, p0, cfg.tol), continuous_frechet(p2, p0, cfg.tol))
        expect = 'inside'
        if reversed_member:
            expect = 'obstruction'
        elif label is CurveClass.E and cfg.dim < 4:
            expect = 'either'
        tally.run(trial, 'ball', {'p0': p0, 'p1': p1, 'p2': p2, 'class': label.value,
                                  'delta': delta, 'frames': cfg.frames, 'expect': expect})

    if label is CurveClass.E and cfg.dim >= 3:
        g3 = load_gallery()['G3']
        a0, a1 = g3['alpha0'], g3['alpha1']
        if cfg.dim > 3:
            a0, a1 = zero_extend(a0, cfg.dim), zero_extend(a1, cfg.dim)
        delta = 1.2 * g3['distance']
        inputs = {'p0': a1, 'p1': a0, 'p2': a0, 'class': 'E', 'delta': delta, 'frames': cfg.frames}
        if cfg.dim == 3:
            inputs.update(expect='obstruction', allow_lift=False)
        else:
            inputs.update(expect='inside', min_lifts=1)
        tally.run(trials, 'ball', inputs)
    return tally.report()


def counterexample_gallery(cfg: SuiteConfig) -> SuiteReport:
    """Distances of the pinned scenarios against their oracles, and the obstructions they force"""
    tally = _Tally('gallery', cfg)
    for trial, scenario in enumerate(('G1', 'G2', 'G3')):
        tally.run(trial, 'gallery', {'scenario': scenario, 'frames': cfg.frames})
    return tally.report()


def oracle_sandwich(cfg: SuiteConfig) -> SuiteReport:
    """Hausdorff <= continuous <= discrete, with the discrete gap bounded by the longest segment"""
    tally = _Tally('sandwich', cfg)
    for trial in range(cfg.trial_count('sandwich')):
        rng = cfg.rng(trial)
        p = random_polyline(rng, cfg.dim, cfg.vertex_count(rng), cfg.scale)
        q = random_polyline(rng, cfg.dim, cfg.vertex_count(rng), cfg.scale)
        tally.run(trial, 'sandwich', {'p': p, 'q': q})
    return tally.report()


def interpolation_laws(cfg: SuiteConfig) -> SuiteReport:
    """Contraction toward q' and the Lipschitz modulus of the straight-line morph"""
    tally = _Tally('interpolation', cfg)
    for trial in range(cfg.trial_count('interpolation')):
        rng = cfg.rng(trial)
        p = random_polyline(rng, cfg.dim, cfg.vertex_count(rng, cap=15), cfg.scale)
        q = random_polyline(rng, cfg.dim, cfg.vertex_count(rng, cap=15), cfg.scale)
        tally.run(trial, 'interpolation', {'p': p, 'q': q, 'frames': cfg.frames})
    return tally.report()


def _collinear_reversed(rng: np.random.Generator, n: int) -> Tuple[Polyline, Polyline]:
    origin = rng.uniform(-1.0, 1.0, size=2)
    angle = rng.uniform(0.0, 2 * math.pi)
    direction = np.array([math.cos(angle), math.sin(angle)])
    length = rng.uniform(0.5, 2.0)
    s = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, size=n - 2)), [1.0]]) * length
    p = Polyline(origin + s[:, None] * direction)
    q = Polyline(origin + (length - s)[:, None] * direction)
    return p, q


def _forced_backtrack(rng: np.random.Generator) -> Tuple[Polyline, Polyline]:
    origin = rng.uniform(-1.0, 1.0, size=2)
    angle = rng.uniform(0.0, 2 * math.pi)
    a = np.array([math.cos(angle), math.sin(angle)])
    n = np.array([-a[1], a[0]])
    l1, l2 = rng.uniform(0.5, 1.5, size=2)
    phi = rng.uniform(0.4, 1.2)
    joint = origin + l1 * a
    p = Polyline([origin, joint, joint + l2 * (-math.cos(phi) * a + math.sin(phi) * n)])
    q = Polyline([origin, joint, joint + l2 * (-math.cos(phi) * a - math.sin(phi) * n)])
    return p, q


def _immersed_pair(rng: np.random.Generator, cfg: SuiteConfig, tol: Tolerances) -> Tuple[Polyline, Polyline]:
    for _ in range(100):
        n = cfg.vertex_count(rng, cap=8)
        p = random_polyline(rng, 2, n, cfg.scale)
        q = Polyline(p.vertices + rng.normal(0.0, 0.15 * cfg.scale, size=p.vertices.shape))
        if classify(p, tol).meets('I') and classify(q, tol).meets('I'):
            return p, q
    raise RuntimeError("could not sample an immersed pair")


def immersion_suite(cfg: SuiteConfig) -> SuiteReport:
    """
    Immersion morphs in R^2: the first fifth of the trials are collinear
    reversed pairs, the next fifth forced backtracks, the rest random.
    Also checks the R^1 reversed pair is obstructed.
    """
    tally = _Tally('immersion', cfg)
    trials = cfg.trial_count('immersion')
    adversarial = max(1, trials // 5) if trials >= 3 else 0
    for trial in range(trials):
        rng = cfg.rng(trial)
        if trial < adversarial:
            p, q = _collinear_reversed(rng, cfg.vertex_count(rng, cap=8))
            expect = True
        elif trial < 2 * adversarial:
            p, q = _forced_backtrack(rng)
            expect = True
        else:
            p, q = _immersed_pair(rng, cfg, cfg.tol)
            expect = False
        tally.run(trial, 'immersion', {'p': p, 'q': q, 'frames': cfg.frames, 'expect_events': expect})
    tally.run(trials, 'r1_obstruction', {'p': Polyline([[0.0], [1.0]]), 'q': Polyline([[1.0], [0.0]]),
                                         'frames': cfg.frames})
    return tally.report()


def graph_engine_suite(cfg: SuiteConfig) -> SuiteReport:
    """Interval graphs reduce to unoriented path distance; theta translates cost their norm"""
    tally = _Tally('graph', cfg)
    trials = cfg.trial_count('graph')
    for trial in range(trials):
        rng = cfg.rng(trial)
        p = random_polyline(rng, cfg.dim, cfg.vertex_count(rng, cap=12), cfg.scale)
        q = random_polyline(rng, cfg.dim, cfg.vertex_count(rng, cap=12), cfg.scale)
        tally.run(trial, 'interval_graph', {'p': p, 'q': q})
        radius = rng.uniform(0.0, 0.5)
        angle = rng.uniform(0.0, 2 * math.pi)
        w = radius * np.array([math.cos(angle), math.sin(angle)])
        tally.run(trial, 'theta_translate', {'m': theta_graph_map(), 'w': w})
    tally.run(trials, 'non_homeomorphic', {'a': interval_graph_map(cfg.dim), 'b': triangle_graph_map(cfg.dim)})
    return tally.report()


SUITES: Dict[str, Callable[..., SuiteReport]] = {
    'axioms': verify_metric_axioms,
    'nonseparability': nonseparability_witness,
    'balls': ball_connectivity_experiment,
    'gallery': counterexample_gallery,
    'sandwich': oracle_sandwich,
    'interpolation': interpolation_laws,
    'immersion': immersion_suite,
    'graph': graph_engine_suite,
}

# (suite, dim, class) runs that make up the acceptance pass
ACCEPTANCE_RUNS = [
    ('axioms', 2, None), ('axioms', 3, None),
    ('nonseparability', 2, None),
    ('sandwich', 2, None),
    ('interpolation', 2, None),
    ('immersion', 2, None),
    ('balls', 2, 'C'), ('balls', 2, 'I'), ('balls', 4, 'E'), ('balls', 3, 'E'),
    ('gallery', 3, None),
    ('graph', 2, None),
]


def run_suite(name: str, cfg: SuiteConfig, class_label: Optional[str] = None) -> SuiteReport:
    if name == 'all':
        return acceptance_suite(cfg)
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(sorted(SUITES))} or all")
    logger.info(f"🔄 Running suite {name} (seed {cfg.seed}, dim {cfg.dim})")
    if name == 'balls':
        return ball_connectivity_experiment(cfg, class_label or 'C')
    return SUITES[name](cfg)


def acceptance_suite(cfg: SuiteConfig) -> SuiteReport:
    """Every suite at its acceptance dimension, merged with prefixed property names"""
    started = time.perf_counter()
    merged = SuiteReport('all', cfg.seed, config=cfg.to_dict())
    for name, dim, label in ACCEPTANCE_RUNS:
        sub_cfg = SuiteConfig(seed=cfg.seed, trials=cfg.trials, dim=dim, tol=cfg.tol,
                              min_vertices=cfg.min_vertices, max_vertices=cfg.max_vertices,
                              scale=cfg.scale, frames=cfg.frames)
        report = run_suite(name, sub_cfg, label)
        for prop in report.properties:
            prop.name = f"{report.suite}.dim{dim}.{prop.name}" if name != 'balls' else f"{report.suite}.{prop.name}"
            merged.properties.append(prop)
    if cfg.report_timing:
        merged.timing_ms = round((time.perf_counter() - started) * 1000.0, 3)
    return merged


def replay_witness(path: Union[str, Path]) -> SuiteReport:
    """Re-run the single trial a witness file describes"""
    witness = read_json(path)
    for key in ('check', 'inputs', 'tol'):
        if key not in witness:
            raise FormatError(key, "missing from witness")
    tol = Tolerances(**witness['tol'])
    inputs = _decode_inputs(witness['inputs'])
    inputs.pop('error', None)
    cfg = SuiteConfig(seed=int(witness.get('seed', 0)), tol=tol)
    tally = _Tally(f"replay:{witness.get('suite', witness['check'])}", cfg)
    tally.run(int(witness.get('trial', 0)), witness['check'], inputs)
    return tally.report()


def determinism_check(cfg: SuiteConfig, suite: str, class_label: Optional[str] = None) -> SuiteReport:
    """Run a suite twice with the same seed and compare the report bytes"""
    quiet = SuiteConfig(seed=cfg.seed, trials=cfg.trials, dim=cfg.dim, tol=cfg.tol,
                        min_vertices=cfg.min_vertices, max_vertices=cfg.max_vertices,
                        scale=cfg.scale, frames=cfg.frames)
    first = run_suite(suite, quiet, class_label).to_json()
    second = run_suite(suite, quiet, class_label).to_json()
    same = first == second
    result = PropertyResult('byte_identical', passed=same, checked=1, failed=0 if same else 1)
    if not same:
        result.witness = {'suite': suite, 'seed': cfg.seed, 'config': quiet.to_dict()}
    return SuiteReport(f"determinism:{suite}", cfg.seed, [result], config=quiet.to_dict())
