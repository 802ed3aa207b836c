#!/usr/bin/env python3
"""
Core geometry for polygonal curves in R^n
Points, parameterized polylines and the elementary curve operations
(length, reversal, restriction, concatenation, Hausdorff, self-contacts)
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from frechet_errors import DimensionMismatch, GeometryError

logger = logging.getLogger(__name__)

# Interior vertices closer than this to a restriction endpoint are dropped
_PARAM_MERGE = 1e-12


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances threaded through every query"""
    eps_dist: float = 1e-6
    eps_param: float = 1e-9
    theta_tol: float = 1e-9

    def __post_init__(self):
        for name in ('eps_dist', 'eps_param', 'theta_tol'):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise GeometryError(f"tolerance {name} must be finite and >= 0, got {value}")


def resolve_tolerances(tol: Optional[Tolerances]) -> Tolerances:
    """Fall back to the configured tolerances when none are given"""
    if tol is not None:
        return tol
    from frechet_config import default_tolerances
    return default_tolerances()


@dataclass(frozen=True)
class Point:
    """A point of R^n"""
    coords: Tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(x) for x in self.coords)
        if not coords:
            raise GeometryError("a point needs at least one coordinate")
        if not all(math.isfinite(x) for x in coords):
            raise GeometryError(f"point coordinates must be finite: {coords}")
        object.__setattr__(self, 'coords', coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)


def default_params(vertices: np.ndarray) -> np.ndarray:
    """Chord-length parameters, uniform when chord-length would repeat a value"""
    m = len(vertices)
    if m == 1:
        return np.array([0.0])
    chords = np.linalg.norm(np.diff(vertices, axis=0), axis=1)
    total = chords.sum()
    if total > 0 and np.all(chords > 0):
        params = np.concatenate([[0.0], np.cumsum(chords) / total])
        params[-1] = 1.0
        return params
    return np.linspace(0.0, 1.0, m)


class Polyline:
    """
    A parameterized polygonal path [0, 1] -> R^n.

    Vertices are stored as an (m, n) float array; params are strictly
    increasing from 0 to 1, one per vertex. A single vertex is the constant
    path at that point. Instances are immutable.
    """

    __slots__ = ('_vertices', '_params')

    def __init__(self, vertices, params=None):
        arr = np.array(vertices, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise GeometryError("vertices must be a non-empty list of coordinate lists")
        if not np.all(np.isfinite(arr)):
            raise GeometryError("vertex coordinates must be finite")

        if params is None:
            par = default_params(arr)
        else:
            par = np.array(params, dtype=float).reshape(-1)
            if len(par) != len(arr):
                raise GeometryError(f"expected {len(arr)} params, got {len(par)}")
            if not np.all(np.isfinite(par)):
                raise GeometryError("params must be finite")
            if len(par) == 1:
                par = np.array([0.0])
            else:
                if abs(par[0]) > _PARAM_MERGE or abs(par[-1] - 1.0) > _PARAM_MERGE:
                    raise GeometryError("params must start at 0 and end at 1")
                par[0], par[-1] = 0.0, 1.0
                if np.any(np.diff(par) <= 0):
                    raise GeometryError("params must be strictly increasing")

        arr.setflags(write=False)
        par.setflags(write=False)
        self._vertices = arr
        self._params = par

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    @property
    def params(self) -> np.ndarray:
        return self._params

    @property
    def dim(self) -> int:
        return self._vertices.shape[1]

    @property
    def size(self) -> int:
        return self._vertices.shape[0]

    @property
    def start(self) -> np.ndarray:
        return self._vertices[0]

    @property
    def end(self) -> np.ndarray:
        return self._vertices[-1]

    def vertex(self, i: int) -> Point:
        return Point(tuple(self._vertices[i]))

    def points(self) -> List[Point]:
        return [Point(tuple(v)) for v in self._vertices]

    def segment_lengths(self) -> np.ndarray:
        if self.size == 1:
            return np.zeros(0)
        return np.linalg.norm(np.diff(self._vertices, axis=0), axis=1)

    def evaluate(self, t):
        """Point(s) c(t); accepts a scalar or an array of parameters"""
        scalar = np.ndim(t) == 0
        ts = np.clip(np.atleast_1d(np.asarray(t, dtype=float)), 0.0, 1.0)
        if self.size == 1:
            pts = np.repeat(self._vertices, len(ts), axis=0)
        else:
            idx = np.clip(np.searchsorted(self._params, ts, side='right') - 1, 0, self.size - 2)
            lo, hi = self._params[idx], self._params[idx + 1]
            w = ((ts - lo) / (hi - lo))[:, None]
            pts = self._vertices[idx] + w * (self._vertices[idx + 1] - self._vertices[idx])
        return pts[0] if scalar else pts

    def allclose(self, other: 'Polyline', atol: float = 1e-9) -> bool:
        """Same vertices and params within atol"""
        return (self.size == other.size and self.dim == other.dim
                and np.allclose(self._vertices, other._vertices, atol=atol, rtol=0)
                and np.allclose(self._params, other._params, atol=atol, rtol=0))

    def __repr__(self):
        return f"Polyline(dim={self.dim}, size={self.size})"


def check_same_dim(p: Polyline, q: Polyline, what: str = "curves"):
    if p.dim != q.dim:
        raise DimensionMismatch(p.dim, q.dim, what)


def polyline_length(c: Polyline) -> float:
    """Sum of Euclidean segment lengths"""
    return float(c.segment_lengths().sum())


def reverse(c: Polyline) -> Polyline:
    """The path t -> c(1 - t)"""
    if c.size == 1:
        return c
    return Polyline(c.vertices[::-1], 1.0 - c.params[::-1])


def restrict(c: Polyline, a: float, b: float) -> Polyline:
    """Sub-path on [a, b], renormalized to [0, 1]"""
    if not (0.0 <= a < b <= 1.0):
        raise GeometryError(f"restriction needs 0 <= a < b <= 1, got a={a}, b={b}")
    if c.size == 1:
        return c
    inside = (c.params > a + _PARAM_MERGE) & (c.params < b - _PARAM_MERGE)
    verts = np.vstack([c.evaluate(a), c.vertices[inside], c.evaluate(b)])
    params = np.concatenate([[a], c.params[inside], [b]])
    return Polyline(verts, (params - a) / (b - a))


def _full(c: Polyline) -> Tuple[np.ndarray, np.ndarray]:
    # a constant path is a pause over [0, 1]
    if c.size == 1:
        return np.vstack([c.vertices, c.vertices]), np.array([0.0, 1.0])
    return c.vertices, c.params


def concat(c1: Polyline, c2: Polyline, tol: Optional[Tolerances] = None) -> Polyline:
    """Double-speed concatenation c1 # c2, joint at parameter 0.5"""
    tol = resolve_tolerances(tol)
    check_same_dim(c1, c2)
    gap = float(np.linalg.norm(c1.end - c2.start))
    if gap > tol.eps_dist:
        raise GeometryError(f"cannot concatenate: end/start gap {gap:.3g} exceeds {tol.eps_dist}")
    v1, p1 = _full(c1)
    v2, p2 = _full(c2)
    verts = np.vstack([v1, v2[1:]])
    params = np.concatenate([0.5 * p1, 0.5 + 0.5 * p2[1:]])
    return Polyline(verts, params)


def concat_many(curves: Sequence[Polyline], tol: Optional[Tolerances] = None) -> Polyline:
    """Concatenate k paths, the i-th traversed on [i/k, (i+1)/k]"""
    tol = resolve_tolerances(tol)
    if not curves:
        raise GeometryError("nothing to concatenate")
    if len(curves) == 1:
        return curves[0]
    k = len(curves)
    verts, params = [], []
    for i, c in enumerate(curves):
        if i:
            check_same_dim(curves[i - 1], c)
            gap = float(np.linalg.norm(curves[i - 1].end - c.start))
            if gap > tol.eps_dist:
                raise GeometryError(f"cannot concatenate piece {i}: gap {gap:.3g} exceeds {tol.eps_dist}")
        v, p = _full(c)
        skip = 1 if i else 0
        verts.append(v[skip:])
        params.append((i + p[skip:]) / k)
    out = np.concatenate(params)
    out[-1] = 1.0
    return Polyline(np.vstack(verts), out)


def translate(c: Polyline, offset) -> Polyline:
    return Polyline(c.vertices + np.asarray(offset, dtype=float), c.params)


def apply_affine(c: Polyline, matrix, offset=None) -> Polyline:
    """x -> matrix @ x + offset applied to every vertex; params are kept"""
    mat = np.asarray(matrix, dtype=float)
    verts = c.vertices @ mat.T
    if offset is not None:
        verts = verts + np.asarray(offset, dtype=float)
    return Polyline(verts, c.params)


def zero_extend(c: Polyline, dim: int) -> Polyline:
    """Embed R^n into R^dim by appending zero coordinates"""
    if dim < c.dim:
        raise GeometryError(f"cannot zero-extend a dim-{c.dim} curve to dim {dim}")
    if dim == c.dim:
        return c
    pad = np.zeros((c.size, dim - c.dim))
    return Polyline(np.hstack([c.vertices, pad]), c.params)


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random orthogonal matrix with determinant +1"""
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def diameter(c: Polyline) -> float:
    """Diameter of the image (attained at vertices)"""
    if c.size == 1:
        return 0.0
    return float(pdist(c.vertices).max())


@dataclass(frozen=True)
class Reparameterization:
    """
    Monotone piecewise-linear homeomorphism h of [0, 1], given by breakpoints.

    xs and ys both run strictly increasing from 0 to 1.
    """
    xs: Tuple[float, ...]
    ys: Tuple[float, ...]

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if len(xs) != len(ys) or len(xs) < 2:
            raise GeometryError("reparameterization needs matching breakpoint lists of length >= 2")
        if xs[0] != 0 or ys[0] != 0 or xs[-1] != 1 or ys[-1] != 1:
            raise GeometryError("reparameterization must fix 0 and 1")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise GeometryError("reparameterization must be strictly increasing")
        object.__setattr__(self, 'xs', tuple(float(x) for x in xs))
        object.__setattr__(self, 'ys', tuple(float(y) for y in ys))

    @classmethod
    def identity(cls) -> 'Reparameterization':
        return cls((0.0, 1.0), (0.0, 1.0))

    @classmethod
    def random(cls, rng: np.random.Generator, breakpoints: int = 5,
               min_step: float = 0.02) -> 'Reparameterization':
        """Random h with the given number of interior breakpoints"""
        def ladder():
            while True:
                inner = np.sort(rng.uniform(0.0, 1.0, size=breakpoints))
                pts = np.concatenate([[0.0], inner, [1.0]])
                if np.all(np.diff(pts) > min_step):
                    return pts
        return cls(tuple(ladder()), tuple(ladder()))

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)

    def inverse(self, y):
        return np.interp(y, self.ys, self.xs)


def reparameterize(c: Polyline, h: Reparameterization) -> Polyline:
    """The composition c o h, with an exact piecewise-linear vertex set"""
    if c.size == 1:
        return c
    xs = np.concatenate([np.asarray(h.xs), h.inverse(c.params)])
    xs = np.unique(np.clip(xs, 0.0, 1.0))
    keep = np.concatenate([[True], np.diff(xs) > _PARAM_MERGE])
    xs = xs[keep]
    xs[-1] = 1.0
    return Polyline(c.evaluate(h(xs)), xs)


def resample_arclength(c: Polyline, n: int) -> np.ndarray:
    """n points spaced uniformly by arc length along the image"""
    if n < 2:
        raise GeometryError("resampling needs at least 2 samples")
    lengths = c.segment_lengths()
    total = lengths.sum()
    if c.size == 1 or total == 0:
        return np.repeat(c.vertices[:1], n, axis=0)
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    s = np.linspace(0.0, total, n)
    idx = np.clip(np.searchsorted(cum, s, side='right') - 1, 0, c.size - 2)
    seg = lengths[idx]
    w = np.divide(s - cum[idx], seg, out=np.zeros_like(s), where=seg > 0)
    return c.vertices[idx] + w[:, None] * (c.vertices[idx + 1] - c.vertices[idx])


def point_to_polyline_distance(points, c: Polyline, chunk: int = 256) -> np.ndarray:
    """Exact Euclidean distance from each point to the image of c"""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != c.dim:
        raise DimensionMismatch(pts.shape[1], c.dim, "points and curve")
    if c.size == 1:
        return np.linalg.norm(pts - c.vertices[0], axis=1)

    a = c.vertices[:-1]
    d = c.vertices[1:] - a
    dd = np.einsum('ij,ij->i', d, d)
    out = np.empty(len(pts))
    for lo in range(0, len(pts), chunk):
        block = pts[lo:lo + chunk]
        rel = block[:, None, :] - a[None, :, :]
        t = np.divide(np.einsum('kij,ij->ki', rel, d), dd,
                      out=np.zeros((len(block), len(a))), where=dd > 0)
        t = np.clip(t, 0.0, 1.0)
        diff = rel - t[:, :, None] * d[None, :, :]
        out[lo:lo + chunk] = np.sqrt(np.einsum('kij,kij->ki', diff, diff).min(axis=1))
    return out


@dataclass(frozen=True)
class HausdorffEstimate:
    """Sampled Hausdorff distance: the value is a lower bound, value + error an upper bound"""
    value: float
    error: float

    @property
    def lower(self) -> float:
        return self.value

    @property
    def upper(self) -> float:
        return self.value + self.error


def _dense_samples(c: Polyline, samples: int) -> Tuple[np.ndarray, float]:
    total = polyline_length(c)
    if c.size == 1 or total == 0:
        return c.vertices[:1], 0.0
    pts = np.vstack([c.vertices, resample_arclength(c, samples)])
    # consecutive samples along the curve are at most this far apart
    spacing = min(total / (samples - 1), float(c.segment_lengths().max()))
    return pts, spacing


def hausdorff_estimate(c1: Polyline, c2: Polyline, tol: Optional[Tolerances] = None,
                       samples: Optional[int] = None) -> HausdorffEstimate:
    """
    Symmetric Hausdorff distance between the images of c1 and c2.

    Each curve is densely resampled (vertices included) and every sample's
    exact distance to the other curve is taken. The maximum is a certified
    lower bound; the true value exceeds it by at most half the sample spacing.
    """
    check_same_dim(c1, c2)
    if samples is None:
        from frechet_config import config
        samples = config.hausdorff_samples
    samples = max(int(samples), 2)
    s1, h1 = _dense_samples(c1, samples)
    s2, h2 = _dense_samples(c2, samples)
    d12 = float(point_to_polyline_distance(s1, c2).max())
    d21 = float(point_to_polyline_distance(s2, c1).max())
    return HausdorffEstimate(value=max(d12, d21), error=max(h1, h2) / 2.0)


def hausdorff_distance(c1: Polyline, c2: Polyline, tol: Optional[Tolerances] = None) -> float:
    """Sampled symmetric Hausdorff distance (lower-bound certificate, see hausdorff_estimate)"""
    return hausdorff_estimate(c1, c2, tol).value


def angle_between(u, v) -> np.ndarray:
    """Angle between vectors (rows), Kahan's formula; stable near 0 and pi"""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    nu = np.linalg.norm(u, axis=1, keepdims=True)
    nv = np.linalg.norm(v, axis=1, keepdims=True)
    a = u * nv
    b = v * nu
    return 2.0 * np.arctan2(np.linalg.norm(a - b, axis=1), np.linalg.norm(a + b, axis=1))


@dataclass(frozen=True)
class SelfContact:
    """A self-contact locus: a pair of curve parameters whose images coincide"""
    params: Tuple[float, float]
    point: Tuple[float, ...]
    kind: str  # 'crossing', 'touch' or 'overlap'
    edges: Optional[Tuple[str, str]] = None

    def to_dict(self) -> dict:
        data = {'params': list(self.params), 'point': list(self.point), 'kind': self.kind}
        if self.edges is not None:
            data['edges'] = list(self.edges)
        return data


def segment_closest_points(a1, b1, a2, b2):
    """
    Closest points between segment batches [a1, b1] and [a2, b2].

    All segments must have positive length. Returns the local parameters
    (s, t) in [0, 1] and the distances.
    """
    d1 = b1 - a1
    d2 = b2 - a2
    r = a1 - a2
    a = np.einsum('ij,ij->i', d1, d1)
    e = np.einsum('ij,ij->i', d2, d2)
    f = np.einsum('ij,ij->i', d2, r)
    c = np.einsum('ij,ij->i', d1, r)
    b = np.einsum('ij,ij->i', d1, d2)
    denom = a * e - b * b

    s = np.zeros_like(a)
    ok = denom > 1e-18 * a * e
    s[ok] = np.clip((b[ok] * f[ok] - c[ok] * e[ok]) / denom[ok], 0.0, 1.0)
    t = (b * s + f) / e

    low = t < 0
    t[low] = 0.0
    s[low] = np.clip(-c[low] / a[low], 0.0, 1.0)
    high = t > 1
    t[high] = 1.0
    s[high] = np.clip((b[high] - c[high]) / a[high], 0.0, 1.0)

    p1 = a1 + s[:, None] * d1
    p2 = a2 + t[:, None] * d2
    return s, t, np.linalg.norm(p1 - p2, axis=1)


def self_intersections(c: Polyline, tol: Optional[Tolerances] = None) -> List[SelfContact]:
    """
    Self-contacts of c: every pair of distinct parameters mapped within
    eps_dist of each other, other than through a pause.

    Non-adjacent segments report crossings, touches and collinear overlaps.
    Adjacent segments (consecutive after skipping degenerate ones) only
    report an overlap when they fold back onto each other.
    """
    tol = resolve_tolerances(tol)
    if c.size < 3:
        return []

    lengths = c.segment_lengths()
    live = np.flatnonzero(lengths > tol.eps_dist)
    if len(live) < 2:
        return []

    verts = c.vertices
    starts = verts[live]
    ends = verts[live + 1]
    dirs = ends - starts
    params = c.params
    contacts: List[SelfContact] = []

    def global_param(seg: int, s: float) -> float:
        return float(params[seg] + s * (params[seg + 1] - params[seg]))

    # folded joints between consecutive live segments
    for k in range(len(live) - 1):
        i, j = live[k], live[k + 1]
        if angle_between(dirs[k], -dirs[k + 1])[0] <= tol.theta_tol:
            overlap = min(lengths[i], lengths[j])
            s = 1.0 - 0.5 * overlap / lengths[i]
            t = 0.5 * overlap / lengths[j]
            point = starts[k] + s * dirs[k]
            contacts.append(SelfContact((global_param(i, s), global_param(j, t)),
                                        tuple(float(x) for x in point), 'overlap'))

    ii, jj = np.triu_indices(len(live), k=2)
    if len(ii):
        s, t, dist = segment_closest_points(starts[ii], ends[ii], starts[jj], ends[jj])
        for n in np.flatnonzero(dist <= tol.eps_dist):
            ka, kb = ii[n], jj[n]
            i, j = live[ka], live[kb]
            da, db = dirs[ka], dirs[kb]
            angle = angle_between(da, db)[0]
            parallel = angle <= tol.theta_tol or angle >= math.pi - tol.theta_tol
            sa, tb = float(s[n]), float(t[n])
            kind = None
            if parallel:
                aa = float(da @ da)
                proj = [float((starts[kb] - starts[ka]) @ da / aa), float((ends[kb] - starts[ka]) @ da / aa)]
                lo, hi = max(0.0, min(proj)), min(1.0, max(proj))
                if (hi - lo) * math.sqrt(aa) > tol.eps_dist:
                    sa = 0.5 * (lo + hi)
                    mid = starts[ka] + sa * da
                    tb = float(np.clip((mid - starts[kb]) @ db / float(db @ db), 0.0, 1.0))
                    kind = 'overlap'
            if kind is None:
                interior = tol.eps_param < sa < 1 - tol.eps_param and tol.eps_param < tb < 1 - tol.eps_param
                kind = 'crossing' if interior else 'touch'
            point = 0.5 * ((starts[ka] + sa * da) + (starts[kb] + tb * db))
            contacts.append(SelfContact((global_param(i, sa), global_param(j, tb)),
                                        tuple(float(x) for x in point), kind))

    return _dedupe_contacts(contacts, tol)


def _dedupe_contacts(contacts: Sequence[SelfContact], tol: Tolerances) -> List[SelfContact]:
    # a contact at a shared vertex shows up once per incident segment
    rank = {'overlap': 0, 'crossing': 1, 'touch': 2}
    ordered = sorted(contacts, key=lambda x: (rank[x.kind], x.params))
    kept: List[SelfContact] = []
    merge = max(tol.eps_param, 1e-9)
    for contact in ordered:
        if any(abs(contact.params[0] - k.params[0]) <= merge and abs(contact.params[1] - k.params[1]) <= merge
               for k in kept):
            continue
        kept.append(contact)
    return sorted(kept, key=lambda x: x.params)
