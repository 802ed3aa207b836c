#!/usr/bin/env python3
"""
SVG strip rendering for planar morphs
One thumbnail per frame in a single row; frames that carry events get a
marker at the event's location and the event kind as a caption
"""

import io
import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import matplotlib
from matplotlib.figure import Figure
import numpy as np

from frechet_errors import GeometryError
from graph_model import GraphMap
from morph import MorphEvent, MorphSequence

logger = logging.getLogger(__name__)

THUMB_SIZE = 1.2  # inches
MARGIN = 0.08

EVENT_COLORS = {
    'pause': 'tab:orange',
    'endpoint_pause': 'tab:orange',
    'singleton_collapse': 'tab:purple',
    'backtrack': 'tab:red',
    'self_cross': 'tab:blue',
    'vertex_violation': 'tab:brown',
}


def _strands(curve) -> List[Tuple[Optional[str], np.ndarray]]:
    if isinstance(curve, GraphMap):
        return [(e.edge_id, curve.curve(e.edge_id).vertices) for e in curve.graph.edges]
    return [(None, curve.vertices)]


def _event_point(curve, event: MorphEvent) -> Optional[np.ndarray]:
    """Where the event sits on this frame, or None if it has no position"""
    location = event.location
    if isinstance(curve, GraphMap):
        if isinstance(location, str) and location in curve.vertex_points:
            return curve.point(location)
        if event.edge is not None and isinstance(location, (int, float)):
            return curve.curve(event.edge).evaluate(float(location))
        return None
    if isinstance(location, (int, float)):
        return curve.evaluate(float(location))
    return None


def _bounds(seq: MorphSequence) -> Tuple[np.ndarray, np.ndarray]:
    pts = np.vstack([verts for frame in seq.frames for _, verts in _strands(frame.curve)])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max((hi - lo).max(), 1e-9))
    pad = MARGIN * span
    center = 0.5 * (lo + hi)
    half = 0.5 * span + pad
    return center - half, center + half


def render_strip(seq: MorphSequence) -> str:
    """SVG text of the strip; identical inputs give identical bytes"""
    if seq.dim != 2:
        raise GeometryError(f"SVG strips need dim-2 frames, got dim {seq.dim}")

    n = len(seq.frames)
    lo, hi = _bounds(seq)
    fig = Figure(figsize=(THUMB_SIZE * n, THUMB_SIZE + 0.4))
    axes = fig.subplots(1, n, squeeze=False)[0]

    for i, (ax, frame) in enumerate(zip(axes, seq.frames)):
        for _, verts in _strands(frame.curve):
            ax.plot(verts[:, 0], verts[:, 1], color='black', linewidth=0.8)
        events = seq.frame_events(i)
        for event in events:
            point = _event_point(frame.curve, event)
            if point is None:
                continue
            ax.plot([point[0]], [point[1]], marker='o', markersize=4,
                    color=EVENT_COLORS.get(event.kind.value, 'tab:gray'))
        title = f"t={frame.t:.3f}"
        if events:
            title += '\n' + ','.join(sorted({e.kind.value for e in events}))
        ax.set_title(title, fontsize=5)
        ax.set_xlim(lo[0], hi[0])
        ax.set_ylim(lo[1], hi[1])
        ax.set_aspect('equal')
        ax.set_xticks([])
        ax.set_yticks([])

    if seq.obstruction is not None:
        fig.suptitle(f"obstruction: {seq.obstruction.constraint} at t={seq.obstruction.t:.4f}",
                     fontsize=6, color='tab:red')

    buffer = io.StringIO()
    with matplotlib.rc_context({'svg.hashsalt': 'frechet-strip', 'svg.fonttype': 'path'}):
        fig.savefig(buffer, format='svg', metadata={'Date': None})
    return buffer.getvalue()


def emit_svg(seq: MorphSequence, path: Union[str, Path]) -> Path:
    """Write the strip for a dim-2 morph sequence"""
    path = Path(path)
    path.write_text(render_strip(seq), encoding='utf-8')
    logger.info(f"💾 SVG strip with {len(seq.frames)} thumbnails written to {path}")
    return path
