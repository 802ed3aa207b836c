#!/usr/bin/env python3
"""
Fréchet toolkit command line
dist | classify | morph | verify | gallery

Exit status: 0 on success, 1 on a failed suite or an obstructed morph
(artifacts are still written), 2 on usage or input errors. Every error
is reported as a single "error: ..." line on stderr.
"""

import argparse
import logging
import math
import sys
from typing import List, Optional, Sequence

from classify import CurveClass, classify
from frechet import discrete_frechet, graph_frechet_match, path_enclosure
from frechet_config import FrechetConfig
from frechet_errors import FormatError, FrechetError
from frechet_io import dumps, load_object, write_frames_jsonl, write_json
from geometry import Polyline, Tolerances, check_same_dim
from graph_model import GraphMap, path_graph_map
from harness import SUITES, SuiteConfig, determinism_check, replay_witness, run_suite
from log_setup import setup_logging
from morph import (embed_morph, embedding_ball_morph, graph_morph, immersion_morph, linear_morph,
                   verify_morph)
from svg_strip import emit_svg

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of printing usage and exiting"""

    def error(self, message):
        raise UsageError(message)


def format_value(x: float) -> str:
    if math.isinf(x):
        return 'inf' if x > 0 else '-inf'
    return repr(float(x))


def format_bracket(lo: float, hi: float) -> str:
    return f"[{format_value(lo)}, {format_value(hi)}]"


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--tol', type=float, help='Distance tolerance eps_dist (default FRECHET_TOL or 1e-6)')

    parser = _Parser(prog='frechet_cli.py', description='Fréchet distances, curve classes and morphs')
    commands = parser.add_subparsers(dest='command', parser_class=_Parser)
    commands.required = True

    dist = commands.add_parser('dist', parents=[common], help='Distance between two curves or graph-maps')
    dist.add_argument('a', help='First curve or graph JSON')
    dist.add_argument('b', help='Second curve or graph JSON')
    dist.add_argument('--kind', choices=['discrete', 'continuous', 'path', 'graph'], default='continuous')
    dist.add_argument('--oriented', action='store_true', help='Oriented path distance (for --kind path)')

    cls = commands.add_parser('classify', parents=[common], help='Classify a curve or graph-map as C, I or E')
    cls.add_argument('input', help='Curve or graph JSON')
    cls.add_argument('--out', help='Write the class report JSON here')

    morph = commands.add_parser('morph', parents=[common], help='Morph between two curves or graph-maps')
    morph.add_argument('a', help='Source curve or graph JSON')
    morph.add_argument('b', help='Target curve or graph JSON')
    morph.add_argument('--class', dest='target_class', default='immersion',
                       help='Target class: continuous, immersion or embedding (C, I, E)')
    morph.add_argument('--frames', type=int,
                       help='Uniform base frame count (default FRECHET_FRAMES or 64); '
                            'frames inside event windows are added on top')
    morph.add_argument('--out', help='Frames JSONL output path')
    morph.add_argument('--svg', help='SVG strip output path (dim-2 frames only)')
    morph.add_argument('--lift', action='store_true', help='Lift self-crossings into R^4 (class embedding)')
    morph.add_argument('--bump', type=float, help='Lift bump height')
    morph.add_argument('--four-phase', action='store_true',
                       help='Use the shrink/turn/slide/grow embedding morph')
    morph.add_argument('--verify', action='store_true', help='Run verify_morph on the result')

    verify = commands.add_parser('verify', parents=[common], help='Run a verification suite')
    verify.add_argument('--suite', default='all', choices=sorted(SUITES) + ['all'])
    verify.add_argument('--class', dest='target_class', default='C', help='Class for the balls suite')
    verify.add_argument('--dim', type=int, default=2)
    verify.add_argument('--seed', type=int, help='Suite seed (default FRECHET_SEED or 0)')
    verify.add_argument('--trials', type=int, help='Override the per-suite trial count')
    verify.add_argument('--frames', type=int, help='Uniform base frames per morph; event windows add more')
    verify.add_argument('--report', help='Report JSON output path')
    verify.add_argument('--witness', help='Replay a witness file instead of running a suite')
    verify.add_argument('--timing', action='store_true', help='Record timing_ms in the report')
    verify.add_argument('--determinism', action='store_true',
                        help='Run the suite twice and compare report bytes')

    gallery = commands.add_parser('gallery', parents=[common], help='Check the counterexample gallery')
    gallery.add_argument('--frames', type=int, help='Uniform base frames per morph; event windows add more')
    gallery.add_argument('--report', help='Report JSON output path')
    return parser


def _tolerances(args, settings: FrechetConfig) -> Tolerances:
    eps = settings.tol if args.tol is None else args.tol
    return Tolerances(eps_dist=eps, eps_param=settings.param_tol, theta_tol=settings.theta_tol)


def _as_curve(obj, field: str) -> Polyline:
    if not isinstance(obj, Polyline):
        raise FormatError(field, "expected a curve, got a graph")
    return obj


def _as_graph(obj) -> GraphMap:
    return obj if isinstance(obj, GraphMap) else path_graph_map(obj)


def cmd_dist(args, settings: FrechetConfig) -> int:
    tol = _tolerances(args, settings)
    a, b = load_object(args.a), load_object(args.b)

    if args.kind == 'graph':
        ga, gb = _as_graph(a), _as_graph(b)
        match = graph_frechet_match(ga, gb, tol)
        if math.isinf(match.distance):
            print(format_bracket(math.inf, math.inf))
        else:
            half = 0.5 * tol.eps_dist
            print(format_bracket(max(0.0, match.distance - half), match.distance + half + match.circle_error))
        return EXIT_OK

    p, q = _as_curve(a, 'a'), _as_curve(b, 'b')
    check_same_dim(p, q)
    if args.kind == 'discrete':
        print(format_value(discrete_frechet(p, q)))
        return EXIT_OK
    oriented = args.kind == 'continuous' or args.oriented
    enclosure = path_enclosure(p, q, oriented=oriented, tol=tol)
    print(format_bracket(enclosure.lo, enclosure.hi))
    return EXIT_OK


def cmd_classify(args, settings: FrechetConfig) -> int:
    tol = _tolerances(args, settings)
    report = classify(load_object(args.input), tol)
    if args.out:
        write_json(report.to_dict(), args.out)
    print(report.class_label.value)
    return EXIT_OK


def cmd_morph(args, settings: FrechetConfig) -> int:
    tol = _tolerances(args, settings)
    target = CurveClass.parse(args.target_class)
    frames = settings.frames if args.frames is None else args.frames
    a, b = load_object(args.a), load_object(args.b)

    if isinstance(a, GraphMap) or isinstance(b, GraphMap):
        seq = graph_morph(_as_graph(a), _as_graph(b), target, frames, tol, args.bump)
    else:
        check_same_dim(a, b)
        if target is CurveClass.C:
            seq = linear_morph(a, b, frames, tol)
        elif target is CurveClass.I:
            seq = immersion_morph(a, b, frames, tol)
        elif args.four_phase:
            seq = embed_morph(a, b, frames, tol)
        else:
            seq = embedding_ball_morph(a, b, frames, tol, allow_lift=args.lift, bump=args.bump)

    if args.out:
        write_frames_jsonl(seq, args.out)
    if args.svg:
        emit_svg(seq, args.svg)

    summary = seq.summary()
    if args.verify:
        summary['verification'] = verify_morph(seq, tol=tol).to_dict()
    sys.stdout.write(dumps(summary))

    if not seq.ok:
        logger.warning(f"⚠️ Morph obstructed: {seq.obstruction.constraint} at t={seq.obstruction.t:.6g}")
        return EXIT_FAILED
    if args.verify and not summary['verification']['passed']:
        return EXIT_FAILED
    return EXIT_OK


def _print_report(report) -> None:
    for prop in report.properties:
        status = 'pass' if prop.passed else 'FAIL'
        print(f"{status}  {prop.name}  ({prop.checked - prop.failed}/{prop.checked})")
    print(f"{'PASS' if report.passed else 'FAIL'}  {report.suite}  seed={report.seed}")


def _finish_report(report, path: Optional[str]) -> int:
    if path:
        for written in report.write(path):
            logger.info(f"💾 Wrote {written}")
    _print_report(report)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_verify(args, settings: FrechetConfig) -> int:
    if args.witness:
        return _finish_report(replay_witness(args.witness), args.report)

    cfg = SuiteConfig(
        seed=settings.seed if args.seed is None else args.seed,
        trials=args.trials,
        dim=args.dim,
        tol=_tolerances(args, settings),
        frames=settings.frames if args.frames is None else args.frames,
        report_timing=args.timing or settings.report_timing,
    )
    label = CurveClass.parse(args.target_class).value
    if args.determinism:
        report = determinism_check(cfg, args.suite, label)
    else:
        report = run_suite(args.suite, cfg, label)
    return _finish_report(report, args.report)


def cmd_gallery(args, settings: FrechetConfig) -> int:
    cfg = SuiteConfig(seed=settings.seed, tol=_tolerances(args, settings),
                      frames=settings.frames if args.frames is None else args.frames,
                      report_timing=settings.report_timing)
    return _finish_report(run_suite('gallery', cfg), args.report)


COMMANDS = {
    'dist': cmd_dist,
    'classify': cmd_classify,
    'morph': cmd_morph,
    'verify': cmd_verify,
    'gallery': cmd_gallery,
}


def run_command(argv: Sequence[str]) -> int:
    """Parse argv, run one command and return its exit status"""
    settings = FrechetConfig().load_from_environment()
    try:
        args = build_parser().parse_args(list(argv))
        return COMMANDS[args.command](args, settings)
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FrechetError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e.strerror or e}: {e.filename}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> int:
    settings = FrechetConfig().load_from_environment()
    setup_logging(settings.log_level)
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
