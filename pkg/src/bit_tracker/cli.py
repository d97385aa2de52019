"""Command-line front end: ``bit-track {track,eval,synth,bench}``."""

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import evaluation, synthetic
from .colornames import ColorNameTable, default_table
from .errors import BITError, EvaluationMismatch, InputError, NumericalError
from .evaluation import SequenceIOError
from .tracker import MODES, BITTracker, TrackerConfig

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MISMATCH = 3
EXIT_NUMERICAL = 4


@dataclasses.dataclass
class RunConfig:
    sequence_path: str = None
    output_path: str = None
    mode: str = 'hybrid'
    rho: float = 0.02
    lam: float = 1e-4
    padding: float = 2.0
    sigma_candidates: tuple = (0.1, 0.08)
    seed: int = 0
    threads: int = 1
    taper: bool = True
    color_table: str = None

    def tracker_config(self):
        return TrackerConfig(rho=self.rho, sigma_s_candidates=tuple(self.sigma_candidates),
                             lam=self.lam, padding=self.padding, mode=self.mode,
                             taper=self.taper, workers=self.threads)


# config-file key -> (RunConfig field, parser)
def _floats(s):
    return tuple(float(v) for v in s.replace(' ', '').split(',') if v)


def _bool(s):
    v = s.strip().lower()
    if v in ('1', 'true', 'yes', 'on'):
        return True
    if v in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"not a boolean: {s!r}")


_KEYS = {
    'sequence': ('sequence_path', str),
    'sequence_path': ('sequence_path', str),
    'output': ('output_path', str),
    'output_path': ('output_path', str),
    'mode': ('mode', str),
    'rho': ('rho', float),
    'lambda': ('lam', float),
    'padding': ('padding', float),
    'sigma_candidates': ('sigma_candidates', _floats),
    'seed': ('seed', int),
    'threads': ('threads', int),
    'taper': ('taper', _bool),
    'color_table': ('color_table', str),
}


def read_config_file(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    with fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise InputError(f"{path}:{n}: expected key=value")
            key, val = (s.strip() for s in line.split('=', 1))
            if key not in _KEYS:
                raise InputError(f"{path}:{n}: unknown key {key!r}")
            name, conv = _KEYS[key]
            try:
                values[name] = conv(val)
            except ValueError as exc:
                raise InputError(f"{path}:{n}: {exc}") from None
    return values


def build_run_config(args):
    """Defaults, then config file, then explicit flags."""
    cfg = RunConfig()
    if getattr(args, 'config', None):
        cfg = dataclasses.replace(cfg, **read_config_file(args.config))
    flags = {
        'sequence_path': getattr(args, 'sequence', None),
        'output_path': getattr(args, 'output', None),
        'mode': args.mode, 'rho': args.rho, 'lam': args.lam, 'padding': args.padding,
        'seed': getattr(args, 'seed', None), 'threads': args.threads,
        'color_table': args.color_table,
    }
    return dataclasses.replace(cfg, **{k: v for k, v in flags.items() if v is not None})


def _load_table(path):
    return ColorNameTable.load(path) if path else default_table()


def run_sequence(frames, init_box, run_cfg, table=None):
    """Track over ``frames``; returns (boxes, seconds spent tracking after init)."""
    tracker = BITTracker(run_cfg.tracker_config(), table)
    frames = iter(frames)
    first = next(frames)
    tracker.init(first, tuple(init_box))
    boxes = [tuple(float(v) for v in init_box)]
    elapsed = 0.0
    for frame in frames:
        t0 = time.perf_counter()
        box = tracker.update(frame)
        elapsed += time.perf_counter() - t0
        boxes.append(box.as_tuple())
    return np.array(boxes), elapsed


def cmd_track(run_cfg, out=sys.stdout):
    if not run_cfg.sequence_path:
        raise InputError("no sequence given")
    seq = evaluation.load_sequence(run_cfg.sequence_path)
    table = _load_table(run_cfg.color_table)
    boxes, elapsed = run_sequence(iter(seq), seq.ground_truth[0], run_cfg, table)
    output = run_cfg.output_path or f'{seq.name}_bit.csv'
    evaluation.write_results(output, boxes)
    tracked = len(boxes) - 1
    fps = tracked / elapsed if elapsed > 0 else float('inf')
    print(f"{seq.name}: {len(boxes)} frames, {fps:.1f} fps ({run_cfg.mode}) -> {output}", file=out)
    return EXIT_OK


def cmd_eval(results_path, sequence_path, output_dir=None, out=sys.stdout):
    seq = evaluation.load_sequence(sequence_path)
    try:
        boxes = evaluation.read_results(results_path)
    except OSError as exc:
        raise SequenceIOError(f"cannot read results {results_path}: {exc.strerror}") from None
    summary = evaluation.summarize(boxes, seq.ground_truth)
    output_dir = output_dir or os.path.splitext(results_path)[0] + '_eval'
    os.makedirs(output_dir, exist_ok=True)
    with open(os.path.join(output_dir, 'summary.json'), 'w') as fh:
        json.dump(dict(sequence=seq.name, **summary.to_dict()), fh, indent=2)
        fh.write('\n')
    evaluation.write_curve(os.path.join(output_dir, 'precision.csv'),
                           evaluation.PRECISION_THRESHOLDS, summary.precision_curve,
                           'threshold,precision')
    evaluation.write_curve(os.path.join(output_dir, 'success.csv'),
                           evaluation.SUCCESS_THRESHOLDS, summary.success_curve,
                           'threshold,success')
    print(f"{seq.name}: precision@20={summary.precision_at_20:.3f} auc={summary.auc:.3f} "
          f"F={summary.f_score:.3f} meanCLE={summary.mean_cle:.2f} -> {output_dir}", file=out)
    return EXIT_OK


def synth_spec_from_args(args):
    return synthetic.SynthSpec(
        frames=args.frames,
        frame_size=args.frame_size,
        target_size=args.target_size,
        velocity=args.velocity,
        snr_db=args.snr_db,
        color=not args.gray,
    )


def cmd_synth(seed, out_path, spec, out=sys.stdout):
    frames, gt = synthetic.generate(seed, spec)
    synthetic.write_sequence(out_path, frames, gt)
    print(f"wrote {len(frames)} frames to {out_path}", file=out)
    return EXIT_OK


def bench_spec(frames=60):
    return synthetic.SynthSpec(frames=frames, frame_size=(480, 360), target_size=(100, 100),
                               velocity=(2.0, 1.0))


def bench_fps(run_cfg, frames=60):
    seq_frames, gt = synthetic.generate(run_cfg.seed, bench_spec(frames))
    # warm-up compiles the feature kernels outside the timed run
    run_sequence(seq_frames[:3], gt[0], run_cfg)
    boxes, elapsed = run_sequence(seq_frames, gt[0], run_cfg)
    return (len(boxes) - 1) / elapsed, boxes, gt


def cmd_bench(run_cfg, frames=60, out=sys.stdout):
    fps, boxes, gt = bench_fps(run_cfg, frames)
    prec = evaluation.precision_at(boxes, gt)
    print(f"bench: {frames - 1} tracked frames, 100x100 target, {fps:.1f} fps "
          f"(precision@20={prec:.3f}, mode={run_cfg.mode})", file=out)
    return EXIT_OK


def _pair_arg(cast):
    def parse(s):
        parts = s.lower().replace('x', ',').split(',')
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"expected two values, got {s!r}")
        return tuple(cast(p) for p in parts)
    return parse


def _tracker_flags(p):
    p.add_argument('--mode', choices=MODES)
    p.add_argument('--rho', type=float)
    p.add_argument('--lambda', dest='lam', type=float)
    p.add_argument('--padding', type=float)
    p.add_argument('--threads', type=int)
    p.add_argument('--config', help='key=value config file')
    p.add_argument('--color-table', help='CNTABLE v1 colour-name table file')


def build_parser():
    parser = argparse.ArgumentParser(prog='bit-track', description=__doc__)
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('track', help='run the tracker on a sequence')
    p.add_argument('sequence', nargs='?', help='sequence directory (img/ + groundtruth_rect.txt)')
    p.add_argument('-o', '--output', help='results CSV path')
    _tracker_flags(p)

    p = sub.add_parser('eval', help='score a results file against ground truth')
    p.add_argument('results')
    p.add_argument('sequence')
    p.add_argument('-o', '--output', help='directory for summary.json and curve files')

    p = sub.add_parser('synth', help='generate a synthetic sequence')
    p.add_argument('output')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--frames', type=int, default=50)
    p.add_argument('--frame-size', type=_pair_arg(int), default=(256, 256), metavar='WxH')
    p.add_argument('--target-size', type=_pair_arg(int), default=(64, 64), metavar='WxH')
    p.add_argument('--velocity', type=_pair_arg(float), default=(2.0, 0.0), metavar='VX,VY')
    p.add_argument('--snr-db', type=float, default=10.0)
    p.add_argument('--gray', action='store_true')

    p = sub.add_parser('bench', help='report fps on a synthetic 100x100-target sequence')
    p.add_argument('--frames', type=int, default=60)
    p.add_argument('--seed', type=int)
    _tracker_flags(p)
    return parser


def main(argv=None, out=sys.stdout, err=sys.stderr):
    args = build_parser().parse_args(argv)
    try:
        if args.command == 'track':
            return cmd_track(build_run_config(args), out)
        if args.command == 'eval':
            return cmd_eval(args.results, args.sequence, args.output, out)
        if args.command == 'synth':
            return cmd_synth(args.seed, args.output, synth_spec_from_args(args), out)
        if args.command == 'bench':
            if args.frames < 31:
                raise InputError("bench needs at least 31 frames (30 tracked)")
            return cmd_bench(build_run_config(args), args.frames, out)
    except EvaluationMismatch as exc:
        print(f"error: {exc}", file=err)
        return EXIT_MISMATCH
    except NumericalError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NUMERICAL
    except (BITError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
