"""Sequence loading and one-pass-evaluation metrics.

Boxes are handled as float arrays of shape (N, 4) holding x, y, w, h.  An
all-zero box marks a frame where the target is absent.
"""

import glob
import os
import re
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .bbox import BoundingBox
from .errors import EvaluationMismatch, FormatError, InputError

GT_FILE = 'groundtruth_rect.txt'
IMG_DIR = 'img'
IMG_EXTS = ('.jpg', '.jpeg', '.png', '.bmp')
ATTRIBUTES = ('IV', 'SV', 'OCC', 'DEF', 'MB', 'FM', 'IPR', 'OPR', 'OV', 'BC', 'LR')

PRECISION_THRESHOLDS = np.arange(0, 51, dtype=np.float64)
SUCCESS_THRESHOLDS = np.linspace(0.0, 1.0, 21)
PASCAL_OVERLAP = 0.5


class SequenceIOError(OSError):
    pass


@dataclass
class Sequence:
    name: str
    frames: list  # image paths, sorted
    ground_truth: np.ndarray  # (N, 4)
    attributes: tuple = ()

    def __len__(self):
        return len(self.frames)

    def frame(self, i):
        return read_image(self.frames[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self.frame(i)


@dataclass
class Trajectory:
    boxes: np.ndarray  # (N, 4)
    sequence_name: str = ''

    def __len__(self):
        return len(self.boxes)


def read_image(path):
    """uint8 array: (H, W) for grayscale files, (H, W, 3) otherwise."""
    try:
        with Image.open(path) as im:
            if im.mode in ('L', 'I;16', 'I', 'F', '1'):
                return np.asarray(im.convert('L'))
            return np.asarray(im.convert('RGB'))
    except (OSError, ValueError) as exc:
        raise SequenceIOError(f"cannot read image {path}: {exc}") from None


_SPLIT = re.compile(r'[,\s]+')


def parse_boxes(lines, source='<boxes>'):
    boxes = []
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        parts = [p for p in _SPLIT.split(line) if p]
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise FormatError(f"{source}:{n}: cannot parse {line!r}") from None
        if len(vals) != 4:
            raise FormatError(f"{source}:{n}: expected 4 numbers, got {len(vals)}")
        boxes.append(vals)
    return np.array(boxes, dtype=np.float64).reshape(-1, 4)


def load_sequence(path, attributes=()):
    path = os.fspath(path)
    gt_path = os.path.join(path, GT_FILE)
    img_dir = os.path.join(path, IMG_DIR)
    if not os.path.isfile(gt_path):
        raise SequenceIOError(f"ground-truth file not found: {gt_path}")
    if not os.path.isdir(img_dir):
        raise SequenceIOError(f"image folder not found: {img_dir}")
    frames = sorted(p for p in glob.glob(os.path.join(img_dir, '*'))
                    if p.lower().endswith(IMG_EXTS))
    if not frames:
        raise FormatError(f"no images in {img_dir}")
    with open(gt_path) as fh:
        gt = parse_boxes(fh, gt_path)
    if len(gt) != len(frames):
        line = min(len(gt), len(frames)) + 1
        raise FormatError(f"{gt_path}:{line}: {len(gt)} ground-truth boxes for "
                          f"{len(frames)} frames")
    if gt[0, 2] <= 0 or gt[0, 3] <= 0:
        raise FormatError(f"{gt_path}:1: first box must be valid for initialisation")
    return Sequence(os.path.basename(os.path.normpath(path)), frames, gt, tuple(attributes))


def load_boxes(path):
    with open(path) as fh:
        return parse_boxes(fh, path)


def _is_single(box):
    if isinstance(box, BoundingBox):
        return True
    if isinstance(box, np.ndarray):
        return box.ndim == 1
    return len(box) == 4 and all(np.isscalar(v) for v in box)


def _as_boxes(boxes):
    if isinstance(boxes, Trajectory):
        boxes = boxes.boxes
    if _is_single(boxes):
        return np.asarray(tuple(boxes), dtype=np.float64).reshape(1, 4)
    if isinstance(boxes, np.ndarray):
        return boxes.astype(np.float64).reshape(-1, 4)
    return np.array([tuple(b) for b in boxes], dtype=np.float64).reshape(-1, 4)


def _pair(traj, gt):
    a = _as_boxes(traj.boxes if isinstance(traj, Trajectory) else traj)
    b = _as_boxes(gt.ground_truth if isinstance(gt, Sequence) else gt)
    if len(a) != len(b):
        raise EvaluationMismatch(f"trajectory has {len(a)} boxes, ground truth {len(b)}")
    return a, b


def centers(boxes):
    boxes = _as_boxes(boxes)
    return boxes[:, :2] + boxes[:, 2:] / 2


def cle(a, b):
    """Euclidean distance between box centres; vectorised over (N, 4) inputs."""
    single = _is_single(a) and _is_single(b)
    d = centers(a) - centers(b)
    out = np.hypot(d[:, 0], d[:, 1])
    return float(out[0]) if single else out


def iou(a, b):
    """Intersection over union of (x, y, w, h) boxes; 0 for disjoint or empty boxes."""
    single = _is_single(a) and _is_single(b)
    a, b = _as_boxes(a), _as_boxes(b)
    x1 = np.maximum(a[:, 0], b[:, 0])
    y1 = np.maximum(a[:, 1], b[:, 1])
    x2 = np.minimum(a[:, 0] + a[:, 2], b[:, 0] + b[:, 2])
    y2 = np.minimum(a[:, 1] + a[:, 3], b[:, 1] + b[:, 3])
    inter = np.clip(x2 - x1, 0, None) * np.clip(y2 - y1, 0, None)
    union = a[:, 2] * a[:, 3] + b[:, 2] * b[:, 3] - inter
    out = np.divide(inter, union, out=np.zeros_like(inter), where=union > 0)
    out = np.clip(out, 0.0, 1.0)
    # rounding in the union can leave identical boxes a hair below 1
    out[np.all(a == b, axis=1) & (a[:, 2] > 0) & (a[:, 3] > 0)] = 1.0
    return float(out[0]) if single else out


def precision_curve(traj, gt, thresholds=PRECISION_THRESHOLDS):
    """Fraction of frames whose centre error is <= each threshold (pixels)."""
    a, b = _pair(traj, gt)
    err = cle(a, b)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    return (err[None, :] <= thresholds[:, None]).mean(axis=1)


def precision_at(traj, gt, threshold=20.0):
    return float(precision_curve(traj, gt, [threshold])[0])


def success_curve(traj, gt, thresholds=SUCCESS_THRESHOLDS):
    """Fraction of frames whose overlap is strictly greater than each threshold."""
    a, b = _pair(traj, gt)
    ov = iou(a, b)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    return (ov[None, :] > thresholds[:, None]).mean(axis=1)


def auc(curve):
    return float(np.mean(curve))


def _present(boxes):
    return np.any(boxes != 0, axis=1)


def f_score(traj, gt, overlap=PASCAL_OVERLAP):
    """Per-video F-score under the single-target PASCAL protocol.

    Tracker present and overlap >= 0.5 is a true positive.  A lower overlap
    counts as both a false positive and a false negative.  Reporting a box
    for an absent target is a false positive; no box for a present target is
    a false negative.
    """
    a, b = _pair(traj, gt)
    t_on, g_on = _present(a), _present(b)
    hit = t_on & g_on & (iou(a, b) >= overlap)
    tp = int(hit.sum())
    fp = int((t_on & ~hit).sum())
    fn = int((g_on & ~hit).sum())
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def survival_curve(f_scores, threshold=0.8):
    """Scores sorted best-first and the fraction of videos with F above ``threshold``."""
    scores = np.asarray(list(f_scores), dtype=np.float64)
    if scores.size == 0:
        raise InputError("survival curve needs at least one F-score")
    return np.sort(scores)[::-1], float(np.mean(scores > threshold))


@dataclass
class Summary:
    precision_at_20: float
    auc: float
    f_score: float
    mean_cle: float
    frames: int
    precision_curve: np.ndarray = field(repr=False)
    success_curve: np.ndarray = field(repr=False)

    def to_dict(self):
        return {
            'precision@20': self.precision_at_20,
            'auc': self.auc,
            'f_score': self.f_score,
            'mean_cle': self.mean_cle,
            'frames': self.frames,
        }


def summarize(traj, gt):
    a, b = _pair(traj, gt)
    pc = precision_curve(a, b)
    sc = success_curve(a, b)
    return Summary(
        precision_at_20=precision_at(a, b, 20.0),
        auc=auc(sc),
        f_score=f_score(a, b),
        mean_cle=float(np.mean(cle(a, b))),
        frames=len(a),
        precision_curve=pc,
        success_curve=sc,
    )


RESULTS_HEADER = 'frame,x,y,w,h'


def write_results(path, boxes):
    """Per-frame results CSV: header then ``frame,x,y,w,h`` rows, frame numbers from 1."""
    boxes = _as_boxes(boxes)
    with open(path, 'w') as fh:
        fh.write(RESULTS_HEADER + '\n')
        for i, (x, y, w, h) in enumerate(boxes, 1):
            fh.write(f'{i},{x:.4f},{y:.4f},{w:.4f},{h:.4f}\n')


def read_results(path):
    """Boxes from a results CSV, or from a plain 4-column box file."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if lines and lines[0].strip().lower().replace(' ', '') == RESULTS_HEADER:
        rows = []
        for n, line in enumerate(lines[1:], 2):
            if not line.strip():
                continue
            parts = line.split(',')
            if len(parts) != 5:
                raise FormatError(f"{path}:{n}: expected 5 fields, got {len(parts)}")
            rows.append(','.join(parts[1:]))
        return parse_boxes(rows, path)
    return parse_boxes(lines, path)


def write_curve(path, thresholds, values, header):
    with open(path, 'w') as fh:
        fh.write(header + '\n')
        for t, v in zip(thresholds, values):
            fh.write(f'{t:g},{v:.6f}\n')
