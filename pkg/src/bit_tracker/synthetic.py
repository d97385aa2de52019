"""Seeded synthetic sequences: a textured patch drifting over a noisy background."""

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image


@dataclass(frozen=True)
class SynthSpec:
    frames: int = 50
    frame_size: tuple = (256, 256)  # (width, height)
    target_size: tuple = (64, 64)  # (width, height)
    velocity: tuple = (2.0, 0.0)  # pixels per frame (vx, vy)
    start: tuple = None  # top-left of frame 1; default centres the path
    snr_db: float = 10.0
    block: int = 8  # texture block edge in pixels
    color: bool = True
    background: int = 128


def _start(spec):
    if spec.start is not None:
        return spec.start
    fw, fh = spec.frame_size
    tw, th = spec.target_size
    span = spec.frames - 1
    return ((fw - tw - spec.velocity[0] * span) / 2, (fh - th - spec.velocity[1] * span) / 2)


def make_texture(rng, spec):
    tw, th = spec.target_size
    channels = 3 if spec.color else 1
    by, bx = -(-th // spec.block), -(-tw // spec.block)
    blocks = rng.uniform(48.0, 208.0, size=(by, bx, channels))
    tex = np.repeat(np.repeat(blocks, spec.block, axis=0), spec.block, axis=1)
    return tex[:th, :tw]


def generate(seed, spec=SynthSpec()):
    """Return (frames, ground_truth): uint8 frames and an (N, 4) array of x, y, w, h.

    Target positions are rounded to whole pixels, so ground truth is exact.
    Additive Gaussian noise has ``std = std(texture) / 10**(snr_db / 20)``.
    """
    rng = np.random.default_rng(seed)
    fw, fh = spec.frame_size
    tw, th = spec.target_size
    tex = make_texture(rng, spec)
    noise_std = tex.std() / 10 ** (spec.snr_db / 20)
    x0, y0 = _start(spec)
    channels = tex.shape[2]

    frames, gt = [], []
    for t in range(spec.frames):
        x = int(round(x0 + spec.velocity[0] * t))
        y = int(round(y0 + spec.velocity[1] * t))
        clean = np.full((fh, fw, channels), float(spec.background))
        # paste the visible part of the patch
        xa, ya = max(x, 0), max(y, 0)
        xb, yb = min(x + tw, fw), min(y + th, fh)
        if xa < xb and ya < yb:
            clean[ya:yb, xa:xb] = tex[ya - y:yb - y, xa - x:xb - x]
        noisy = clean + rng.normal(0.0, noise_std, size=clean.shape)
        img = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)
        frames.append(img if spec.color else img[..., 0])
        gt.append((x, y, tw, th))
    return frames, np.array(gt, dtype=np.float64)


def write_sequence(path, frames, ground_truth):
    """Write ``<path>/img/0001.png ...`` and ``<path>/groundtruth_rect.txt``."""
    img_dir = os.path.join(path, 'img')
    os.makedirs(img_dir, exist_ok=True)
    for i, frame in enumerate(frames, 1):
        Image.fromarray(frame).save(os.path.join(img_dir, f'{i:04d}.png'))
    with open(os.path.join(path, 'groundtruth_rect.txt'), 'w') as fh:
        for x, y, w, h in ground_truth:
            fh.write(f'{x:g},{y:g},{w:g},{h:g}\n')
    return path
