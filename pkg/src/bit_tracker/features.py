"""S1/C1 appearance features.

Texture comes from the fast Gabor approximation: two orthogonal 1-D odd
Gabor filters per scale give a gradient field whose orientation is binned
into 8 contrast-sensitive (odd) and 4 contrast-insensitive (even) maps.
Those are STD-pooled on a 4x4 cell grid.  Colour comes from the colour-name
table, AVG-pooled on the same grid.  The result is a stack of 60 complex
maps: real part texture, imaginary part colour.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from ._kernels import binned_std_pool, color_avg_pool, odd_bins
from .colornames import N_COLOR_CHANNELS, color_names, default_table, is_gray
from .errors import InputError, ParameterError

CELL_SIZE = 4
N_ODD = 8
N_EVEN = 4
N_ORIENT = N_ODD + N_EVEN
BIN_WIDTH = np.pi / 4
# gradients of a [0, 1] image below this are floating-point residue
MAG_FLOOR = 1e-10


@dataclass(frozen=True)
class GaborScaleParams:
    scale_index: int
    receptive_field: int
    sigma: float
    wavelength: float
    gamma: float = 0.3  # only used by 2-D reference kernels


SCALES = (
    GaborScaleParams(1, 7, 2.8, 3.5),
    GaborScaleParams(2, 9, 3.6, 4.6),
    GaborScaleParams(3, 11, 4.5, 5.6),
    GaborScaleParams(4, 13, 5.4, 6.8),
    GaborScaleParams(5, 15, 6.3, 7.9),
)
N_CHANNELS = len(SCALES) * N_ORIENT


def scale_params(scale_index):
    for p in SCALES:
        if p.scale_index == scale_index:
            return p
    raise ParameterError(f"unknown Gabor scale {scale_index!r}; expected 1..{len(SCALES)}")


class GradientPair(NamedTuple):
    dx: np.ndarray
    dy: np.ndarray


class OrientationField(NamedTuple):
    theta: np.ndarray
    magnitude: np.ndarray


def _checked_params(params):
    if isinstance(params, (int, np.integer)):
        return scale_params(int(params))
    known = scale_params(params.scale_index)
    if (params.receptive_field, params.sigma, params.wavelength) != \
            (known.receptive_field, known.sigma, known.wavelength):
        raise ParameterError(f"scale {params.scale_index} parameters do not match the filter bank")
    return params


def gabor_1d_raw(params):
    """Sampled ``exp(-x^2 / 2 sigma^2) * sin(2 pi x / lambda)`` before zero-mean correction."""
    params = _checked_params(params)
    r = params.receptive_field // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    return np.exp(-x ** 2 / (2 * params.sigma ** 2)) * np.sin(2 * np.pi * x / params.wavelength)


def gabor_1d_pair(params):
    """Zero-mean 1-D odd Gabor kernels along x and y (identical taps)."""
    k = gabor_1d_raw(params)
    k = k - k.mean()
    return k, k.copy()


def fga_gradients(gray, params):
    """Row-wise and column-wise convolution with the scale's 1-D Gabor pair."""
    gray = np.asarray(gray, dtype=np.float64)
    if gray.ndim != 2 or gray.size == 0:
        raise InputError(f"expected a non-empty 2-D image, got shape {gray.shape}")
    kx, ky = gabor_1d_pair(params)
    dx = ndimage.convolve1d(gray, kx, axis=1, mode='reflect')
    dy = ndimage.convolve1d(gray, ky, axis=0, mode='reflect')
    return GradientPair(dx, dy)


def orientation_magnitude(g):
    """Angle in (-pi, pi] and magnitude of the Gabor gradient.

    Magnitudes below ``MAG_FLOOR`` are rounding residue of the zero-mean
    kernels on flat input and are set to 0 (angle 0); the STD pooling is
    gain invariant and would otherwise turn that residue into full-strength
    texture.
    """
    dx, dy = np.asarray(g.dx), np.asarray(g.dy)
    if dx.shape != dy.shape:
        raise InputError(f"dx and dy differ in shape: {dx.shape} vs {dy.shape}")
    mag = np.sqrt(dx * dx + dy * dy)
    flat = mag < MAG_FLOOR
    if flat.any():
        mag[flat] = 0.0
        theta = np.arctan2(np.where(flat, 0.0, dy), np.where(flat, 1.0, dx))
    else:
        theta = np.arctan2(dy, dx)
    return OrientationField(theta, mag)


def odd_bin_index(theta):
    """Index b of the odd bin [b*pi/4 - pi/8, b*pi/4 + pi/8) holding each angle.

    Bin b is centred on b*pi/4 (mod 2*pi): 0, pi/4, pi/2, 3pi/4, pi, -3pi/4, -pi/2, -pi/4.
    """
    b = np.floor((np.asarray(theta) + BIN_WIDTH / 2) / BIN_WIDTH).astype(np.int64)
    return b % N_ODD


def odd_bin_centers():
    return np.angle(np.exp(1j * BIN_WIDTH * np.arange(N_ODD)))


def bin_s1_odd(f):
    b = odd_bin_index(f.theta)
    return np.stack([np.where(b == k, f.magnitude, 0.0) for k in range(N_ODD)])


def bin_s1_even(f):
    b = odd_bin_index(f.theta) % N_EVEN
    return np.stack([np.where(b == k, f.magnitude, 0.0) for k in range(N_EVEN)])


def _grid_dims(shape):
    h, w = shape[-2:]
    if h < CELL_SIZE or w < CELL_SIZE:
        raise InputError(f"map {h}x{w} is smaller than one {CELL_SIZE}x{CELL_SIZE} cell")
    return h // CELL_SIZE, w // CELL_SIZE


def _cell_sum(x):
    gh, gw = _grid_dims(x.shape)
    c = x[..., :gh * CELL_SIZE, :gw * CELL_SIZE]
    return c.reshape(c.shape[:-2] + (gh, CELL_SIZE, gw, CELL_SIZE)).sum(axis=(-3, -1))


_SHIFTS = ((-1, -1), (-1, 1), (1, -1), (1, 1))


def c1_std_pool(s1):
    """Normalised STD pooling of one S1 map over non-overlapping 4x4 cells.

    Each cell output sums ``S1(x, y) / N(x, y)`` over its 16 pixels and the
    four diagonal shifts, with ``N`` the root of the squared responses at the
    pixel, its diagonal neighbour and the two axis neighbours between them.
    Terms with ``N == 0`` count as zero.
    """
    s1 = np.asarray(s1, dtype=np.float64)
    if s1.ndim != 2:
        raise InputError(f"expected a 2-D map, got shape {s1.shape}")
    _grid_dims(s1.shape)
    h, w = s1.shape
    sq = np.pad(s1 ** 2, 1, mode='symmetric')
    total = np.zeros_like(s1)
    for dr, dc in _SHIFTS:
        n2 = (sq[1:h + 1, 1:w + 1]
              + sq[1 + dr:h + 1 + dr, 1 + dc:w + 1 + dc]
              + sq[1 + dr:h + 1 + dr, 1:w + 1]
              + sq[1:h + 1, 1 + dc:w + 1 + dc])
        n = np.sqrt(n2)
        total += np.divide(s1, n, out=np.zeros_like(s1), where=n > 0)
    return _cell_sum(total)


def c1_avg_pool(s1):
    """Mean over non-overlapping 4x4 cells; works on stacks (..., H, W)."""
    s1 = np.asarray(s1, dtype=np.float64)
    if s1.ndim < 2:
        raise InputError(f"expected a 2-D map, got shape {s1.shape}")
    return _cell_sum(s1) / CELL_SIZE ** 2


def texture_c1(gray, params):
    """C1 texture maps for one scale: (12, gh, gw), 8 odd bins then 4 even bins."""
    gh, gw = _grid_dims(np.shape(gray))
    field = orientation_magnitude(fga_gradients(gray, params))
    bins = odd_bins(field.theta, BIN_WIDTH)
    # a pixel is non-zero only in its own bin's map, so its normalisation sees
    # only same-bin neighbours; this equals c1_std_pool on every binned map
    return binned_std_pool(field.magnitude, bins, gh, gw, CELL_SIZE)


def to_gray(frame):
    """Luminance in [0, 1] from a uint8-range gray or RGB frame."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim == 3 and frame.shape[2] == 1:
        frame = frame[..., 0]
    if frame.ndim == 3:
        if frame.shape[2] != 3:
            raise InputError(f"expected RGB frame, got shape {frame.shape}")
        frame = frame @ np.array([0.299, 0.587, 0.114])
    if frame.ndim != 2:
        raise InputError(f"unsupported frame shape {frame.shape}")
    return frame / 255.0


def pooled_color_names(rgb, table=None):
    """C1 colour maps (12, gh, gw); same values as ``c1_avg_pool(color_names(rgb))``."""
    table = table or default_table()
    rgb = np.asarray(rgb)
    gh, gw = _grid_dims(rgb.shape[:2])
    out = np.zeros((N_COLOR_CHANNELS, gh, gw))
    if is_gray(rgb) and rgb.ndim == 2:
        return out
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise InputError(f"expected HxWx3 RGB image, got shape {rgb.shape}")
    index = table.row_index(rgb[:gh * CELL_SIZE, :gw * CELL_SIZE])
    out[:-1] = color_avg_pool(index, table._by_name, gh, gw, CELL_SIZE)
    return out


def cosine_window(gh, gw):
    return np.outer(np.hanning(gh), np.hanning(gw))


def extract_features(frame, table=None, taper=True, color=None):
    """C1 feature stack for a frame (or search window).

    ``frame`` is a uint8-range gray (H, W) or RGB (H, W, 3) array.  Returns a
    complex array of shape (60, H // 4, W // 4); channel ``12 * s + o`` holds
    texture orientation ``o`` of scale ``s`` in the real part and colour
    channel ``o`` in the imaginary part.  ``color=False`` forces the
    grayscale path for RGB input.
    """
    frame = np.asarray(frame)
    if frame.ndim not in (2, 3) or frame.size == 0:
        raise InputError(f"unsupported frame shape {frame.shape}")
    gh, gw = _grid_dims(frame.shape[:2])
    if color is None:
        color = frame.ndim == 3 and frame.shape[2] == 3
    gray = to_gray(frame)

    feats = np.empty((N_CHANNELS, gh, gw), dtype=np.complex128)
    for s, params in enumerate(SCALES):
        feats[s * N_ORIENT:(s + 1) * N_ORIENT].real = texture_c1(gray, params)
    if color:
        c1_color = pooled_color_names(frame, table)
        feats.imag = np.tile(c1_color, (len(SCALES), 1, 1))
    else:
        feats.imag = 0.0
    if taper:
        feats *= cosine_window(gh, gw)
    return feats


__all__ = [
    'CELL_SIZE', 'N_CHANNELS', 'N_COLOR_CHANNELS', 'SCALES', 'GaborScaleParams',
    'GradientPair', 'OrientationField', 'scale_params', 'gabor_1d_pair',
    'fga_gradients', 'orientation_magnitude', 'bin_s1_odd', 'bin_s1_even',
    'c1_std_pool', 'c1_avg_pool', 'texture_c1', 'extract_features', 'is_gray',
]
