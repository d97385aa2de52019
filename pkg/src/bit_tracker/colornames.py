"""RGB -> 11 colour-name probability lookup.

The table is indexed by quantised RGB, ``row = (r_bin * bins + g_bin) * bins + b_bin``
with ``r_bin = floor(R * bins / 256)``.  Tables are stored as text::

    CNTABLE v1 <bins>
    p_black p_blue ... p_yellow      # bins**3 rows
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import FormatError, InputError

COLOR_NAMES = ('black', 'blue', 'brown', 'grey', 'green', 'orange',
               'pink', 'purple', 'red', 'white', 'yellow')
N_NAMES = len(COLOR_NAMES)
# 11 names plus the zero channel that pads colour up to 12 orientations
N_COLOR_CHANNELS = 12

# prototype RGB (0..1) for the analytic fallback table, same order as COLOR_NAMES
_PROTOTYPES = np.array([
    [0.00, 0.00, 0.00],
    [0.10, 0.20, 0.80],
    [0.45, 0.30, 0.15],
    [0.50, 0.50, 0.50],
    [0.15, 0.65, 0.15],
    [1.00, 0.55, 0.05],
    [1.00, 0.60, 0.75],
    [0.50, 0.15, 0.60],
    [0.85, 0.10, 0.10],
    [1.00, 1.00, 1.00],
    [0.95, 0.90, 0.10],
])

_HEADER = 'CNTABLE v1'


@dataclass(frozen=True, eq=False)
class ColorNameTable:
    bins_per_axis: int
    rows: np.ndarray  # (bins**3, 11)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if self.bins_per_axis < 1 or self.bins_per_axis > 256:
            raise FormatError(f"bins_per_axis must be in 1..256, got {self.bins_per_axis}")
        expected = (self.bins_per_axis ** 3, N_NAMES)
        if rows.shape != expected:
            raise FormatError(f"table shape {rows.shape}, expected {expected}")
        if np.any(rows < 0):
            raise FormatError("table has negative probabilities")
        sums = rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > 1e-6)
        if bad.size:
            raise FormatError(f"table row {bad[0]} sums to {sums[bad[0]]!r}, not 1")
        rows.setflags(write=False)
        object.__setattr__(self, 'rows', rows)
        # channel-major copy for gathering (11, H, W) without a transpose
        by_name = np.ascontiguousarray(rows.T)
        by_name.setflags(write=False)
        object.__setattr__(self, '_by_name', by_name)

    def row_index(self, rgb):
        """Row index for uint8-range RGB values of shape (..., 3)."""
        rgb = np.asarray(rgb)
        b = self.bins_per_axis
        if rgb.dtype == np.uint8:
            q = rgb.astype(np.intp) * b >> 8
        else:
            q = np.clip(np.floor(rgb * (b / 256.0)), 0, b - 1).astype(np.intp)
        return (q[..., 0] * b + q[..., 1]) * b + q[..., 2]

    def lookup(self, rgb):
        return self.rows[self.row_index(rgb)]

    def save(self, path):
        with open(path, 'w') as fh:
            fh.write(f"{_HEADER} {self.bins_per_axis}\n")
            np.savetxt(fh, self.rows, fmt='%.17g')

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            header = fh.readline().split()
            if len(header) != 3 or ' '.join(header[:2]) != _HEADER:
                raise FormatError(f"{path}: bad header {' '.join(header)!r}")
            try:
                bins = int(header[2])
            except ValueError:
                raise FormatError(f"{path}: bad bin count {header[2]!r}") from None
            try:
                rows = np.loadtxt(fh, dtype=np.float64, ndmin=2)
            except ValueError as exc:
                raise FormatError(f"{path}: {exc}") from None
        return cls(bins, rows)


def fallback_table(bins_per_axis=32, temperature=0.12):
    """Deterministic analytic table: softmax over distances to prototype colours."""
    centers = (np.arange(bins_per_axis) + 0.5) / bins_per_axis
    r, g, b = np.meshgrid(centers, centers, centers, indexing='ij')
    rgb = np.stack([r.ravel(), g.ravel(), b.ravel()], axis=1)
    d2 = ((rgb[:, None, :] - _PROTOTYPES[None, :, :]) ** 2).sum(axis=2)
    logits = -d2 / (2 * temperature ** 2)
    logits -= logits.max(axis=1, keepdims=True)
    p = np.exp(logits)
    p /= p.sum(axis=1, keepdims=True)
    return ColorNameTable(bins_per_axis, p)


@lru_cache(maxsize=1)
def default_table():
    return fallback_table()


def is_gray(image):
    image = np.asarray(image)
    if image.ndim == 2:
        return True
    if image.ndim == 3 and image.shape[2] == 1:
        return True
    if image.ndim == 3 and image.shape[2] >= 3:
        return bool(np.array_equal(image[..., 0], image[..., 1])
                    and np.array_equal(image[..., 1], image[..., 2]))
    raise InputError(f"unsupported image shape {image.shape}")


def color_names(rgb, table=None):
    """S1 colour maps: (12, H, W) with the 11 name probabilities and a zero pad.

    Grayscale input (2-D array) yields twelve zero maps.
    """
    table = table or default_table()
    rgb = np.asarray(rgb)
    if rgb.ndim == 2 or (rgb.ndim == 3 and rgb.shape[2] == 1):
        return np.zeros((N_COLOR_CHANNELS,) + rgb.shape[:2])
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise InputError(f"expected HxWx3 RGB image, got shape {rgb.shape}")
    out = np.zeros((N_COLOR_CHANNELS,) + rgb.shape[:2])
    np.take(table._by_name, table.row_index(rgb), axis=1, out=out[:N_NAMES])
    return out
