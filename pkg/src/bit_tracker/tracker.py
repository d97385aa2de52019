"""Frequency-domain S2/C2 tracking model.

The prototype (C1 features of the target) is cross-correlated with the
features of each new search window and the 60 channel correlations are
averaged into one S2 map.  A filter W, regressed in closed form so that
``W * S2`` reproduces a Gaussian centred on the target, turns S2 into the
C2 map whose maximum gives the new position.  Prototype and filter are
both updated by linear interpolation with rate ``rho``.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import spectral
from .bbox import BoundingBox
from .colornames import default_table, is_gray
from .errors import InputError, NumericalError, ParameterError
from .features import CELL_SIZE, extract_features

MODES = ('hybrid', 'generative', 'discriminative')
N_TREND = 5


@dataclass(frozen=True)
class TrackerConfig:
    rho: float = 0.02
    sigma_s_candidates: tuple = (0.1, 0.08)
    lam: float = spectral.DEFAULT_LAMBDA
    padding: float = 2.0
    mode: str = 'hybrid'
    taper: bool = True
    workers: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ParameterError(f"rho must lie in (0, 1), got {self.rho}")
        if self.padding < 1:
            raise ParameterError(f"padding must be >= 1, got {self.padding}")
        if self.lam < 0:
            raise ParameterError(f"lambda must be non-negative, got {self.lam}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if len(self.sigma_s_candidates) != 2 or min(self.sigma_s_candidates) <= 0:
            raise ParameterError(f"need two positive sigma_s candidates, got {self.sigma_s_candidates}")


@dataclass(frozen=True, eq=False)
class ResponseMap:
    values: np.ndarray
    peak: tuple  # (row, col, value)
    imag_residue: float = 0.0

    @classmethod
    def from_complex(cls, response):
        values = np.ascontiguousarray(response.real)
        residue = float(np.abs(response.imag).max()) if np.iscomplexobj(response) else 0.0
        return cls.from_values(values, residue)

    @classmethod
    def from_values(cls, values, imag_residue=0.0):
        values = np.asarray(values, dtype=np.float64)
        if np.all(np.isnan(values)):
            raise NumericalError("response map is all NaN")
        # nanargmax scans row-major, so ties go to the smallest row then column
        i = int(np.nanargmax(values))
        r, c = divmod(i, values.shape[1])
        return cls(values, (r, c, float(values[r, c])), imag_residue)


@dataclass(frozen=True, eq=False)
class TrackerState:
    cfg: TrackerConfig
    table: object
    color: bool
    center: tuple  # target centre (cx, cy) in frame pixels
    target_size: tuple  # (w, h)
    window_size: tuple  # (W, H), multiples of the cell size
    grid_dims: tuple  # (rows, cols)
    prototype: np.ndarray  # C1^P, (60, rows, cols) complex
    prototype_spectrum: np.ndarray
    label_spectrum: np.ndarray
    # filter per unit label: weights_spectrum == label_spectrum * transfer
    transfer: np.ndarray
    weights_spectrum: np.ndarray
    sigma_s: float
    frame_index: int = 1
    recent_peaks: tuple = ()
    sigma_fixed: bool = False

    @property
    def box(self):
        return BoundingBox.from_center(*self.center, *self.target_size)

    @property
    def grid_center(self):
        return (self.grid_dims[0] // 2, self.grid_dims[1] // 2)


def gaussian_label(grid_dims, center, sigma_cells):
    if not sigma_cells > 0:
        raise ParameterError(f"label sigma must be positive, got {sigma_cells}")
    rows, cols = grid_dims
    r0, c0 = center
    if not (0 <= r0 < rows and 0 <= c0 < cols):
        raise ParameterError(f"label centre {center} outside grid {grid_dims}")
    r = np.arange(rows)[:, None] - r0
    c = np.arange(cols)[None, :] - c0
    return np.exp(-(r ** 2 + c ** 2) / (2.0 * sigma_cells ** 2))


def label_sigma_cells(sigma_s, target_size):
    w, h = target_size
    return sigma_s * np.sqrt((w / CELL_SIZE) * (h / CELL_SIZE))


def window_dims(target_size, padding):
    w, h = target_size
    ww = CELL_SIZE * max(1, int(round(w * padding / CELL_SIZE)))
    wh = CELL_SIZE * max(1, int(round(h * padding / CELL_SIZE)))
    return ww, wh


def _reflect_index(idx, n):
    m = np.mod(idx, 2 * n)
    return np.where(m >= n, 2 * n - 1 - m, m)


def extract_window(frame, center, window_size):
    """Crop a window centred on ``center``, filling outside the frame by reflection."""
    ww, wh = window_size
    x0 = int(np.floor(center[0] - ww / 2 + 0.5))
    y0 = int(np.floor(center[1] - wh / 2 + 0.5))
    h, w = frame.shape[:2]
    if 0 <= x0 and 0 <= y0 and x0 + ww <= w and y0 + wh <= h:
        return frame[y0:y0 + wh, x0:x0 + ww]
    rows = _reflect_index(np.arange(y0, y0 + wh), h)
    cols = _reflect_index(np.arange(x0, x0 + ww), w)
    return frame[np.ix_(rows, cols)]


def _window_features(state_like, frame, center):
    cfg, table, color, window_size = state_like
    win = extract_window(frame, center, window_size)
    feats = extract_features(win, table, taper=cfg.taper, color=color)
    return feats, spectral.forward(feats, workers=cfg.workers)


def _s2_from_spectra(feats_spec, proto_spec):
    return spectral.correlate(feats_spec, proto_spec).mean(axis=0)


def _transfer(feats_spec, cfg):
    """Closed-form filter for a unit label, trained on the window's own features."""
    if cfg.mode == 'discriminative':
        den = feats_spec  # one filter per channel, fed C1 directly
    else:
        den = _s2_from_spectra(feats_spec, feats_spec)
    return spectral.divide_regularized(np.ones(den.shape[-2:]), den, cfg.lam)


def _label_spectrum(sigma_s, target_size, grid_dims):
    rows, cols = grid_dims
    label = gaussian_label(grid_dims, (rows // 2, cols // 2),
                           label_sigma_cells(sigma_s, target_size))
    return spectral.forward(label)


def init(frame, target, cfg=None, table=None):
    """Build the tracker state from the first frame and its ground-truth box."""
    cfg = cfg or TrackerConfig()
    table = table or default_table()
    frame = np.asarray(frame)
    if frame.ndim not in (2, 3) or frame.size == 0:
        raise InputError(f"unsupported frame shape {frame.shape}")
    if not isinstance(target, BoundingBox):
        target = BoundingBox(*target)
    h, w = frame.shape[:2]
    cx, cy = target.center
    if not (0 <= cx <= w and 0 <= cy <= h):
        raise InputError(f"target {target.as_tuple()} lies outside the {w}x{h} frame")

    color = not is_gray(frame)
    size = (target.w, target.h)
    win_size = window_dims(size, cfg.padding)
    grid = (win_size[1] // CELL_SIZE, win_size[0] // CELL_SIZE)
    if min(grid) < 1:
        raise InputError(f"target {target.as_tuple()} too small for a search window")
    feats, spec = _window_features((cfg, table, color, win_size), frame, (cx, cy))

    sigma_s = cfg.sigma_s_candidates[0]
    label_spec = _label_spectrum(sigma_s, size, grid)
    transfer = _transfer(spec, cfg)
    return TrackerState(
        cfg=cfg, table=table, color=color, center=(cx, cy), target_size=size,
        window_size=win_size, grid_dims=grid, prototype=feats, prototype_spectrum=spec,
        label_spectrum=label_spec, transfer=transfer,
        weights_spectrum=label_spec * transfer, sigma_s=sigma_s,
    )


def s2_response(state, features, features_spectrum=None):
    """S2 spectrum: channel-averaged cross-correlation of features with the prototype."""
    features = np.asarray(features)
    if features.shape != state.prototype.shape:
        raise InputError(f"feature stack {features.shape} does not match prototype "
                         f"{state.prototype.shape}")
    if features_spectrum is None:
        features_spectrum = spectral.forward(features, workers=state.cfg.workers)
    return _s2_from_spectra(features_spectrum, state.prototype_spectrum)


def c2_response(state, s2):
    """C2 map ``real(F^-1[F[W] * F[S2]])``."""
    s2 = np.asarray(s2)
    if s2.shape != state.weights_spectrum.shape:
        raise InputError(f"S2 spectrum {s2.shape} does not match filter "
                         f"{state.weights_spectrum.shape}")
    c2 = spectral.inverse(spectral.multiply(state.weights_spectrum, s2), workers=state.cfg.workers)
    return ResponseMap.from_complex(c2)


def s2_map(state, s2):
    """Spatial S2 response with zero lag moved to the grid centre."""
    s2 = spectral.inverse(s2, workers=state.cfg.workers)
    return ResponseMap.from_complex(np.roll(s2, state.grid_center, axis=(0, 1)))


def discriminative_response(state, features_spectrum):
    """C2 fed directly by C1: channel mean of per-channel filter outputs."""
    prod = spectral.multiply(state.weights_spectrum, features_spectrum).mean(axis=0)
    return ResponseMap.from_complex(spectral.inverse(prod, workers=state.cfg.workers))


def response(state, features, features_spectrum=None):
    if features_spectrum is None:
        features_spectrum = spectral.forward(features, workers=state.cfg.workers)
    mode = state.cfg.mode
    if mode == 'discriminative':
        return discriminative_response(state, features_spectrum)
    s2 = s2_response(state, features, features_spectrum)
    if mode == 'generative':
        return s2_map(state, s2)
    return c2_response(state, s2)


def _wrap(d, n):
    if d > n / 2:
        return d - n
    if d <= -n / 2:
        return d + n
    return d


def displacement(resp, state):
    """Peak offset from the grid centre in cells, wrapped to (-n/2, n/2]."""
    rows, cols = state.grid_dims
    r0, c0 = state.grid_center
    r, c, _ = resp.peak
    return _wrap(r - r0, rows), _wrap(c - c0, cols)


def locate(resp, state):
    dr, dc = displacement(resp, state)
    cx, cy = state.center
    return BoundingBox.from_center(cx + CELL_SIZE * dc, cy + CELL_SIZE * dr, *state.target_size)


def update(state, features, features_spectrum=None, rho=None):
    """Interpolate prototype and filter towards the model learnt at the new location."""
    rho = state.cfg.rho if rho is None else rho
    if features_spectrum is None:
        features_spectrum = spectral.forward(features, workers=state.cfg.workers)
    transfer_new = _transfer(features_spectrum, state.cfg)
    keep = 1.0 - rho
    return replace(
        state,
        prototype=rho * features + keep * state.prototype,
        prototype_spectrum=rho * features_spectrum + keep * state.prototype_spectrum,
        transfer=rho * transfer_new + keep * state.transfer,
        weights_spectrum=rho * (state.label_spectrum * transfer_new) + keep * state.weights_spectrum,
    )


def adapt_sigma(recent_peaks, candidates=(0.1, 0.08)):
    """Pick the label width from the trend of the first five response peaks.

    Rising trend (positive least-squares slope) selects the wider label.
    """
    peaks = np.asarray(recent_peaks, dtype=np.float64)
    if peaks.shape != (N_TREND,):
        raise ParameterError(f"need exactly {N_TREND} peak values, got {peaks.size}")
    t = np.arange(N_TREND) - (N_TREND - 1) / 2
    slope = float(t @ (peaks - peaks.mean())) / float(t @ t)
    return candidates[0] if slope > 0 else candidates[1]


def set_sigma(state, sigma_s):
    label_spec = _label_spectrum(sigma_s, state.target_size, state.grid_dims)
    return replace(state, sigma_s=sigma_s, label_spectrum=label_spec,
                   weights_spectrum=label_spec * state.transfer)


def _clamp_center(box, frame_shape):
    h, w = frame_shape[:2]
    cx, cy = box.center
    return min(max(cx, 0.0), float(w)), min(max(cy, 0.0), float(h))


def track_frame(state, frame):
    """Localise the target in ``frame`` and update the model; returns (box, state)."""
    frame = np.asarray(frame)
    geom = (state.cfg, state.table, state.color, state.window_size)
    feats, spec = _window_features(geom, frame, state.center)
    resp = response(state, feats, spec)
    new_center = _clamp_center(locate(resp, state), frame.shape)

    if not state.sigma_fixed:
        peaks = state.recent_peaks + (resp.peak[2],)
        state = replace(state, recent_peaks=peaks)
        if len(peaks) == N_TREND:
            sigma = adapt_sigma(peaks, state.cfg.sigma_s_candidates)
            state = replace(set_sigma(state, sigma), sigma_fixed=True)

    if new_center != state.center:
        feats, spec = _window_features(geom, frame, new_center)
    state = replace(update(state, feats, spec), center=new_center,
                    frame_index=state.frame_index + 1)
    return state.box, state


class BITTracker:
    """Stateful wrapper: ``init(frame, box)`` then ``update(frame) -> box``."""

    def __init__(self, cfg=None, table=None):
        self.cfg = cfg or TrackerConfig()
        self.table = table
        self.state = None

    def init(self, frame, box):
        self.state = init(frame, box, self.cfg, self.table)
        return self.state.box

    def update(self, frame):
        if self.state is None:
            raise InputError("tracker used before init()")
        box, self.state = track_frame(self.state, frame)
        return box

    def track(self, frames, box):
        """Run one-pass over an iterable of frames; first box is the initial one."""
        frames = iter(frames)
        boxes = [self.init(next(frames), box)]
        boxes.extend(self.update(f) for f in frames)
        return boxes
