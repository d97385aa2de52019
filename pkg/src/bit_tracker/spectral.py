"""2-D FFT helpers for the S2/C2 stages.

All functions operate on the last two axes, so a stack of maps with shape
``(K, H, W)`` is transformed channel by channel in a single call.
"""

import numpy as np
import scipy.fft

from .errors import InputError, NumericalError

DEFAULT_LAMBDA = 1e-4


def forward(x, workers=None):
    """Unnormalised forward DFT over the last two axes."""
    x = np.asarray(x)
    if x.ndim < 2 or x.shape[-1] < 1 or x.shape[-2] < 1:
        raise InputError(f"expected a map of at least 1x1, got shape {x.shape}")
    return scipy.fft.fft2(x, axes=(-2, -1), workers=workers)


def inverse(s, workers=None):
    """Inverse DFT scaled by 1/(H*W), so ``inverse(forward(x)) == x``."""
    s = np.asarray(s)
    if s.ndim < 2:
        raise InputError(f"expected a spectrum of at least 1x1, got shape {s.shape}")
    return scipy.fft.ifft2(s, axes=(-2, -1), workers=workers)


def _check_dims(a, b):
    if a.shape[-2:] != b.shape[-2:]:
        raise InputError(f"spectrum dims differ: {a.shape[-2:]} vs {b.shape[-2:]}")


def multiply(a, b):
    """Elementwise product; the spectral form of circular convolution.

    Written out in real arithmetic so that ``multiply(a, b)`` and
    ``multiply(b, a)`` agree bit for bit (numpy's fused complex product
    does not guarantee that).
    """
    a = np.asarray(a)
    b = np.asarray(b)
    _check_dims(a, b)
    if not (np.iscomplexobj(a) or np.iscomplexobj(b)):
        return a * b
    ar, ai = a.real, a.imag
    br, bi = b.real, b.imag
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b, 1j))
    out.real = ar * br - ai * bi
    out.imag = ar * bi + ai * br
    return out


def correlate(a, b):
    """Elementwise ``a * conj(b)``; the spectral form of circular cross-correlation.

    ``inverse(correlate(forward(x), forward(p)))[s] = sum_n x[n + s] * conj(p[n])``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    _check_dims(a, b)
    return a * np.conj(b)


def divide_regularized(num, den, lam=DEFAULT_LAMBDA):
    """Return ``num * conj(den) / (|den|^2 + lam)`` elementwise.

    With ``lam == 0`` this is exact division and any zero bin in ``den``
    raises :class:`NumericalError`.
    """
    num = np.asarray(num)
    den = np.asarray(den)
    _check_dims(num, den)
    if lam < 0:
        raise InputError(f"lambda must be non-negative, got {lam}")
    power = den.real ** 2 + den.imag ** 2
    if lam == 0 and not np.all(power > 0):
        raise NumericalError("zero denominator bin with lambda = 0")
    return num * np.conj(den) / (power + lam)
