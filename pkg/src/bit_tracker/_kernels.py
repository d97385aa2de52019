"""Compiled inner loops for the per-frame feature path."""

import math

import numba
import numpy as np

# finite inputs only; no reassociation, so results stay IEEE-exact
_FAST = {'nnan', 'ninf'}


@numba.njit(cache=True)
def odd_bins(theta, bin_width):
    h, w = theta.shape
    bins = np.empty((h, w), dtype=np.int64)
    half = bin_width / 2
    for r in range(h):
        for c in range(w):
            bins[r, c] = int(math.floor((theta[r, c] + half) / bin_width)) % 8
    return bins


@numba.njit(cache=True, fastmath=_FAST)
def binned_std_pool(mag, bins, gh, gw, cell):
    """STD-pool the 8 odd and 4 even sparse orientation maps in one pass.

    ``bins`` holds the odd bin (0..7) of every pixel; the even bin is
    ``bins % 4``.  Returns (12, gh, gw).
    """
    h, w = mag.shape
    hc = gh * cell
    wc = gw * cell
    # squared magnitude and bins with a 1-pixel half-sample symmetric border
    sq = np.empty((h + 2, w + 2))
    bp = np.empty((h + 2, w + 2), dtype=np.int64)
    for r in range(-1, h + 1):
        rr = -r - 1 if r < 0 else (2 * h - r - 1 if r >= h else r)
        for c in range(-1, w + 1):
            cc = -c - 1 if c < 0 else (2 * w - c - 1 if c >= w else c)
            v = mag[rr, cc]
            sq[r + 1, c + 1] = v * v
            bp[r + 1, c + 1] = bins[rr, cc]

    t_odd = np.zeros(wc)
    t_even = np.zeros(wc)
    out = np.zeros((12, gh, gw))
    for r in range(hc):
        t_odd[:] = 0.0
        t_even[:] = 0.0
        for dr in (0, 2):
            for dc in (0, 2):
                for c in range(wc):
                    b = bp[r + 1, c + 1]
                    be = b & 3
                    a2 = sq[r + 1, c + 1]
                    # diagonal, vertical and horizontal neighbour
                    nd = bp[r + dr, c + dc]
                    nv = bp[r + dr, c + 1]
                    nh = bp[r + 1, c + dc]
                    vd = sq[r + dr, c + dc]
                    vv = sq[r + dr, c + 1]
                    vh = sq[r + 1, c + dc]
                    n_odd = (a2 + (vd if nd == b else 0.0) + (vv if nv == b else 0.0)
                             + (vh if nh == b else 0.0))
                    n_even = (a2 + (vd if (nd & 3) == be else 0.0)
                              + (vv if (nv & 3) == be else 0.0)
                              + (vh if (nh & 3) == be else 0.0))
                    a = mag[r, c]
                    t_odd[c] += a / math.sqrt(n_odd) if n_odd > 0 else 0.0
                    t_even[c] += a / math.sqrt(n_even) if n_even > 0 else 0.0
        gr = r // cell
        for c in range(wc):
            b = bp[r + 1, c + 1]
            out[b, gr, c // cell] += t_odd[c]
            out[8 + (b & 3), gr, c // cell] += t_even[c]
    return out


@numba.njit(cache=True)
def color_avg_pool(index, by_name, gh, gw, cell):
    """AVG-pooled colour-name probabilities: (11, gh, gw) from per-pixel table rows."""
    n = by_name.shape[0]
    out = np.zeros((n, gh, gw))
    for r in range(gh * cell):
        gr = r // cell
        for c in range(gw * cell):
            gc = c // cell
            i = index[r, c]
            for k in range(n):
                out[k, gr, gc] += by_name[k, i]
    return out / (cell * cell)
