"""Pure-numpy implementations of the hot kernels.

Same contracts as the compiled module ``_kernels_cy``: one level of the
periodized orthonormal 8-tap Daubechies transform (both directions) and the
circular multi-window box-mean minimum used by the adaptive shrink. The
accumulation order over filter taps matches the compiled code, keeping the
two backends numerically interchangeable.
"""

import numpy as np

# 8-tap Daubechies orthonormal scaling filter (synthesis ordering).
DB8_LO = np.array(
    [
        0.23037781330885523,
        0.71484657055254153,
        0.63088076792959036,
        -0.027983769416983849,
        -0.18703481171888114,
        0.030841381835986965,
        0.032883011666982945,
        -0.010597401784997278,
    ],
    dtype=np.float64,
)
# Quadrature mirror highpass: g[t] = (-1)^t * lo[7 - t].
DB8_HI = np.array(
    [(-1.0) ** t * DB8_LO[7 - t] for t in range(8)], dtype=np.float64
)

_TAPS = 8


def _analyze_axis(x, axis):
    """Periodized single-level split along `axis`; length must be even.

    low[k] = sum_t lo[t] * x[(2k + t) mod n], likewise for high.
    """
    n = x.shape[axis]
    half = n // 2
    moved = np.moveaxis(x, axis, 0)
    low = np.zeros((half,) + moved.shape[1:], dtype=np.float64)
    high = np.zeros_like(low)
    for t in range(_TAPS):
        cls, off = t & 1, t >> 1
        seg = np.roll(moved[cls::2], -off, axis=0)  # x[(2k + t) mod n]
        low += DB8_LO[t] * seg
        high += DB8_HI[t] * seg
    low = np.moveaxis(low, 0, axis)
    high = np.moveaxis(high, 0, axis)
    return low, high


def _synthesize_axis(low, high, axis):
    """Inverse of `_analyze_axis`: x[(2k + t) mod n] += lo[t]*low[k] + hi[t]*high[k]."""
    lo_m = np.moveaxis(low, axis, 0)
    hi_m = np.moveaxis(high, axis, 0)
    half = lo_m.shape[0]
    n = 2 * half
    out = np.zeros((n,) + lo_m.shape[1:], dtype=np.float64)
    for t in range(_TAPS):
        cls, off = t & 1, t >> 1
        contrib = DB8_LO[t] * lo_m + DB8_HI[t] * hi_m
        out[cls::2] += np.roll(contrib, off, axis=0)
    return np.moveaxis(out, 0, axis)


def dwt_level2d(x):
    """One separable analysis level: returns (ll, lh, hl, hh).

    First letter is the row band, second the column band (l=low, h=high).
    """
    low_c, high_c = _analyze_axis(np.asarray(x, dtype=np.float64), axis=1)
    ll, hl = _analyze_axis(low_c, axis=0)
    lh, hh = _analyze_axis(high_c, axis=0)
    return ll, lh, hl, hh


def idwt_level2d(ll, lh, hl, hh):
    """Inverse of `dwt_level2d`."""
    low_c = _synthesize_axis(ll, hl, axis=0)
    high_c = _synthesize_axis(lh, hh, axis=0)
    return _synthesize_axis(low_c, high_c, axis=1)


def _box_sum_axis(x, size, axis):
    r = size // 2
    moved = np.moveaxis(x, axis, 0)
    pad = ((r, r),) + ((0, 0),) * (moved.ndim - 1)
    padded = np.pad(moved, pad, mode="wrap")
    cs = np.cumsum(padded, axis=0, dtype=np.float64)
    zero = np.zeros((1,) + cs.shape[1:], dtype=np.float64)
    cs = np.concatenate([zero, cs], axis=0)
    out = cs[size:] - cs[:-size]
    return np.moveaxis(out, 0, axis)


def min_box_mean(energy, window_sizes):
    """Elementwise minimum over circular box means of odd-sized windows."""
    e = np.asarray(energy, dtype=np.float64)
    best = None
    for size in window_sizes:
        s = _box_sum_axis(e, size, axis=0)
        s = _box_sum_axis(s, size, axis=1)
        mean = s / float(size * size)
        best = mean if best is None else np.minimum(best, mean)
    return best
