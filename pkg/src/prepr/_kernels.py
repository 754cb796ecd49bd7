"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly, unless the environment
variable ``PREPR_DISABLE_NUMBA`` is set to a truthy value (``1``, ``true``,
``yes``).  Both paths compute the same quantities; they may differ in the
last few bits because of summation order and the erfc implementation.
"""

import math
import os

import numpy as np
from scipy.special import ndtr

EPS_CLIP = 1e-15
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

def _column_moments_np(x):
    mean = x.mean(axis=0)
    c = x - mean
    c2 = c * c
    var = c2.mean(axis=0)
    m3 = (c2 * c).mean(axis=0)
    m4 = (c2 * c2).mean(axis=0)
    return mean, var, m3, m4 - 3.0 * var * var


def _q_poly_np(x, e1, e2, e3, e4, cross):
    x2 = x * x
    return x * (
        e3 * (x2 - 3.0) / (12.0 * e1 * e1)
        - e2 * e2 * (x2 * x2 + 2.0 * x2 - 3.0) / (18.0 * e1 * e1 * e1)
        - (e4 * (x2 + 3.0) + 2.0 * cross) / (4.0 * e1 * e1)
    )


def _prepivot_tails_np(x, e1, e2, e3, e4, cross, big_n):
    q = _q_poly_np(x, e1, e2, e3, e4, cross)
    dens = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    tail = 2.0 * ndtr(-x) - 2.0 * q * dens / big_n
    return np.clip(tail, EPS_CLIP, 1.0 - EPS_CLIP)


def _ma_filter_np(z, coef):
    k = coef.shape[0]
    p = z.shape[1] - k + 1
    out = coef[0] * z[:, :p]
    for j in range(1, k):
        out += coef[j] * z[:, j:j + p]
    return out


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

def _build_numba():
    from numba import njit

    @njit(cache=True, nogil=True)
    def column_moments(x):
        n, p = x.shape
        mean = np.zeros(p)
        for i in range(n):
            for j in range(p):
                mean[j] += x[i, j]
        for j in range(p):
            mean[j] /= n
        var = np.zeros(p)
        m3 = np.zeros(p)
        m4 = np.zeros(p)
        for i in range(n):
            for j in range(p):
                c = x[i, j] - mean[j]
                c2 = c * c
                var[j] += c2
                m3[j] += c2 * c
                m4[j] += c2 * c2
        for j in range(p):
            var[j] /= n
            m3[j] /= n
            m4[j] = m4[j] / n - 3.0 * var[j] * var[j]
        return mean, var, m3, m4

    @njit(cache=True, nogil=True)
    def _q_scalar(x, e1, e2, e3, e4, cross):
        x2 = x * x
        return x * (
            e3 * (x2 - 3.0) / (12.0 * e1 * e1)
            - e2 * e2 * (x2 * x2 + 2.0 * x2 - 3.0) / (18.0 * e1 * e1 * e1)
            - (e4 * (x2 + 3.0) + 2.0 * cross) / (4.0 * e1 * e1)
        )

    @njit(cache=True, nogil=True)
    def q_poly(x, e1, e2, e3, e4, cross):
        out = np.empty(x.shape[0])
        for i in range(x.shape[0]):
            out[i] = _q_scalar(x[i], e1[i], e2[i], e3[i], e4[i], cross[i])
        return out

    @njit(cache=True, nogil=True)
    def prepivot_tails(x, e1, e2, e3, e4, cross, big_n):
        out = np.empty(x.shape[0])
        for i in range(x.shape[0]):
            xi = x[i]
            q = _q_scalar(xi, e1[i], e2[i], e3[i], e4[i], cross[i])
            dens = _INV_SQRT_2PI * math.exp(-0.5 * xi * xi)
            t = math.erfc(xi / _SQRT2) - 2.0 * q * dens / big_n
            if t < EPS_CLIP:
                t = EPS_CLIP
            elif t > 1.0 - EPS_CLIP:
                t = 1.0 - EPS_CLIP
            out[i] = t
        return out

    @njit(cache=True, nogil=True)
    def ma_filter(z, coef):
        k = coef.shape[0]
        n = z.shape[0]
        p = z.shape[1] - k + 1
        out = np.zeros((n, p))
        for i in range(n):
            for j in range(p):
                s = 0.0
                for l in range(k):
                    s += coef[l] * z[i, j + l]
                out[i, j] = s
        return out

    return column_moments, q_poly, prepivot_tails, ma_filter


def _numba_disabled():
    return os.environ.get("PREPR_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}


numpy_kernels = {
    "column_moments": _column_moments_np,
    "q_poly": _q_poly_np,
    "prepivot_tails": _prepivot_tails_np,
    "ma_filter": _ma_filter_np,
}

numba_kernels = None
try:
    numba_kernels = dict(zip(numpy_kernels, _build_numba()))
except ImportError:  # pragma: no cover - numba is optional at runtime
    pass

if numba_kernels is not None and not _numba_disabled():
    BACKEND = "numba"
    _active = numba_kernels
else:
    BACKEND = "numpy"
    _active = numpy_kernels


def column_moments(x):
    """Per-column mean, variance, third central moment, excess fourth moment."""
    return _active["column_moments"](np.ascontiguousarray(x, dtype=np.float64))


def q_poly(x, e1, e2, e3, e4, cross):
    args = [np.ascontiguousarray(a, dtype=np.float64) for a in (x, e1, e2, e3, e4, cross)]
    return _active["q_poly"](*args)


def prepivot_tails(x, e1, e2, e3, e4, cross, big_n):
    """Clamped upper tails ``1 - J(x)`` of the corrected prepivot, elementwise."""
    args = [np.ascontiguousarray(a, dtype=np.float64) for a in (x, e1, e2, e3, e4, cross)]
    return _active["prepivot_tails"](*args, float(big_n))


def ma_filter(z, coef):
    """Moving-average filter along columns: ``out[:, j] = sum_l coef[l] * z[:, j + l]``."""
    return _active["ma_filter"](
        np.ascontiguousarray(z, dtype=np.float64), np.ascontiguousarray(coef, dtype=np.float64)
    )
