"""Edgeworth-corrected analytic prepivot for the two-sample studentized root.

The CDF of the absolute studentized mean difference is approximated by

    J(x) = 2 Phi(x) - 1 + (2 / N) q(x) phi(x),   x >= 0,

where ``q`` is an odd polynomial whose coefficients combine the two samples'
variances, third central moments and excess kurtoses, weighted by the sample
fractions ``r_x = n / N`` and ``r_y = m / N``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from . import _kernels
from .errors import DegenerateVariableError, ValidationError
from .moments import MarginalMoments

EPS_CLIP = _kernels.EPS_CLIP
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def norm_cdf(x):
    return ndtr(x)


def norm_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def norm_ppf(u):
    return ndtri(u)


@dataclass(frozen=True)
class EtaCoefficients:
    """Combined two-sample moment functionals feeding the correction polynomial."""

    eta1: np.ndarray
    eta2: np.ndarray
    eta3: np.ndarray
    eta4: np.ndarray
    cross_term: np.ndarray
    r_x: float
    r_y: float
    N: int

    @property
    def p(self):
        return self.eta1.shape[0]

    @property
    def degenerate(self):
        """Mask of variables whose variance is zero in both samples."""
        return self.eta1 <= 0.0


def eta_coefficients(mom_x: MarginalMoments, mom_y: MarginalMoments, n=None, m=None):
    """Build the eta coefficients from the two samples' plug-in moments.

    ``n`` and ``m`` default to the sample sizes recorded in the moments.
    Variables with zero variance in both samples are not rejected here; they
    show up in :attr:`EtaCoefficients.degenerate` and the callers decide.
    """
    n = mom_x.n if n is None else int(n)
    m = mom_y.n if m is None else int(m)
    if mom_x.p != mom_y.p:
        raise ValidationError(f"dimension mismatch: {mom_x.p} vs {mom_y.p} variables")
    if n < 2 or m < 2:
        raise ValidationError(f"need n, m >= 2, got n={n}, m={m}")
    big_n = n + m
    rx = n / big_n
    ry = m / big_n
    vx, vy = mom_x.variance, mom_y.variance
    return EtaCoefficients(
        eta1=vx / rx + vy / ry,
        eta2=mom_x.third_central / rx**2 - mom_y.third_central / ry**2,
        eta3=mom_x.excess_fourth / rx**3 + mom_y.excess_fourth / ry**3,
        eta4=vx * vx / rx**3 + vy * vy / ry**3,
        cross_term=vx * vy / (rx**2 * ry**2),
        r_x=rx,
        r_y=ry,
        N=big_n,
    )


def _select(eta, i):
    idx = slice(None) if i is None else np.atleast_1d(i)
    fields = (eta.eta1, eta.eta2, eta.eta3, eta.eta4, eta.cross_term)
    return [f[idx] for f in fields]


def _check_nondegenerate(e1, i):
    bad = np.flatnonzero(e1 <= 0.0)
    if bad.size:
        where = bad if i is None else np.atleast_1d(i)[bad]
        raise DegenerateVariableError(where)


def _broadcast(x, n_vars):
    x = np.asarray(x, dtype=np.float64)
    return np.broadcast_to(x, (n_vars,)) if x.ndim == 0 else x


def q_polynomial(x, eta: EtaCoefficients, i=None):
    """Evaluate the correction polynomial ``q_i(x)``.

    With ``i`` an int, ``x`` is a scalar (or array of abscissae for that
    variable) and a float/array is returned.  With ``i=None`` the polynomial
    is evaluated for every variable; ``x`` then has one entry per variable.
    """
    e1, e2, e3, e4, cr = _select(eta, i)
    _check_nondegenerate(e1, i)
    if i is not None and np.ndim(i) == 0:
        xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
        k = xs.shape[0]
        out = _kernels.q_poly(xs, *(np.repeat(c, k) for c in (e1, e2, e3, e4, cr)))
        return float(out[0]) if np.ndim(x) == 0 else out
    return _kernels.q_poly(_broadcast(x, e1.shape[0]), e1, e2, e3, e4, cr)


def prepivot_cdf(x, eta: EtaCoefficients, i=None, clamp=True):
    """Corrected prepivot ``2 Phi(x) - 1 + 2 q(x) phi(x) / N``.

    The result is clamped into ``[EPS_CLIP, 1 - EPS_CLIP]`` unless
    ``clamp=False``.  Roots are absolute values, so ``x < 0`` is rejected.
    """
    xs = np.asarray(x, dtype=np.float64)
    if np.any(xs < 0) or not np.all(np.isfinite(xs)):
        raise ValidationError("prepivot_cdf is defined for finite x >= 0 only")
    q = q_polynomial(xs, eta, i)
    val = 2.0 * ndtr(xs) - 1.0 + 2.0 * q * norm_pdf(xs) / eta.N
    if clamp:
        val = np.clip(val, EPS_CLIP, 1.0 - EPS_CLIP)
    return float(val) if np.ndim(val) == 0 else val


def prepivot_tail(x, eta: EtaCoefficients):
    """Clamped upper tails ``1 - J_i(x_i)`` for every variable at its own root.

    Working with the complement keeps full relative precision when the
    prepivot is within a few ulps of one.
    """
    _check_nondegenerate(eta.eta1, None)
    return _kernels.prepivot_tails(
        _broadcast(x, eta.p), eta.eta1, eta.eta2, eta.eta3, eta.eta4, eta.cross_term, eta.N
    )


def nonmonotone_points(grid, eta: EtaCoefficients, i):
    """Grid points where the clamped prepivot of variable ``i`` decreases.

    Returns the right-hand abscissae of every decreasing step, which is empty
    when the approximation is nondecreasing on ``grid``.
    """
    grid = np.sort(np.asarray(grid, dtype=np.float64))
    vals = prepivot_cdf(grid, eta, i)
    return grid[1:][np.diff(vals) < 0]
