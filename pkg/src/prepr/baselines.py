"""Sum-of-squares two-sample mean tests used as comparators.

* BS -- Bai and Saranadasa (1996): squared distance between the sample means
  minus its null expectation, standardized with a bias-corrected estimate of
  ``tr(Sigma^2)`` from the pooled covariance (divisor ``N - 2``).
* CQ -- Chen and Qin (2010): the same distance with the within-sample
  diagonal terms removed, standardized with leave-out U-statistic estimates
  of ``tr(Sigma_1^2)``, ``tr(Sigma_2^2)`` and ``tr(Sigma_1 Sigma_2)``.
* SD -- Srivastava and Du (2008): Hotelling-type form with the pooled
  covariance replaced by its diagonal, standardized through ``tr(R^2)`` of
  the pooled correlation matrix.

All three use upper-tail standard normal p-values.  Traces are computed
from ``N x N`` Gram matrices, so the cost is ``O(N^2 p)``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateVariableError, ValidationError
from .moments import as_sample_matrix

METHODS = ("BS", "SD", "CQ")


@dataclass
class BaselineResult:
    method: str
    statistic: float
    p_value: float
    alpha: float
    reject: bool

    def to_dict(self):
        return {
            "method": self.method,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "reject": self.reject,
        }


def _result(method, z, alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    pval = float(ndtr(-z))
    return BaselineResult(method, float(z), pval, alpha, pval < alpha)


def _pair(X, Y, min_rows=2):
    x = as_sample_matrix(X, "X", min_rows=min_rows)
    y = as_sample_matrix(Y, "Y", min_rows=min_rows)
    if x.shape[1] != y.shape[1]:
        raise ValidationError(f"dimension mismatch: X has {x.shape[1]} variables, Y has {y.shape[1]}")
    return x, y


def _pooled_centered(x, y):
    return np.vstack([x - x.mean(axis=0), y - y.mean(axis=0)])


def bs_statistic(X, Y):
    x, y = _pair(X, Y)
    n, m = x.shape[0], y.shape[0]
    if n + m <= 4:
        raise ValidationError(f"BS needs n + m > 4, got {n + m}")
    dof = n + m - 2
    tau = (n + m) / (n * m)
    c = _pooled_centered(x, y)
    gram = c @ c.T
    tr_s = np.trace(gram) / dof
    tr_s2 = np.sum(gram * gram) / dof**2
    b2 = dof**2 / ((dof + 2) * (dof - 1)) * (tr_s2 - tr_s**2 / dof)
    diff = x.mean(axis=0) - y.mean(axis=0)
    num = diff @ diff - tau * tr_s
    return num / (tau * math.sqrt(2.0 * (dof + 1) / dof * b2))


def bs_test(X, Y, alpha=0.05):
    """Bai-Saranadasa test (assumes a common covariance matrix)."""
    return _result("BS", bs_statistic(X, Y), alpha)


def cq_statistic(X, Y):
    x, y = _pair(X, Y, min_rows=4)
    n, m = x.shape[0], y.shape[0]
    gx = x @ x.T
    gy = y @ y.T
    gxy = x @ y.T

    def within(g, k):
        return (g.sum() - np.trace(g)) / (k * (k - 1))

    t_n = within(gx, n) + within(gy, m) - 2.0 * gxy.sum() / (n * m)

    def trace_sq(g, k):
        # a[j, l] = X_j' (X_l - mean of the sample without j and l)
        rows = g.sum(axis=1)
        d = np.diag(g)
        a = g - (rows[:, None] - d[:, None] - g) / (k - 2)
        prod = a * a.T
        return (prod.sum() - np.trace(prod)) / (k * (k - 1))

    # b[l, k] = X_l' (Y_k - Ybar without k);  c[l, k] = Y_k' (X_l - Xbar without l)
    b = gxy - (gxy.sum(axis=1)[:, None] - gxy) / (m - 1)
    c = gxy - (gxy.sum(axis=0)[None, :] - gxy) / (n - 1)
    tr_12 = np.sum(b * c) / (n * m)

    var = (
        2.0 / (n * (n - 1)) * trace_sq(gx, n)
        + 2.0 / (m * (m - 1)) * trace_sq(gy, m)
        + 4.0 / (n * m) * tr_12
    )
    if var <= 0.0:
        raise ValidationError("CQ variance estimate is not positive")
    return t_n / math.sqrt(var)


def cq_test(X, Y, alpha=0.05):
    """Chen-Qin test (no equal-covariance assumption); needs four rows per group."""
    return _result("CQ", cq_statistic(X, Y), alpha)


def sd_statistic(X, Y, permissive=False):
    x, y = _pair(X, Y)
    n, m = x.shape[0], y.shape[0]
    big_n = n + m
    if big_n < 5:
        raise ValidationError(f"SD needs n + m >= 5, got {big_n}")
    dof = big_n - 2
    c = _pooled_centered(x, y)
    diag = np.einsum("ij,ij->j", c, c) / dof
    bad = diag <= 0.0
    if bad.any():
        if not permissive:
            raise DegenerateVariableError(np.flatnonzero(bad), "zero pooled variance")
        warnings.warn(f"SD: dropping {int(bad.sum())} zero-variance variable(s)", RuntimeWarning, stacklevel=2)
        keep = ~bad
        x, y, c, diag = x[:, keep], y[:, keep], c[:, keep], diag[keep]
    p = diag.shape[0]
    if p < 1:
        raise ValidationError("SD: no usable variables")
    z = c / np.sqrt(diag)
    gram = z @ z.T
    tr_r2 = np.sum(gram * gram) / dof**2
    diff = x.mean(axis=0) - y.mean(axis=0)
    quad = (n * m / big_n) * np.sum(diff * diff / diag)
    c_pn = 1.0 + tr_r2 / p**1.5
    num = quad - dof * p / (dof - 2)
    return num / math.sqrt(2.0 * (tr_r2 - p * p / dof) * c_pn)


def sd_test(X, Y, alpha=0.05, permissive=False):
    """Srivastava-Du test (diagonal of the pooled covariance in place of its inverse)."""
    return _result("SD", sd_statistic(X, Y, permissive), alpha)
