"""The PREPR max-type two-sample mean test.

Each variable contributes a studentized absolute mean difference (its root),
mapped through its Edgeworth-corrected prepivot.  The largest prepivot is
sent through the standard normal quantile, squared and recentred; under the
null this statistic has a type I extreme value limit law.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .edgeworth import eta_coefficients, prepivot_tail
from .errors import AsymptoticRegimeWarning, DegenerateVariableError, ValidationError
from .moments import MarginalMoments, as_sample_matrix, central_moments

_LIMIT_SCALE = 1.0 / (2.0 * math.sqrt(math.pi))
_LOG_2_SQRT_PI = math.log(2.0 * math.sqrt(math.pi))


def limit_cdf(x):
    """Limit null CDF ``exp(-exp(-x / 2) / (2 sqrt(pi)))`` of the statistic."""
    x = np.asarray(x, dtype=np.float64)
    out = np.exp(-_LIMIT_SCALE * np.exp(-0.5 * x))
    return float(out) if out.ndim == 0 else out


def p_value(t):
    """Upper-tail p-value ``1 - limit_cdf(t)``, computed without cancellation."""
    t = np.asarray(t, dtype=np.float64)
    out = -np.expm1(-_LIMIT_SCALE * np.exp(-0.5 * t))
    return float(out) if out.ndim == 0 else out


def critical_value(alpha):
    """Level-``alpha`` rejection threshold ``-2 log(2 sqrt(pi)) - 2 log log(1/(1-alpha))``."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    return -2.0 * _LOG_2_SQRT_PI - 2.0 * math.log(-math.log1p(-alpha))


def recentre(z_max, p):
    """Square the (positive part of the) largest normal score and recentre by ``p``.

    The square is monotone in the largest prepivot only on the upper half;
    below ``1/2`` the score is floored at zero so that small prepivots can
    never produce a large statistic.
    """
    z = max(float(z_max), 0.0)
    return z * z - 2.0 * math.log(p) + math.log(math.log(p))


def _check_pair(X, Y):
    x = as_sample_matrix(X, "X")
    y = as_sample_matrix(Y, "Y")
    if x.shape[1] != y.shape[1]:
        raise ValidationError(f"dimension mismatch: X has {x.shape[1]} variables, Y has {y.shape[1]}")
    return x, y


def _degenerate_mask(mom_x: MarginalMoments, mom_y: MarginalMoments, permissive):
    se2 = mom_x.variance / mom_x.n + mom_y.variance / mom_y.n
    bad = se2 <= 0.0
    if bad.any():
        idx = np.flatnonzero(bad)
        if not permissive:
            raise DegenerateVariableError(idx)
        warnings.warn(
            f"dropping {idx.size} variable(s) with zero variance in both samples",
            RuntimeWarning,
            stacklevel=3,
        )
    return ~bad, se2


def marginal_roots(X, Y, permissive=False):
    """Studentized absolute mean differences, one per variable.

    Uses divisor-``n`` variances.  In permissive mode, variables with zero
    variance in both samples get ``nan`` instead of raising.
    """
    x, y = _check_pair(X, Y)
    mx, my = central_moments(x), central_moments(y)
    keep, se2 = _degenerate_mask(mx, my, permissive)
    roots = np.full(x.shape[1], np.nan)
    roots[keep] = np.abs(mx.mean[keep] - my.mean[keep]) / np.sqrt(se2[keep])
    return roots


@dataclass
class TestResult:
    """Outcome of one PREPR test."""

    __test__ = False  # keep pytest from collecting this class

    statistic: float
    p_value: float
    alpha: float
    reject: bool
    critical_value: float
    roots: np.ndarray
    prepivots: np.ndarray
    argmax_variable: int
    n: int
    m: int
    p: int
    dropped_variables: list = field(default_factory=list)

    def to_dict(self, with_arrays=False):
        out = {
            "method": "PREPR",
            "statistic": self.statistic,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "reject": self.reject,
            "critical_value": self.critical_value,
            "argmax_variable": self.argmax_variable,
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "dropped_variables": list(self.dropped_variables),
        }
        if with_arrays:
            out["roots"] = [None if np.isnan(v) else float(v) for v in self.roots]
            out["prepivots"] = [None if np.isnan(v) else float(v) for v in self.prepivots]
        return out


def _evaluate(X, Y, permissive):
    x, y = _check_pair(X, Y)
    n, m = x.shape[0], y.shape[0]
    mom_x, mom_y = central_moments(x), central_moments(y)
    keep, se2 = _degenerate_mask(mom_x, mom_y, permissive)
    kept = np.flatnonzero(keep)
    p_eff = kept.size
    if p_eff < 2:
        raise ValidationError(f"need at least 2 usable variables, got {p_eff}")
    if math.log(p_eff) >= (n + m) ** 2 / 10.0:
        warnings.warn(
            f"log(p)={math.log(p_eff):.3g} is large relative to N^2={(n + m) ** 2}; "
            "the extreme value calibration may be unreliable",
            AsymptoticRegimeWarning,
            stacklevel=3,
        )
    if p_eff < x.shape[1]:
        mom_x, mom_y, se2 = mom_x.subset(keep), mom_y.subset(keep), se2[keep]
    roots = np.abs(mom_x.mean - mom_y.mean) / np.sqrt(se2)
    eta = eta_coefficients(mom_x, mom_y, n, m)
    tails = prepivot_tail(roots, eta)
    j = int(np.argmin(tails))  # first minimum: ties go to the lowest index
    z_max = -float(ndtri(tails[j]))
    return {
        "n": n,
        "m": m,
        "p_total": x.shape[1],
        "kept": kept,
        "roots": roots,
        "tails": tails,
        "argmax": int(kept[j]),
        "statistic": recentre(z_max, p_eff),
    }


def prepr_statistic(X, Y, permissive=False):
    """The recentred max-prepivot statistic for samples ``X`` (n x p) and ``Y`` (m x p)."""
    return _evaluate(X, Y, permissive)["statistic"]


def run_test(X, Y, alpha=0.05, permissive=False):
    """Run the PREPR test at level ``alpha`` and collect diagnostics.

    Parameters
    ----------
    X, Y : array_like
        Samples with subjects in rows and the same variables in columns.
    alpha : float
        Significance level in (0, 1).
    permissive : bool
        Drop variables that are constant in both samples (with a warning)
        instead of raising :class:`DegenerateVariableError`.

    Returns
    -------
    TestResult
    """
    crit = critical_value(alpha)
    ev = _evaluate(X, Y, permissive)
    p_total = ev["p_total"]
    roots = np.full(p_total, np.nan)
    prepivots = np.full(p_total, np.nan)
    roots[ev["kept"]] = ev["roots"]
    prepivots[ev["kept"]] = 1.0 - ev["tails"]
    stat = ev["statistic"]
    pval = p_value(stat)
    dropped = np.setdiff1d(np.arange(p_total), ev["kept"]).tolist()
    return TestResult(
        statistic=stat,
        p_value=pval,
        alpha=float(alpha),
        reject=bool(stat > crit),
        critical_value=crit,
        roots=roots,
        prepivots=prepivots,
        argmax_variable=ev["argmax"],
        n=ev["n"],
        m=ev["m"],
        p=len(ev["kept"]),
        dropped_variables=dropped,
    )
