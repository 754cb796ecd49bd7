"""Per-variable plug-in sample moments (divisor n)."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ValidationError


def as_sample_matrix(data, name="data", min_rows=2):
    """Validate and return ``data`` as a C-contiguous float64 ``n x p`` array.

    A 1-d input is read as a single variable (one column).  Raises
    :class:`ValidationError` on wrong shape, too few rows, or any non-finite
    entry; the message names the first offending ``(row, column)``.
    """
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValidationError(f"{name}: expected a 2-d matrix, got {arr.ndim} dimensions")
    n, p = arr.shape
    if n < min_rows:
        raise ValidationError(f"{name}: need at least {min_rows} observations, got {n}")
    if p < 1:
        raise ValidationError(f"{name}: need at least one variable")
    finite = np.isfinite(arr)
    if not finite.all():
        row, col = np.argwhere(~finite)[0]
        raise ValidationError(
            f"{name}: non-finite entry {arr[row, col]!r} at (row {row}, column {col})"
        )
    return np.ascontiguousarray(arr)


@dataclass(frozen=True)
class MarginalMoments:
    """Plug-in moments of one sample, one entry per variable."""

    n: int
    mean: np.ndarray
    variance: np.ndarray
    third_central: np.ndarray
    excess_fourth: np.ndarray

    @property
    def p(self):
        return self.mean.shape[0]

    def subset(self, keep):
        return MarginalMoments(
            self.n,
            self.mean[keep],
            self.variance[keep],
            self.third_central[keep],
            self.excess_fourth[keep],
        )


def central_moments(data):
    """Column-wise mean and order-2/3/4 central moments with divisor ``n``.

    The fourth moment is reported in excess form ``m4 - 3 * var**2``.

    >>> m = central_moments([[1.0], [3.0]])
    >>> float(m.mean[0]), float(m.variance[0]), float(m.third_central[0])
    (2.0, 1.0, 0.0)
    """
    x = as_sample_matrix(data)
    mean, var, m3, k4 = _kernels.column_moments(x)
    return MarginalMoments(x.shape[0], mean, var, m3, k4)
