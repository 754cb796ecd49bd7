"""Seeded generators for the simulation populations.

Dependence models
-----------------
M1  ``MA10``              moving average of order 10 along the variables
M2  ``LongRange``         fractional-Gaussian-noise autocovariance, Hurst H
M3  ``CompoundSymmetry``  ``(1 - rho) I + rho J``
M4  ``PolyDecayScaled``   ``D^1/2 S D^1/2`` with ``S_ij = |i - j|^-5 / 2``
M5  ``LongRangeScaled``   ``D^1/2 S D^1/2`` with ``S`` the M2 matrix

``D`` is a diagonal of Uniform(1, 5) variances drawn once from the model's
``scale_seed``; the M1 filter coefficients are drawn once from ``ma_seed``.

Random streams are counter based: replicate ``k`` of an experiment with
master seed ``s`` always gets ``Philox(SeedSequence(s, spawn_key=(k,)))``,
so replicates may run in any order on any worker.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import ValidationError

KINDS = ("MA10", "LongRange", "CompoundSymmetry", "PolyDecayScaled", "LongRangeScaled")
ALIASES = dict(zip(("M1", "M2", "M3", "M4", "M5"), KINDS))
SCENARIOS = ("Normal", "CenteredGamma")
MA_ORDER = 10


def replicate_rng(seed, index):
    """Independent counter-based generator for replicate ``index`` of ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def _stream(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


@dataclass(frozen=True)
class CovarianceModel:
    kind: str = "MA10"
    rho: float = 0.4
    hurst: float = 0.625
    decay_exponent: float = 5.0
    decay_scale: float = 0.5
    scale_seed: int = 20230501
    ma_seed: int = 20230502

    def __post_init__(self):
        kind = ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValidationError(f"unknown covariance model {self.kind!r}; choose from {KINDS} or M1-M5")
        object.__setattr__(self, "kind", kind)
        if not 0.0 <= self.rho < 1.0:
            raise ValidationError(f"rho must lie in [0, 1), got {self.rho}")
        if not 0.5 < self.hurst < 1.0:
            raise ValidationError(f"hurst must lie in (0.5, 1), got {self.hurst}")

    @property
    def label(self):
        return {v: k for k, v in ALIASES.items()}[self.kind]


@dataclass(frozen=True)
class SignalSpec:
    p: int
    r: float = 0.0
    delta: float = 0.0

    @property
    def k(self):
        return int(round(self.p * self.r))


def ma10_coefficients(seed, normalize=True):
    """Ten Uniform(2, 3) filter weights, scaled to unit Euclidean norm."""
    raw = _stream(seed).uniform(2.0, 3.0, MA_ORDER)
    return raw / np.linalg.norm(raw) if normalize else raw


def scale_diagonal(seed, p):
    """Frozen Uniform(1, 5) variances for the scaled models."""
    return _stream(seed).uniform(1.0, 5.0, p)


def fgn_autocovariance(lags, hurst):
    """Autocovariance of unit-variance fractional Gaussian noise at integer lags."""
    d = np.abs(np.asarray(lags, dtype=np.float64))
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(d + 1.0) ** h2 - 2.0 * d**h2 + np.abs(d - 1.0) ** h2)


def _toeplitz(first_col):
    p = first_col.shape[0]
    idx = np.abs(np.arange(p)[:, None] - np.arange(p)[None, :])
    return first_col[idx]


def _covariance_matrix(model, p):
    lags = np.arange(p, dtype=np.float64)
    if model.kind == "MA10":
        coef = ma10_coefficients(model.ma_seed)
        band = np.zeros(p)
        for h in range(min(MA_ORDER, p)):
            band[h] = coef[: MA_ORDER - h] @ coef[h:]
        return _toeplitz(band)
    if model.kind == "CompoundSymmetry":
        return (1.0 - model.rho) * np.eye(p) + model.rho * np.ones((p, p))
    if model.kind in ("LongRange", "LongRangeScaled"):
        base = _toeplitz(fgn_autocovariance(lags, model.hurst))
    else:
        col = np.ones(p)
        col[1:] = model.decay_scale * lags[1:] ** (-model.decay_exponent)
        base = _toeplitz(col)
    if model.kind == "LongRange":
        return base
    sd = np.sqrt(scale_diagonal(model.scale_seed, p))
    return sd[:, None] * base * sd[None, :]


@lru_cache(maxsize=32)
def build_covariance(model: CovarianceModel, p: int):
    """Covariance matrix of ``model`` in dimension ``p`` and its Cholesky factor.

    For M1 the matrix is the band covariance implied by the filter; sampling
    uses the filter directly.  Results are cached per ``(model, p)`` and the
    returned arrays are read-only.
    """
    if p < 1:
        raise ValidationError(f"p must be positive, got {p}")
    cov = _covariance_matrix(model, int(p))
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValidationError(f"{model.kind} covariance with p={p} is not positive definite") from exc
    cov.setflags(write=False)
    factor.setflags(write=False)
    return cov, factor


def innovations(rng, shape, scenario):
    """Unit-variance, mean-zero i.i.d. innovations."""
    if scenario == "Normal":
        return rng.standard_normal(shape)
    if scenario == "CenteredGamma":
        return (rng.standard_gamma(2.0, shape) - 2.0) / np.sqrt(2.0)
    raise ValidationError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")


def sample_population(n, p, model: CovarianceModel, scenario="Normal", mu=None, rng=None):
    """Draw an ``n x p`` sample with the model's dependence and mean ``mu``.

    ``rng`` is a ``numpy.random.Generator`` or an int seed.
    """
    if not isinstance(rng, np.random.Generator):
        rng = _stream(0 if rng is None else rng)
    if model.kind == "MA10":
        z = innovations(rng, (n, p + MA_ORDER - 1), scenario)
        x = _kernels.ma_filter(z, ma10_coefficients(model.ma_seed))
    else:
        _, factor = build_covariance(model, p)
        x = innovations(rng, (n, p), scenario) @ factor.T
    if mu is not None:
        mu = np.asarray(mu, dtype=np.float64)
        if mu.shape != (p,):
            raise ValidationError(f"mean vector has shape {mu.shape}, expected ({p},)")
        x += mu
    return x


def signal_vector(spec: SignalSpec):
    """Sparse mean vector: ``k = round(p r)`` increasing entries ending at ``delta``, then zeros."""
    mu = np.zeros(spec.p)
    if spec.delta == 0.0:
        return mu
    k = spec.k
    if k < 1:
        raise ValidationError(f"p * r = {spec.p * spec.r:g} rounds to zero signal entries")
    if k > spec.p:
        raise ValidationError("signal fraction r must be at most 1")
    mu[:k] = spec.delta * np.arange(1, k + 1) / k
    return mu
