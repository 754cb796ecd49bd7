"""Prepivot-based max-type test for equality of two high-dimensional mean vectors."""

from ._kernels import BACKEND
from .baselines import BaselineResult, bs_test, cq_test, sd_test
from .core import (
    TestResult,
    critical_value,
    limit_cdf,
    marginal_roots,
    p_value,
    prepr_statistic,
    run_test,
)
from .edgeworth import EtaCoefficients, eta_coefficients, prepivot_cdf, q_polynomial
from .errors import DegenerateVariableError, ExperimentAborted, ValidationError
from .moments import MarginalMoments, central_moments

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BaselineResult",
    "DegenerateVariableError",
    "EtaCoefficients",
    "ExperimentAborted",
    "MarginalMoments",
    "TestResult",
    "ValidationError",
    "bs_test",
    "central_moments",
    "cq_test",
    "critical_value",
    "eta_coefficients",
    "limit_cdf",
    "marginal_roots",
    "p_value",
    "prepivot_cdf",
    "prepr_statistic",
    "q_polynomial",
    "run_test",
    "sd_test",
]
