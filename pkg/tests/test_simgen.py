import numpy as np
import pytest

from oracles import fgn_entry
from prepr import simgen
from prepr.errors import ValidationError
from prepr.simgen import (
    CovarianceModel,
    SignalSpec,
    build_covariance,
    ma10_coefficients,
    replicate_rng,
    sample_population,
    signal_vector,
)


def test_compound_symmetry():
    cov, _ = build_covariance(CovarianceModel("M3", rho=0.0), 4)
    np.testing.assert_array_equal(cov, np.eye(4))
    cov, _ = build_covariance(CovarianceModel("M3", rho=0.4), 3)
    np.testing.assert_array_equal(cov, [[1, 0.4, 0.4], [0.4, 1, 0.4], [0.4, 0.4, 1]])


def test_long_range_matches_direct_formula():
    cov, factor = build_covariance(CovarianceModel("M2", hurst=0.625), 5)
    want = [[fgn_entry(i - j, 0.625) for j in range(5)] for i in range(5)]
    np.testing.assert_allclose(cov, want, rtol=1e-14)
    np.testing.assert_allclose(factor @ factor.T, cov, atol=1e-13)


def test_scaled_models_use_frozen_diagonal():
    d = simgen.scale_diagonal(20230501, 6)
    assert np.all((d > 1) & (d < 5))
    cov4, _ = build_covariance(CovarianceModel("M4"), 6)
    cov5, _ = build_covariance(CovarianceModel("M5"), 6)
    np.testing.assert_allclose(np.diag(cov4), d, rtol=1e-14)
    np.testing.assert_allclose(np.diag(cov5), d, rtol=1e-14)
    assert cov4[0, 2] == pytest.approx(np.sqrt(d[0] * d[2]) * 0.5 * 2.0 ** -5, rel=1e-14)


def test_literal_polynomial_decay_is_not_positive_definite():
    bad = CovarianceModel("M4", decay_exponent=2.5, decay_scale=1.0)
    with pytest.raises(ValidationError, match="not positive definite"):
        build_covariance(bad, 200)


def test_covariance_outputs_are_read_only():
    cov, factor = build_covariance(CovarianceModel("M2"), 10)
    with pytest.raises(ValueError):
        cov[0, 0] = 2.0
    assert not factor.flags.writeable


@pytest.mark.slow
def test_every_model_factorizes_on_paper_grid():
    try:
        for p in (200, 1000, 3000):
            for kind in ("M1", "M2", "M3", "M4", "M5"):
                cov, factor = build_covariance(CovarianceModel(kind), p)
                assert np.all(np.isfinite(factor))
                assert np.all(np.diag(factor) > 0)
    finally:
        build_covariance.cache_clear()


def test_model_validation():
    with pytest.raises(ValidationError):
        CovarianceModel("M9")
    with pytest.raises(ValidationError):
        CovarianceModel("M3", rho=1.0)
    with pytest.raises(ValidationError):
        CovarianceModel("M2", hurst=0.5)
    assert CovarianceModel("MA10").label == "M1"


def test_ma10_coefficients():
    raw = ma10_coefficients(7, normalize=False)
    assert raw.shape == (10,) and np.all((raw > 2) & (raw < 3))
    coef = ma10_coefficients(7)
    assert np.linalg.norm(coef) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(coef, ma10_coefficients(7))
    cov, _ = build_covariance(CovarianceModel("M1", ma_seed=7), 30)
    np.testing.assert_allclose(np.diag(cov), 1.0, atol=1e-12)
    assert np.all(cov[0, 10:] == 0)


def test_ma_filter_realises_band_covariance():
    model = CovarianceModel("M1")
    x = sample_population(20000, 40, model, rng=1)
    emp = np.cov(x, rowvar=False, bias=True)
    cov, _ = build_covariance(model, 40)
    se = 1.0 / np.sqrt(20000)
    for k in range(14):
        lag = np.mean(np.diag(emp, k))
        assert lag == pytest.approx(cov[0, k], abs=4 * se)


def test_identity_columns_have_unit_variance():
    x = sample_population(10_000, 3, CovarianceModel("M3", rho=0.0), rng=2)
    se = np.sqrt(2.0 / 10_000)
    assert np.all(np.abs(x.var(axis=0) - 1) < 3 * se)


def test_centered_gamma_innovations():
    z = simgen.innovations(np.random.default_rng(3), 400_000, "CenteredGamma")
    assert abs(z.mean()) < 4 / np.sqrt(400_000)
    assert z.var() == pytest.approx(1.0, abs=0.02)
    assert np.mean(z**3) == pytest.approx(np.sqrt(2.0), abs=0.1)
    with pytest.raises(ValidationError):
        simgen.innovations(np.random.default_rng(0), 3, "Cauchy")


def test_monte_carlo_covariance_for_scaled_decay():
    model = CovarianceModel("M4")
    x = sample_population(100_000, 50, model, "Normal", rng=4)
    cov, _ = build_covariance(model, 50)
    emp = np.cov(x, rowvar=False)
    # variances reach 5, so raw entries get max(0.02, 4 SE) (4 SE covers the
    # ~1300 distinct entries); correlations are unit scale and get 0.02 flat
    se = np.sqrt((cov**2 + np.outer(np.diag(cov), np.diag(cov))) / 100_000)
    assert np.all(np.abs(emp - cov) <= np.maximum(0.02, 4 * se))
    sd_e, sd_t = np.sqrt(np.diag(emp)), np.sqrt(np.diag(cov))
    corr_e = emp / np.outer(sd_e, sd_e)
    corr_t = cov / np.outer(sd_t, sd_t)
    assert np.abs(corr_e - corr_t).max() < 0.02


def test_mean_vector_is_added():
    mu = np.arange(5.0)
    x = sample_population(3, 5, CovarianceModel("M2"), mu=mu, rng=replicate_rng(0, 0))
    y = sample_population(3, 5, CovarianceModel("M2"), rng=replicate_rng(0, 0))
    np.testing.assert_allclose(x - y, np.tile(mu, (3, 1)))
    with pytest.raises(ValidationError, match="shape"):
        sample_population(3, 5, CovarianceModel("M2"), mu=np.zeros(4), rng=0)


def test_replicate_streams_are_deterministic_and_distinct():
    a = sample_population(4, 6, CovarianceModel("M5"), rng=replicate_rng(11, 3))
    b = sample_population(4, 6, CovarianceModel("M5"), rng=replicate_rng(11, 3))
    c = sample_population(4, 6, CovarianceModel("M5"), rng=replicate_rng(11, 4))
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_signal_vector():
    np.testing.assert_array_equal(signal_vector(SignalSpec(200)), np.zeros(200))
    mu = signal_vector(SignalSpec(200, 0.01, 0.9))
    np.testing.assert_allclose(mu[:2], [0.45, 0.9])
    assert np.all(mu[2:] == 0)
    mu = signal_vector(SignalSpec(1000, 0.03, 1.5))
    block = mu[:30]
    assert block[-1] == 1.5 and np.all(np.diff(block) > 0)
    with pytest.raises(ValidationError, match="rounds to zero"):
        signal_vector(SignalSpec(100, 0.001, 0.9))
