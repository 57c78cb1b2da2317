"""
Tests for Inference

Unit tests for the symmetry statistics and tests.
"""

import numpy as np
import pytest
from scipy import integrate

from core.angles import TWO_PI, AngleSample
from core.distributions import (ComplexCoefficients, KSineModel, NntsModel, SymmetricNntsModel,
                                minimum_phase, random_nnts_model)
from core.estimation import FitOptions, FitReport, fit_pair
from core.exceptions import DegenerateSampleError, DomainError, OptimizerInconsistencyError
from core.inference import (TestKind, _bootstrap_null, b2_statistic, b2_test_bootstrap,
                            bootstrap_p_value, chisq_sf, lr_statistic, lr_test_asymptotic,
                            lr_test_bootstrap, sample_skewness, sk_from_fits, sk_nnts,
                            wald_quadratic_form, wald_statistic, wald_test)
from core.rng import RngStream


def _report(family: str, loglik: float, m: int = 4, n: int = 100, digest: str = "abc") -> FitReport:
    return FitReport(family=family, m=m, n=n, model=None, loglik=loglik, n_params=0,
                     aic=0.0, bic=0.0, iterations=0, grad_norm=0.0, converged=True,
                     data_digest=digest)


def test_lr_statistic_from_loglik_values():
    """LR is twice the log-likelihood gap."""
    general = _report("general", -129.32)
    symmetric = _report("symmetric", -130.29)

    assert lr_statistic(general, symmetric) == pytest.approx(1.94, abs=1e-9)
    assert lr_statistic(_report("general", -915.32, m=5), _report("symmetric", -919.86, m=5)) == \
        pytest.approx(9.08, abs=1e-9)


def test_lr_statistic_equal_logliks():
    """Equal log-likelihoods give LR = 0."""
    assert lr_statistic(_report("general", -50.0), _report("symmetric", -50.0)) == 0.0


def test_lr_noise_clamps_to_zero():
    """Tiny negative gaps clamp to zero."""
    assert lr_statistic(_report("general", -50.0), _report("symmetric", -50.0 + 2e-7)) == 0.0


def test_lr_inconsistency_raises():
    """A symmetric fit clearly above the general one is an error."""
    with pytest.raises(OptimizerInconsistencyError):
        lr_statistic(_report("general", -50.0), _report("symmetric", -49.0))


def test_lr_mismatches_raise():
    """Fits of different orders or data are not compared, and M = 1 is refused."""
    with pytest.raises(DomainError):
        lr_statistic(_report("general", -50.0, m=3), _report("symmetric", -51.0, m=4))
    with pytest.raises(DomainError):
        lr_statistic(_report("general", -50.0), _report("symmetric", -51.0, digest="other"))
    with pytest.raises(DomainError, match="symmetric by definition"):
        lr_statistic(_report("general", -50.0, m=1), _report("symmetric", -51.0, m=1))


def test_chisq_sf_values():
    """Chi-squared upper tail probabilities."""
    assert chisq_sf(0.0, 3) == 1.0
    assert chisq_sf(1.937, 3) == pytest.approx(0.585, abs=1e-3)
    assert chisq_sf(9.082, 4) == pytest.approx(0.059, abs=1e-3)
    # df = 2 has the closed form exp(-x/2).
    assert chisq_sf(3.3, 2) == pytest.approx(np.exp(-1.65), abs=1e-14)


def test_chisq_sf_domain():
    """Negative statistics and zero degrees of freedom are rejected."""
    with pytest.raises(DomainError):
        chisq_sf(-1.0, 2)
    with pytest.raises(DomainError):
        chisq_sf(1.0, 0)


def test_wald_zero_for_real_coefficients():
    """Real coefficients at mu = 0 give W = 0."""
    coeffs = ComplexCoefficients(np.array([0.6, 0.48, 0.64], dtype=complex))

    assert wald_statistic(coeffs, 0.0, 100) == pytest.approx(0.0, abs=1e-12)


def test_wald_closed_form_matches_quadratic_form():
    """The closed form and the quadratic form agree on random inputs."""
    root = RngStream(21)
    for index in range(100):
        generator = root.spawn(index).generator()
        model = random_nnts_model(int(generator.integers(1, 8)), generator)
        mu = generator.uniform(0, TWO_PI)
        n = int(generator.integers(10, 2000))

        closed = wald_statistic(model.coeffs, mu, n)
        quadratic = wald_quadratic_form(model.coeffs, mu, n)
        assert closed == pytest.approx(quadratic, abs=1e-8 * n)
        assert 0.0 <= sk_nnts(model.coeffs, mu) <= 1.0
        assert sk_nnts(model.coeffs, mu) == pytest.approx(closed / n, abs=1e-12)


def test_sk_zero_for_symmetric_model():
    """SK vanishes for a symmetric model."""
    model = SymmetricNntsModel([0.6, 0.48, 0.64], 1.1)

    assert sk_nnts(model.to_general().coeffs, model.mu, model.signs) == pytest.approx(0.0, abs=1e-10)


def test_sk_zero_for_mixed_sign_symmetric_model():
    """SK vanishes when rho has mixed signs and they are supplied."""
    model = SymmetricNntsModel([0.6, 0.48, -0.64], 1.1)

    assert sk_nnts(model.to_general().coeffs, model.mu, model.signs) == pytest.approx(0.0, abs=1e-10)


def test_sk_positive_for_skewed_model(skewed_m3):
    """SK is positive for a skewed model."""
    assert sk_nnts(skewed_m3.coeffs, 0.3) > 0.0


def test_sample_skewness_cancels():
    """Equally spaced and mirrored angles have zero skewness."""
    four = AngleSample.from_values([0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert sample_skewness(four) == pytest.approx(0.0, abs=1e-12)

    offsets = np.array([0.1, 0.5, 1.2, 2.0])
    mirrored = AngleSample.from_values(np.concatenate([1.0 + offsets, 1.0 - offsets]))
    assert sample_skewness(mirrored) == pytest.approx(0.0, abs=1e-12)


def test_sample_skewness_degenerate():
    """Coincident angles have undefined skewness."""
    with pytest.raises(DegenerateSampleError):
        sample_skewness(AngleSample.from_values([0.5, 0.5, 0.5]))
    with pytest.raises(DomainError):
        sample_skewness(AngleSample.from_values([0.5]))


def _population_skewness(model) -> float:
    moments = []
    for p in (1, 2):
        re, _ = integrate.quad(lambda t: np.cos(p * t) * model.density(t), 0, TWO_PI)
        im, _ = integrate.quad(lambda t: np.sin(p * t) * model.density(t), 0, TWO_PI)
        moments.append(complex(re, im))
    r1, r2 = abs(moments[0]), abs(moments[1])
    return r2 * np.sin(np.angle(moments[1]) - 2 * np.angle(moments[0])) / (1 - r1) ** 1.5


def test_ksine_sample_skewness():
    """k-sine draws are skewed in the expected direction."""
    model = KSineModel(mu=0.0, lam=0.6, k_star=3)
    estimate = sample_skewness(model.sample(1000, RngStream(22)))

    assert 0.15 < abs(estimate) < 0.5
    assert np.sign(estimate) == np.sign(_population_skewness(model))


def test_ksine_k2_skewness_positive():
    """A k* = 2 k-sine sample has positive skewness."""
    model = KSineModel(mu=0.0, lam=0.6, k_star=2)

    assert sample_skewness(model.sample(100_000, RngStream(23))) > 0.0


def test_b2_symmetric_cases():
    """Symmetric configurations give b2 = 0."""
    pair = AngleSample.from_values([1.0 + 0.4, 1.0 - 0.4])
    assert b2_statistic(pair) == pytest.approx(0.0, abs=1e-12)

    offsets = np.array([0.2, 0.7, 1.5])
    mirrored = AngleSample.from_values(np.concatenate([3.0 + offsets, 3.0 - offsets]))
    assert b2_statistic(mirrored) == pytest.approx(0.0, abs=1e-12)


def test_b2_rotation_invariant(skewed_m3):
    """b2 does not change when the data are rotated."""
    data = skewed_m3.sample(200, RngStream(24))

    for delta in (0.3, 2.0, 5.5):
        assert b2_statistic(data.rotated(delta)) == pytest.approx(b2_statistic(data), abs=1e-12)


def test_b2_degenerate():
    """b2 needs a defined mean direction."""
    with pytest.raises(DegenerateSampleError):
        b2_statistic(AngleSample.from_values([0.0, np.pi]))


def test_bootstrap_p_value_formula():
    """p = (1 + exceedances) / (K + 1)."""
    assert bootstrap_p_value(5.0, [1.0, 2.0, 6.0, np.inf]) == pytest.approx(3 / 5)
    assert bootstrap_p_value(10.0, [1.0] * 999) == pytest.approx(0.001)


def test_b2_bootstrap_deterministic(skewed_m3):
    """A fixed seed gives the same p-value with any worker count."""
    data = skewed_m3.sample(60, RngStream(25))
    first = b2_test_bootstrap(data, k=199, seed=7)
    second = b2_test_bootstrap(data, k=199, seed=7)
    threaded = b2_test_bootstrap(data, k=199, seed=7, max_workers=4)

    assert first == second
    assert first.p_value == threaded.p_value
    assert first.test is TestKind.B2_BOOTSTRAP
    assert first.k_replicates == 199
    assert 1 / 200 <= first.p_value <= 1.0


def test_b2_bootstrap_detects_strong_skew():
    """b2 rejects at 5% on at least 8 of 10 strongly skewed datasets of 500."""
    model = KSineModel(mu=0.0, lam=0.6, k_star=2)
    root = RngStream(26)
    p_values = [
        b2_test_bootstrap(model.sample(500, root.spawn(index)), k=199, seed=index).p_value
        for index in range(10)
    ]

    assert sum(p <= 0.05 for p in p_values) >= 8


def test_bootstrap_requires_replicates(skewed_m3):
    """Fewer than 99 replicates are rejected."""
    data = skewed_m3.sample(30, RngStream(27))

    with pytest.raises(DomainError):
        b2_test_bootstrap(data, k=50)
    with pytest.raises(DomainError):
        lr_test_bootstrap(data, 2, k=50)


def test_lr_asymptotic_result_fields(skewed_m3, fast_options):
    """The asymptotic LR result carries df, order and axis."""
    data = skewed_m3.sample(200, RngStream(28))
    result = lr_test_asymptotic(data, 3, fast_options)

    assert result.test is TestKind.LR_ASYMPTOTIC
    assert result.df == 2
    assert result.k_replicates is None
    assert 0.0 <= result.p_value <= 1.0
    assert result.p_value == pytest.approx(chisq_sf(result.statistic, 2))
    assert 0.0 <= result.mu_hat < np.pi


def test_lr_asymptotic_rejects_order_one(skewed_m3):
    """Symmetry tests need M >= 2."""
    data = skewed_m3.sample(50, RngStream(29))

    with pytest.raises(DomainError, match="symmetric by definition"):
        lr_test_asymptotic(data, 1)


def test_lr_asymptotic_small_sample_warning(skewed_m3, fast_options, mocker):
    """n < 25M logs a warning."""
    logger = mocker.patch("core.inference.logger")
    data = skewed_m3.sample(40, RngStream(30))

    lr_test_asymptotic(data, 3, fast_options)

    assert logger.warning.called
    assert "bootstrap" in logger.warning.call_args[0][0]


def test_lr_detects_skewed_model(skewed_m3, fast_options):
    """500 draws from a skewed model are rejected."""
    data = skewed_m3.sample(500, RngStream(31))

    assert lr_test_asymptotic(data, 3, fast_options).p_value < 0.01


def test_lr_bootstrap_deterministic(symmetric_m2, fast_options):
    """A fixed seed gives the same bootstrap p-value with any worker count."""
    data = symmetric_m2.sample(50, RngStream(32))
    first = lr_test_bootstrap(data, 2, k=99, seed=11, opts=fast_options)
    second = lr_test_bootstrap(data, 2, k=99, seed=11, opts=fast_options, max_workers=4)

    assert first.p_value == second.p_value
    assert first.statistic == second.statistic
    assert first.test is TestKind.LR_BOOTSTRAP
    assert first.df is None
    assert first.p_value >= 1 / 100


def test_lr_bootstrap_rotation(symmetric_m2):
    """Rotating the data keeps LR, shifts the axis by the rotation and keeps the p-value."""
    options = FitOptions(n_restarts=1, mu_grid_points=128)
    data = symmetric_m2.sample(50, RngStream(33))
    plain = lr_test_bootstrap(data, 2, k=99, seed=5, opts=options)
    rotated = lr_test_bootstrap(data.rotated(1.7), 2, k=99, seed=5, opts=options)

    assert rotated.statistic == pytest.approx(plain.statistic, abs=1e-3)
    shift = np.angle(np.exp(2j * (rotated.mu_hat - plain.mu_hat - 1.7))) / 2
    assert abs(shift) < 1e-3
    assert abs(rotated.p_value - plain.p_value) <= 2 / 100


def test_bootstrap_null_orientation():
    """Both sign patterns of one fitted density give the same bootstrap null model."""
    rho = np.array([0.6, -0.48, 0.64])
    flipped = rho * np.array([1.0, -1.0, 1.0])
    first = _bootstrap_null(rho)
    second = _bootstrap_null(flipped)

    assert first == second
    assert first.mu == 0.0
    assert np.dot(first.rho[:-1], first.rho[1:]) >= 0.0


def test_lr_bootstrap_failed_replicates_count_as_exceedances(symmetric_m2, fast_options, mocker):
    """Replicates that cannot be fitted count against the null."""
    data = symmetric_m2.sample(60, RngStream(34))
    fits = fit_pair(data, 2, fast_options)
    mocker.patch("core.inference.fit_pair", side_effect=DomainError("no fit"))

    result = lr_test_bootstrap(data, 2, k=99, seed=1, opts=fast_options, fits=fits)

    assert result.failed_replicates == 99
    assert result.p_value == 1.0


def test_wald_test_uses_chi_squared(skewed_m3, fast_options):
    """The Wald p-value uses chi-squared with M - 1 degrees of freedom."""
    data = skewed_m3.sample(300, RngStream(35))
    fits = fit_pair(data, 3, fast_options)
    result = wald_test(data, 3, fast_options, fits=fits)

    assert result.test is TestKind.WALD
    assert result.df == 2
    assert result.statistic == pytest.approx(data.n * sk_from_fits(*fits))
    assert result.p_value == pytest.approx(chisq_sf(result.statistic, 2))


def test_result_dict_is_json_ready(skewed_m3):
    """Result dictionaries hold plain JSON values."""
    data = skewed_m3.sample(40, RngStream(36))
    record = b2_test_bootstrap(data, k=99, seed=2).to_dict()

    assert record["test"] == "b2_bootstrap"
    assert record["seed"] == 2
    assert set(record) >= {"statistic", "p_value", "df", "k_replicates", "m", "mu_hat"}


def test_symmetric_fit_sk_is_zero_when_general_is_symmetric():
    """At M = 1 the general fit is symmetric and SK is zero."""
    model = NntsModel.from_values([0.8, 0.6 * np.exp(-0.9j)])
    data = model.sample(200, RngStream(37))
    general, symmetric = fit_pair(data, 1)

    assert sk_from_fits(general, symmetric) == pytest.approx(0.0, abs=1e-6)


def test_sk_zero_after_collapsing_root_flips():
    """A symmetric density stored with one complex root flipped has SK 0 in minimum-phase form."""
    rho = np.real(np.poly([2.0, 0.5 + 0.5j, 0.5 - 0.5j])[::-1])
    symmetric = SymmetricNntsModel.normalized(rho, 0.0)
    flipped = ComplexCoefficients.normalized(
        np.poly([2.0, 1.0 / np.conj(0.5 + 0.5j), 0.5 - 0.5j])[::-1]
    )
    grid = np.linspace(0, TWO_PI, 97)
    np.testing.assert_allclose(NntsModel(flipped).density(grid), symmetric.density(grid), atol=1e-10)
    assert sk_nnts(flipped, 0.0) > 1e-4

    canonical = ComplexCoefficients.normalized(minimum_phase(flipped.values))
    np.testing.assert_allclose(canonical.values.imag, 0.0, atol=1e-12)
    signs = np.sign(canonical.values.real)
    assert sk_nnts(canonical, 0.0, signs) == pytest.approx(0.0, abs=1e-10)
