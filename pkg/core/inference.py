"""
Inference Module

Tests of reflective symmetry: likelihood ratio (asymptotic chi-squared and
parametric bootstrap), Wald, the SK_NNTS skewness measure, the b2 bootstrap
test and the sample circular skewness coefficient.
"""

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy import special

from .angles import RESULTANT_EPS, AngleSample
from .distributions.nnts import ComplexCoefficients, NntsModel, SymmetricNntsModel
from .estimation import FitOptions, FitReport, fit_pair
from .exceptions import (DegenerateSampleError, DomainError, NntsError,
                         OptimizerInconsistencyError)
from .rng import RngStream
from .workers import map_indexed

# Raw LR values in (-LR_NOISE, 0) are optimizer noise and clamp to zero.
LR_NOISE = 1e-6

MIN_REPLICATES = 99
MAX_REPLICATE_RETRIES = 3

# Recommended minimum sample size per unit of M for the chi-squared reference.
SAMPLES_PER_ORDER = 25

CoefficientsLike = Union[ComplexCoefficients, NntsModel, np.ndarray, Sequence[complex]]
FitPair = Tuple[FitReport, FitReport]


class TestKind(str, Enum):
    """Available symmetry tests."""
    __test__ = False

    LR_ASYMPTOTIC = "lr_asymptotic"
    LR_BOOTSTRAP = "lr_bootstrap"
    WALD = "wald"
    B2_BOOTSTRAP = "b2_bootstrap"


@dataclass(frozen=True)
class TestResult:
    """Outcome of one symmetry test."""
    __test__ = False

    test: TestKind
    statistic: float
    p_value: float
    n: int
    df: Optional[int] = None
    k_replicates: Optional[int] = None
    seed: Optional[int] = None
    m: Optional[int] = None
    mu_hat: Optional[float] = None
    failed_replicates: int = 0

    def to_dict(self) -> Dict[str, Any]:
        record = asdict(self)
        record["test"] = self.test.value
        return record


def chisq_sf(x: float, df: int) -> float:
    """
    Upper tail P(X > x) of a chi-squared variable with df degrees of freedom.

    Evaluated as the regularized upper incomplete gamma Q(df/2, x/2).
    """
    if df < 1:
        raise DomainError(f"Degrees of freedom must be positive, got {df}")
    if np.isnan(x) or x < 0:
        raise DomainError(f"chisq_sf needs x >= 0, got {x}")
    return float(special.gammaincc(0.5 * df, 0.5 * x))


def check_order(m: int):
    """Raise DomainError unless m >= 2."""
    if m == 1:
        raise DomainError("M=1 NNTS models are symmetric by definition; there is nothing to test")
    if m < 2:
        raise DomainError(f"Symmetry tests need M >= 2, got {m}")


def _check_replicates(k: int):
    if k < MIN_REPLICATES:
        raise DomainError(f"Bootstrap tests need at least {MIN_REPLICATES} replicates, got {k}")


def warn_small_sample(n: int, m: int) -> bool:
    """Log a warning when n < 25*M; returns whether it fired."""
    if n < SAMPLES_PER_ORDER * m:
        logger.warning(
            f"Sample size n={n} is below {SAMPLES_PER_ORDER}*M={SAMPLES_PER_ORDER * m}; "
            f"the chi-squared reference may be inaccurate, prefer the bootstrap LR test"
        )
        return True
    return False


def lr_statistic(general: FitReport, symmetric: FitReport) -> float:
    """
    Likelihood ratio statistic LR = -2 * (l_S - l_G).

    Args:
        general: General fit
        symmetric: Symmetric fit on the same data and order

    Returns:
        Nonnegative statistic

    Raises:
        DomainError: if the fits do not match or M < 2
        OptimizerInconsistencyError: if l_S exceeds l_G by more than optimizer noise
    """
    if general.family != "general" or symmetric.family != "symmetric":
        raise DomainError("lr_statistic needs a general fit and a symmetric fit")
    if general.m != symmetric.m:
        raise DomainError(f"Fits have different orders: M={general.m} vs M={symmetric.m}")
    if general.data_digest != symmetric.data_digest or general.n != symmetric.n:
        raise DomainError("Fits were computed on different data")
    check_order(general.m)

    raw = -2.0 * (symmetric.loglik - general.loglik)
    if raw < -LR_NOISE:
        raise OptimizerInconsistencyError(
            f"Symmetric log-likelihood {symmetric.loglik:.8f} exceeds general "
            f"{general.loglik:.8f} at M={general.m}"
        )
    return max(0.0, raw)


def _fits(data: AngleSample, m: int, opts: FitOptions, fits: Optional[FitPair]) -> FitPair:
    if fits is not None:
        return fits
    return fit_pair(data, m, opts)


def lr_test_asymptotic(data: AngleSample, m: int, opts: Optional[FitOptions] = None,
                       fits: Optional[FitPair] = None, warn: bool = True) -> TestResult:
    """
    LR test with the chi-squared(M-1) reference.

    Args:
        data: Angle sample
        m: NNTS order, m >= 2
        opts: Optimizer settings
        fits: Precomputed (general, symmetric) fits on data
        warn: Emit the small-sample warning

    Returns:
        TestResult with df = M - 1
    """
    check_order(m)
    opts = opts or FitOptions()
    if warn:
        warn_small_sample(data.n, m)

    general, symmetric = _fits(data, m, opts, fits)
    statistic = lr_statistic(general, symmetric)
    return TestResult(
        test=TestKind.LR_ASYMPTOTIC,
        statistic=statistic,
        p_value=chisq_sf(statistic, m - 1),
        n=data.n,
        df=m - 1,
        m=m,
        mu_hat=symmetric.mu_hat,
    )


def bootstrap_p_value(observed: float, replicates: Sequence[float]) -> float:
    """(1 + #{replicate >= observed}) / (K + 1)."""
    exceed = int(np.sum(np.asarray(replicates, dtype=float) >= observed))
    return (1 + exceed) / (len(replicates) + 1)


def _bootstrap_null(rho: np.ndarray) -> SymmetricNntsModel:
    """
    Fitted symmetric model centred at mu = 0 for bootstrap draws.

    (rho, mu) and ((-1)^k rho, mu + pi) describe the same fitted density, so
    centring it at 0 leaves two models half a turn apart. The one whose first
    trigonometric moment sum_k rho_k rho_{k+1} is nonnegative is used, so
    replicate draws do not depend on how the data are rotated.
    """
    rho = np.asarray(rho, dtype=float)
    if np.dot(rho[:-1], rho[1:]) < 0.0:
        rho = rho * (-1.0) ** np.arange(rho.size)
    return SymmetricNntsModel(rho, 0.0)


def lr_test_bootstrap(data: AngleSample, m: int, k: int = 999, seed: int = 0,
                      opts: Optional[FitOptions] = None, fits: Optional[FitPair] = None,
                      max_workers: Optional[int] = None) -> TestResult:
    """
    Parametric bootstrap LR test.

    Replicates of size n are drawn from the fitted symmetric model, centred
    at mu = 0, and both models are refitted on each. Replicate i uses the
    stream RngStream(seed).spawn(i), so the p-value does not depend on the
    number of workers.

    Args:
        data: Angle sample
        m: NNTS order, m >= 2
        k: Number of replicates, k >= 99
        seed: Master seed
        opts: Optimizer settings
        fits: Precomputed (general, symmetric) fits on data
        max_workers: Worker threads (default: NNTS_THREADS)

    Returns:
        TestResult with k_replicates and seed set
    """
    check_order(m)
    _check_replicates(k)
    opts = opts or FitOptions()

    general, symmetric = _fits(data, m, opts, fits)
    observed = lr_statistic(general, symmetric)
    null_model = _bootstrap_null(symmetric.model.rho)
    root = RngStream(seed)

    def replicate(index: int) -> float:
        stream = root.spawn(index)
        for attempt in range(MAX_REPLICATE_RETRIES + 1):
            try:
                sample = null_model.sample(data.n, stream.spawn(attempt))
                return lr_statistic(*fit_pair(sample, m, opts))
            except NntsError as exc:
                logger.warning(f"Bootstrap replicate {index} attempt {attempt} failed: {exc}")
        return math.inf

    statistics = map_indexed(replicate, k, max_workers)
    failed = sum(1 for value in statistics if value == math.inf)
    if failed:
        logger.warning(f"{failed} of {k} bootstrap replicates failed and count as exceedances")

    return TestResult(
        test=TestKind.LR_BOOTSTRAP,
        statistic=observed,
        p_value=bootstrap_p_value(observed, statistics),
        n=data.n,
        k_replicates=k,
        seed=seed,
        m=m,
        mu_hat=symmetric.mu_hat,
        failed_replicates=failed,
    )


def _coefficient_values(coeffs: CoefficientsLike) -> np.ndarray:
    if isinstance(coeffs, NntsModel):
        return coeffs.coeffs.values
    if isinstance(coeffs, ComplexCoefficients):
        return coeffs.values
    return ComplexCoefficients(coeffs).values


def _symmetric_projection(values: np.ndarray, mu_hat: float,
                          signs: Optional[Sequence[float]]) -> np.ndarray:
    """c_S,k = s_k * |c_G,k| * exp(-i*k*mu_hat) with s_k = +1 unless given."""
    ks = np.arange(values.size)
    weights = np.abs(values) if signs is None else np.asarray(signs, dtype=float) * np.abs(values)
    return weights * np.exp(-1j * ks * mu_hat)


def wald_statistic(general_coeffs: CoefficientsLike, mu_hat: float, n: int,
                   signs: Optional[Sequence[float]] = None) -> float:
    """
    Wald statistic W = n * (1 - |c_G^H c_S|^2).

    Args:
        general_coeffs: Fitted general coefficients c_G
        mu_hat: Axis from the symmetric fit
        n: Sample size
        signs: Optional signs of the fitted symmetric rho (all +1 by default)

    Returns:
        Statistic in [0, n]
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    values = _coefficient_values(general_coeffs)
    inner = np.vdot(values, _symmetric_projection(values, mu_hat, signs))
    return float(n * np.clip(1.0 - abs(inner) ** 2, 0.0, 1.0))


def wald_quadratic_form(general_coeffs: CoefficientsLike, mu_hat: float, n: int,
                        signs: Optional[Sequence[float]] = None) -> float:
    """
    Wald statistic as d^H H d with d = c_G - c_S and H = n * (I - c_G c_G^H).

    Algebraically equal to wald_statistic; kept as an independent check.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    values = _coefficient_values(general_coeffs)
    diff = values - _symmetric_projection(values, mu_hat, signs)
    hessian = n * (np.eye(values.size) - np.outer(values, np.conj(values)))
    return float(np.real(np.conj(diff) @ hessian @ diff))


def sk_nnts(general_coeffs: CoefficientsLike, mu_hat: float,
            signs: Optional[Sequence[float]] = None) -> float:
    """Skewness measure SK_NNTS = W / n = 1 - |c_G^H c_S|^2, in [0, 1]."""
    return wald_statistic(general_coeffs, mu_hat, 1, signs)


def sk_from_fits(general: FitReport, symmetric: FitReport) -> float:
    """SK_NNTS from a fitted pair, using the axis and rho signs of the symmetric fit."""
    model = symmetric.model
    return sk_nnts(general.model.coeffs, model.mu, model.signs)


def wald_test(data: AngleSample, m: int, opts: Optional[FitOptions] = None,
              fits: Optional[FitPair] = None) -> TestResult:
    """Wald test of symmetry with the chi-squared(M-1) reference."""
    check_order(m)
    opts = opts or FitOptions()
    general, symmetric = _fits(data, m, opts, fits)
    statistic = data.n * sk_from_fits(general, symmetric)
    return TestResult(
        test=TestKind.WALD,
        statistic=statistic,
        p_value=chisq_sf(statistic, m - 1),
        n=data.n,
        df=m - 1,
        m=m,
        mu_hat=symmetric.mu_hat,
    )


def sample_skewness(data: AngleSample) -> float:
    """
    Sample circular skewness R2 * sin(theta2 - 2*theta1) / (1 - R1)^(3/2).

    Raises:
        DegenerateSampleError: if all observations coincide (R1 = 1)
    """
    if data.n < 2:
        raise DomainError("Sample skewness needs at least two observations")
    first = data.trig_moment(1)
    second = data.trig_moment(2)
    r1 = abs(first)
    if r1 >= 1.0 - RESULTANT_EPS:
        raise DegenerateSampleError("Sample skewness is undefined when all angles coincide")
    theta1 = np.angle(first) if r1 > 0 else 0.0
    theta2 = np.angle(second) if abs(second) > 0 else 0.0
    return float(abs(second) * np.sin(theta2 - 2.0 * theta1) / (1.0 - r1) ** 1.5)


def _centred(data: AngleSample) -> np.ndarray:
    """Angles relative to the sample mean direction, in (-pi, pi]."""
    return np.angle(np.exp(1j * (data.angles - data.mean_direction())))


def b2_statistic(data: AngleSample) -> float:
    """
    b2 = (1/n) * sum sin(2 * (theta_j - mean direction)).

    Raises:
        DegenerateSampleError: if the mean direction is undefined
    """
    if data.n < 2:
        raise DomainError("b2 needs at least two observations")
    return float(np.mean(np.sin(2.0 * _centred(data))))


def b2_test_bootstrap(data: AngleSample, k: int = 999, seed: int = 0,
                      max_workers: Optional[int] = None) -> TestResult:
    """
    Two-sided bootstrap test on b2.

    Replicates resample n angles with replacement from the sample
    symmetrised about its mean direction (the centred angles and their
    reflections, 2n values).
    """
    _check_replicates(k)
    observed = b2_statistic(data)
    centred = _centred(data)
    pool = np.concatenate([centred, -centred])
    root = RngStream(seed)

    def replicate(index: int) -> float:
        generator = root.spawn(index).generator()
        draw = pool[generator.integers(0, pool.size, size=data.n)]
        try:
            return abs(b2_statistic(AngleSample.from_values(draw)))
        except DegenerateSampleError:
            return math.inf

    statistics = map_indexed(replicate, k, max_workers)
    failed = sum(1 for value in statistics if value == math.inf)

    return TestResult(
        test=TestKind.B2_BOOTSTRAP,
        statistic=observed,
        p_value=bootstrap_p_value(abs(observed), statistics),
        n=data.n,
        k_replicates=k,
        seed=seed,
        failed_replicates=failed,
    )
