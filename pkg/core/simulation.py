"""
Simulation Module

Monte Carlo harness for the size and power of the symmetry tests and for
calibration of the asymptotic LR p-values.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy import stats

from .angles import AngleSample
from .distributions.base_distribution import CircularDistribution
from .distributions.ksine import KSineModel
from .distributions.nnts import NntsModel, SymmetricNntsModel, is_reflective_symmetric
from .estimation import FitOptions
from .exceptions import DomainError, NntsError, SimulationAbortedError
from .inference import (SAMPLES_PER_ORDER, TestKind, b2_test_bootstrap, lr_test_asymptotic,
                        lr_test_bootstrap, wald_test, warn_small_sample)
from .rng import RngStream
from .workers import map_indexed

MAX_FAILURE_FRACTION = 0.05
BAND_LEVEL = 0.99
DEFAULT_ALPHAS = (0.10, 0.05, 0.01)
DEFAULT_BOOTSTRAP_K = 199


@dataclass(frozen=True)
class TestConfig:
    """One test to run on every simulated dataset."""
    __test__ = False

    kind: TestKind
    m: Optional[int] = None
    k_replicates: Optional[int] = None

    @property
    def label(self) -> str:
        return self.kind.value if self.m is None else f"{self.kind.value}[m={self.m}]"

    @property
    def is_bootstrap(self) -> bool:
        return self.kind in (TestKind.LR_BOOTSTRAP, TestKind.B2_BOOTSTRAP)


@dataclass(frozen=True)
class GeneratorSpec:
    """A data-generating model with an identifier and an optional default test order."""

    id: str
    model: CircularDistribution
    test_m: Optional[int] = None

    @property
    def symmetric(self) -> bool:
        """Whether the generator satisfies the null hypothesis."""
        if isinstance(self.model, SymmetricNntsModel):
            return True
        if isinstance(self.model, NntsModel):
            return is_reflective_symmetric(self.model) is not None
        if isinstance(self.model, KSineModel):
            return self.model.lam == 0.0
        return False

    def order_for(self, config: TestConfig) -> int:
        if config.m is not None:
            return config.m
        if self.test_m is not None:
            return self.test_m
        order = getattr(self.model, "m", None)
        if order is None or order < 2:
            raise DomainError(
                f"Generator {self.id!r} needs test_m (or the test needs m) to run {config.kind.value}"
            )
        return order


@dataclass(frozen=True)
class ExperimentSpec:
    """Grid of generators, sample sizes and tests."""

    generators: Tuple[GeneratorSpec, ...]
    sample_sizes: Tuple[int, ...]
    tests: Tuple[TestConfig, ...]
    n_datasets: int = 100
    alphas: Tuple[float, ...] = DEFAULT_ALPHAS
    master_seed: int = 0
    fit_options: FitOptions = field(default_factory=FitOptions)

    def __post_init__(self):
        if not self.generators:
            raise DomainError("An experiment needs at least one generator")
        if not self.tests:
            raise DomainError("An experiment needs at least one test")
        if not self.sample_sizes or min(self.sample_sizes) < 1:
            raise DomainError("Sample sizes must be positive")
        if self.n_datasets < 1:
            raise DomainError(f"n_datasets must be at least 1, got {self.n_datasets}")
        if not self.alphas or any(not 0.0 < a < 1.0 for a in self.alphas):
            raise DomainError("Significance levels must lie in (0, 1)")
        ids = [g.id for g in self.generators]
        if len(set(ids)) != len(ids):
            raise DomainError("Generator ids must be unique")


@dataclass(frozen=True)
class RejectionRow:
    """Rejection count and rate for one (generator, test, n, alpha) cell."""

    generator_id: str
    test: str
    n: int
    alpha: float
    count: int
    rate: float
    n_valid: int
    band_low: float
    band_high: float
    in_band: Optional[bool]
    p_values: Tuple[float, ...] = field(default=(), repr=False)


@dataclass
class RejectionTable:
    """Rows of an experiment plus failure counts per (generator, n) cell."""

    rows: List[RejectionRow]
    n_datasets: int
    failures: Dict[str, int] = field(default_factory=dict)

    def cell(self, generator_id: str, test: str, n: int, alpha: float) -> RejectionRow:
        for row in self.rows:
            if (row.generator_id, row.test, row.n) == (generator_id, test, n) and np.isclose(row.alpha, alpha):
                return row
        raise KeyError(f"No cell for {generator_id}/{test}/n={n}/alpha={alpha}")

    def to_frame(self) -> pd.DataFrame:
        """Table without the per-dataset p-values."""
        columns = ["generator_id", "test", "n", "alpha", "count", "rate", "n_valid",
                   "band_low", "band_high", "in_band"]
        return pd.DataFrame([{c: getattr(row, c) for c in columns} for row in self.rows],
                            columns=columns)


def binomial_band(alpha: float, n_datasets: int, level: float = BAND_LEVEL) -> Tuple[float, float]:
    """
    Central binomial acceptance band for an empirical rejection rate.

    Args:
        alpha: Nominal level
        n_datasets: Number of datasets behind the rate
        level: Coverage of the band

    Returns:
        (low, high) rates
    """
    if n_datasets < 1:
        raise DomainError(f"n_datasets must be at least 1, got {n_datasets}")
    low, high = stats.binom.interval(level, n_datasets, alpha)
    return float(low) / n_datasets, float(high) / n_datasets


def run_test(config: TestConfig, generator: GeneratorSpec, sample: AngleSample, seed: int,
             opts: FitOptions) -> float:
    """Run one configured test on one dataset and return its p-value."""
    k = config.k_replicates or DEFAULT_BOOTSTRAP_K
    if config.kind is TestKind.B2_BOOTSTRAP:
        return b2_test_bootstrap(sample, k, seed, max_workers=1).p_value

    m = generator.order_for(config)
    if config.kind is TestKind.LR_ASYMPTOTIC:
        return lr_test_asymptotic(sample, m, opts, warn=False).p_value
    if config.kind is TestKind.LR_BOOTSTRAP:
        return lr_test_bootstrap(sample, m, k, seed, opts, max_workers=1).p_value
    return wald_test(sample, m, opts).p_value


def _dataset_p_values(spec: ExperimentSpec, generator: GeneratorSpec, n: int,
                      stream: RngStream) -> Optional[List[float]]:
    try:
        sample = generator.model.sample(n, stream.spawn(0))
        return [
            run_test(config, generator, sample, stream.spawn(1 + index).derived_seed(), spec.fit_options)
            for index, config in enumerate(spec.tests)
        ]
    except (NntsError, FloatingPointError, np.linalg.LinAlgError) as exc:
        logger.warning(f"Dataset for {generator.id} at n={n} failed: {exc}")
        return None


def run_experiment(spec: ExperimentSpec, max_workers: Optional[int] = None) -> RejectionTable:
    """
    Estimate rejection rates over the generator x sample-size grid.

    Dataset d of generator g at size index s is drawn from the stream
    RngStream(master_seed).spawn(g).spawn(s).spawn(d), so every p-value is
    reproducible independently of scheduling.

    Args:
        spec: Experiment specification
        max_workers: Worker threads over datasets (default: NNTS_THREADS)

    Returns:
        RejectionTable with one row per (generator, test, n, alpha)

    Raises:
        SimulationAbortedError: if more than 5% of the datasets of a cell fail
    """
    root = RngStream(spec.master_seed)
    rows: List[RejectionRow] = []
    failures: Dict[str, int] = {}

    for g_index, generator in enumerate(spec.generators):
        for s_index, n in enumerate(spec.sample_sizes):
            for config in spec.tests:
                if config.kind is not TestKind.B2_BOOTSTRAP:
                    m = generator.order_for(config)
                    if n < SAMPLES_PER_ORDER * m:
                        logger.warning(
                            f"{generator.id}: n={n} is below {SAMPLES_PER_ORDER}*M={SAMPLES_PER_ORDER * m} "
                            f"for {config.label}"
                        )

            cell_stream = root.spawn(g_index).spawn(s_index)
            logger.info(f"Simulating {spec.n_datasets} datasets for {generator.id} at n={n}")
            outcomes = map_indexed(
                lambda d: _dataset_p_values(spec, generator, n, cell_stream.spawn(d)),
                spec.n_datasets,
                max_workers,
            )

            failed = sum(1 for outcome in outcomes if outcome is None)
            failures[f"{generator.id}/n={n}"] = failed
            if failed > MAX_FAILURE_FRACTION * spec.n_datasets:
                raise SimulationAbortedError(
                    f"{failed} of {spec.n_datasets} datasets failed for {generator.id} at n={n}"
                )
            if failed:
                logger.warning(f"{failed} datasets excluded for {generator.id} at n={n}")

            valid = [outcome for outcome in outcomes if outcome is not None]
            for t_index, config in enumerate(spec.tests):
                p_values = np.array([outcome[t_index] for outcome in valid])
                for alpha in spec.alphas:
                    count = int(np.sum(p_values <= alpha))
                    rate = count / p_values.size if p_values.size else 0.0
                    low, high = binomial_band(alpha, max(p_values.size, 1))
                    in_band = (low <= rate <= high) if generator.symmetric else None
                    rows.append(RejectionRow(
                        generator_id=generator.id,
                        test=config.label,
                        n=n,
                        alpha=alpha,
                        count=count,
                        rate=rate,
                        n_valid=int(p_values.size),
                        band_low=low,
                        band_high=high,
                        in_band=in_band,
                        p_values=tuple(float(p) for p in p_values),
                    ))

    return RejectionTable(rows=rows, n_datasets=spec.n_datasets, failures=failures)


@dataclass(frozen=True)
class UniformityReport:
    """Kolmogorov-Smirnov check of p-values against Uniform(0, 1)."""

    ks_statistic: float
    ks_p_value: float
    n: int
    m: int
    n_datasets: int
    small_sample: bool
    rejection_rates: Dict[float, float]
    p_values: Tuple[float, ...] = field(default=(), repr=False)
    test: TestKind = TestKind.LR_ASYMPTOTIC


def pvalue_uniformity(generator: SymmetricNntsModel, n: int, n_datasets: int, m: int,
                      seed: int = 0, opts: Optional[FitOptions] = None,
                      alphas: Sequence[float] = DEFAULT_ALPHAS,
                      max_workers: Optional[int] = None,
                      test: TestKind = TestKind.LR_ASYMPTOTIC) -> UniformityReport:
    """
    Calibration of a chi-squared symmetry test under a symmetric generator.

    Args:
        generator: Symmetric model satisfying the null hypothesis
        n: Sample size per dataset
        n_datasets: Number of simulated datasets
        m: Test order
        seed: Master seed; dataset d uses RngStream(seed).spawn(d)
        opts: Optimizer settings
        alphas: Levels at which rejection rates are reported
        max_workers: Worker threads
        test: TestKind.LR_ASYMPTOTIC or TestKind.WALD

    Returns:
        UniformityReport with the KS distance and its p-value
    """
    if test not in (TestKind.LR_ASYMPTOTIC, TestKind.WALD):
        raise DomainError(f"No chi-squared reference for {test.value}")
    if n_datasets < 1:
        raise DomainError(f"n_datasets must be at least 1, got {n_datasets}")
    opts = opts or FitOptions()
    small_sample = warn_small_sample(n, m)
    root = RngStream(seed)

    def one_dataset(index: int) -> float:
        sample = generator.sample(n, root.spawn(index))
        if test is TestKind.WALD:
            return wald_test(sample, m, opts).p_value
        return lr_test_asymptotic(sample, m, opts, warn=False).p_value

    p_values = np.array(map_indexed(one_dataset, n_datasets, max_workers))
    result = stats.kstest(p_values, "uniform")
    rates = {float(alpha): float(np.mean(p_values <= alpha)) for alpha in alphas}
    logger.info(
        f"{test.value} p-value uniformity at n={n}, M={m}: "
        f"KS={result.statistic:.4f} (p={result.pvalue:.4f})"
    )
    return UniformityReport(
        ks_statistic=float(result.statistic),
        ks_p_value=float(result.pvalue),
        n=n,
        m=m,
        n_datasets=n_datasets,
        small_sample=small_sample,
        rejection_rates=rates,
        p_values=tuple(float(p) for p in p_values),
        test=test,
    )
