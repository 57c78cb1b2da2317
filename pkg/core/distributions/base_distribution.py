"""
Base Distribution Class

Abstract base class for circular densities on [0, 2*pi).

Subclasses provide the density and a constant envelope; the base class turns
those into log-likelihoods, a tabulated CDF and two exact samplers
(uniform-proposal rejection and CDF inversion).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple, Union

import numpy as np
from loguru import logger
from scipy.integrate import cumulative_trapezoid

from ..angles import TWO_PI, AngleSample
from ..exceptions import DomainError, EnvelopeViolationError
from ..rng import RngStream

ArrayLike = Union[float, np.ndarray]

# Densities below this count as zero when taking logs.
DENSITY_FLOOR = 1e-300

# Relative slack allowed between a density value and its envelope (roundoff).
ENVELOPE_RTOL = 1e-9

CDF_TABLE_POINTS = 2 ** 16 + 1
INVERSION_TOL = 1e-12


@dataclass(frozen=True)
class RejectionStats:
    """Bookkeeping for one rejection-sampling run."""
    proposals: int
    accepted: int
    envelope: float

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else 0.0

    @property
    def expected_rate(self) -> float:
        """Acceptance probability for uniform proposals and unit mass."""
        return 1.0 / (TWO_PI * self.envelope)


def as_angle_array(theta: ArrayLike) -> Tuple[np.ndarray, bool]:
    """Return theta as a 1-d float array plus a flag telling whether it was scalar."""
    scalar = np.ndim(theta) == 0
    return np.atleast_1d(np.asarray(theta, dtype=float)), scalar


def restore_shape(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values[0]) if scalar else values


class CircularDistribution(ABC):
    """
    Abstract circular distribution.

    Every distribution must be able to evaluate its density and provide a
    constant upper bound of it; everything else has a default.
    """

    @property
    @abstractmethod
    def family(self) -> str:
        """Family tag used in model documents."""

    @abstractmethod
    def density(self, theta: ArrayLike) -> ArrayLike:
        """
        Density per radian.

        Args:
            theta: Angle or array of angles in radians

        Returns:
            Density values with the shape of theta
        """

    @abstractmethod
    def envelope(self) -> float:
        """
        Constant bound with density(theta) <= envelope() for all theta.

        Returns:
            Envelope height used by rejection sampling
        """

    @cached_property
    def _cdf_table(self) -> Tuple[np.ndarray, np.ndarray]:
        grid = np.linspace(0.0, TWO_PI, CDF_TABLE_POINTS)
        cumulative = cumulative_trapezoid(self.density(grid), grid, initial=0.0)
        return grid, cumulative

    def cdf(self, theta: ArrayLike) -> ArrayLike:
        """
        Distribution function F(theta) = P(0 <= Theta <= theta).

        The default integrates the density numerically on a fine grid;
        families with a closed form override it.

        Raises:
            DomainError: if theta lies outside [0, 2*pi]
        """
        values, scalar = as_angle_array(theta)
        check_cdf_domain(values)
        grid, cumulative = self._cdf_table
        return restore_shape(np.clip(np.interp(values, grid, cumulative), 0.0, 1.0), scalar)

    def log_likelihood(self, data: AngleSample) -> float:
        """
        Sum of log densities over the sample.

        Returns -inf when the density underflows at some observation.
        """
        dens = np.asarray(self.density(data.angles))
        if np.any(dens < DENSITY_FLOOR):
            return -np.inf
        return float(np.sum(np.log(dens)))

    def sample(self, n: int, rng: RngStream) -> AngleSample:
        """Draw n angles by rejection sampling."""
        return self.sample_with_stats(n, rng)[0]

    def sample_with_stats(self, n: int, rng: RngStream) -> Tuple[AngleSample, RejectionStats]:
        """
        Draw n angles with uniform proposals accepted at rate density/envelope.

        Args:
            n: Sample size
            rng: Random stream

        Returns:
            Tuple of (sample, rejection statistics)

        Raises:
            EnvelopeViolationError: if any proposal exceeds the envelope
        """
        if n < 1:
            raise DomainError(f"Sample size must be at least 1, got {n}")

        generator = rng.generator()
        env = self.envelope()
        expected_rate = min(1.0, 1.0 / (TWO_PI * env))

        accepted = []
        count = 0
        proposals = 0
        while count < n:
            need = n - count
            batch = max(256, int(np.ceil(1.2 * need / expected_rate)))
            theta = generator.uniform(0.0, TWO_PI, size=batch)
            heights = generator.uniform(0.0, env, size=batch)
            dens = np.asarray(self.density(theta))

            if np.any(dens > env * (1.0 + ENVELOPE_RTOL)):
                worst = float(np.max(dens))
                raise EnvelopeViolationError(
                    f"{self.family} density {worst:.6g} exceeds envelope {env:.6g}"
                )

            hits = np.flatnonzero(heights < dens)
            if hits.size >= need:
                hits = hits[:need]
                proposals += int(hits[-1]) + 1
            else:
                proposals += batch
            accepted.append(theta[hits])
            count += hits.size

        stats = RejectionStats(proposals=proposals, accepted=n, envelope=env)
        logger.debug(
            f"Drew {n} {self.family} angles from {proposals} proposals "
            f"(acceptance {stats.acceptance_rate:.3f})"
        )
        return AngleSample(np.concatenate(accepted)), stats

    def sample_by_inversion(self, n: int, rng: RngStream) -> AngleSample:
        """
        Draw n angles by bisection on the CDF (to 1e-12 radians).

        Slower than rejection; used to cross-check the rejection sampler.
        """
        if n < 1:
            raise DomainError(f"Sample size must be at least 1, got {n}")

        targets = rng.generator().uniform(0.0, 1.0, size=n)
        lower = np.zeros(n)
        upper = np.full(n, TWO_PI)
        while np.max(upper - lower) > INVERSION_TOL:
            middle = 0.5 * (lower + upper)
            below = np.asarray(self.cdf(middle)) < targets
            lower = np.where(below, middle, lower)
            upper = np.where(below, upper, middle)

        angles = 0.5 * (lower + upper)
        angles[angles >= TWO_PI] = 0.0
        return AngleSample(angles)


def check_cdf_domain(values: np.ndarray):
    """Raise DomainError unless every value lies in [0, 2*pi]."""
    if np.any(values < 0.0) or np.any(values > TWO_PI) or not np.all(np.isfinite(values)):
        raise DomainError("cdf is defined for angles in [0, 2*pi]")
