"""
K-Sine Distribution Module

Skew-perturbed von Mises densities

    f(theta) = f0(theta - mu) * [1 + lambda * sin(k* (theta - mu))]

used as non-NNTS alternatives when studying the power of symmetry tests.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ..angles import TWO_PI, reduce_angles
from ..exceptions import DomainError, ModelValidationError
from .base_distribution import ArrayLike, CircularDistribution, as_angle_array, restore_shape


def bessel_i0(x: ArrayLike) -> ArrayLike:
    """Modified Bessel function of the first kind, order zero."""
    values = np.asarray(x, dtype=float)
    if np.any(values < 0.0):
        raise DomainError("bessel_i0 is only used for nonnegative arguments")
    result = special.i0(values)
    return float(result) if np.ndim(x) == 0 else result


@dataclass(frozen=True)
class VonMisesBase:
    """Von Mises base density centred at zero."""

    kappa: float = 1.0
    family: str = field(default="von_mises", init=False)

    def __post_init__(self):
        if not np.isfinite(self.kappa) or self.kappa < 0.0:
            raise ModelValidationError(f"kappa must be finite and nonnegative, got {self.kappa}")

    def density(self, x: np.ndarray) -> np.ndarray:
        # i0e keeps large kappa from overflowing.
        return np.exp(self.kappa * (np.cos(x) - 1.0)) / (TWO_PI * special.i0e(self.kappa))

    def max_density(self) -> float:
        return float(1.0 / (TWO_PI * special.i0e(self.kappa)))


@dataclass(frozen=True)
class KSineModel(CircularDistribution):
    """
    Von Mises density skewed by a k*-th order sine perturbation.

    lambda = 0 gives back the symmetric base density.
    """

    mu: float
    lam: float
    k_star: int
    base: VonMisesBase = field(default_factory=VonMisesBase)

    def __post_init__(self):
        if not np.isfinite(self.mu):
            raise ModelValidationError("mu must be finite")
        if not -1.0 <= self.lam <= 1.0:
            raise ModelValidationError(f"lambda must lie in [-1, 1], got {self.lam}")
        if int(self.k_star) != self.k_star or self.k_star < 1:
            raise ModelValidationError(f"k_star must be a positive integer, got {self.k_star}")
        object.__setattr__(self, "mu", float(reduce_angles(self.mu)))
        object.__setattr__(self, "k_star", int(self.k_star))

    @property
    def family(self) -> str:
        return "ksine"

    def density(self, theta: ArrayLike) -> ArrayLike:
        values, scalar = as_angle_array(theta)
        shifted = values - self.mu
        dens = self.base.density(shifted) * (1.0 + self.lam * np.sin(self.k_star * shifted))
        return restore_shape(dens, scalar)

    def envelope(self) -> float:
        return (1.0 + abs(self.lam)) * self.base.max_density()
