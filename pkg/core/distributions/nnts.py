"""
NNTS Distribution Module

Nonnegative trigonometric sum densities

    f(theta) = (1 / 2*pi) * |sum_{k=0}^{M} c_k exp(i*k*theta)|^2,  sum |c_k|^2 = 1,

their reflectively symmetric subfamily c_k = rho_k * exp(-i*k*mu) with real
rho, and the helpers that move between the two.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from ..angles import TWO_PI, AngleSample, reduce_angles
from ..exceptions import DomainError, ModelValidationError
from .base_distribution import (ArrayLike, CircularDistribution, as_angle_array,
                                check_cdf_domain, restore_shape)

# Coefficients with modulus below this are treated as zero when fixing gauges.
GAUGE_EPS = 1e-14

# Allowed deviation of sum |c_k|^2 from 1.
NORM_TOL = 1e-12

SYMMETRY_SEARCH_POINTS = 4096
SYMMETRY_CHECK_POINTS = 1024


def _fix_gauge(values: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the anchor coefficient is real and positive."""
    moduli = np.abs(values)
    anchors = np.flatnonzero(moduli > GAUGE_EPS)
    if anchors.size == 0:
        return values
    anchor = int(anchors[0])
    if values[anchor].imag == 0.0 and values[anchor].real > 0.0:
        return values
    rotated = values * np.exp(-1j * np.angle(values[anchor]))
    rotated[anchor] = moduli[anchor]
    return rotated


def minimum_phase(values: ArrayLike) -> np.ndarray:
    """
    Coefficients of the same density whose polynomial has no roots inside
    the unit disc.

    The density only sees |p(z)| on |z| = 1 for p(z) = sum_k c_k z^k, and
    replacing a root r of p by 1/conj(r) changes |p| there by the constant
    factor 1/|r|. Reflecting every root with |r| < 1 outward (roots at zero
    included, which shifts the coefficients down) therefore picks one
    representative per density. The result has unit norm, the input length
    and stays real for real input; its global phase is left to the caller.
    """
    values = np.asarray(values)
    real = not np.iscomplexobj(values)
    coeffs = values.astype(complex).ravel()
    nonzero = np.flatnonzero(np.abs(coeffs) > GAUGE_EPS)
    if nonzero.size == 0:
        return values.copy()
    low, high = int(nonzero[0]), int(nonzero[-1])
    core = coeffs[low:high + 1]

    result = np.zeros(coeffs.size, dtype=complex)
    if core.size == 1:
        result[0] = core[0]
    else:
        roots = np.roots(core[::-1])
        inside = np.abs(roots) < 1.0
        if low == 0 and not inside.any():
            return values / np.linalg.norm(values)
        scale = core[-1] * np.prod(np.abs(roots[inside]))
        roots = np.where(inside, 1.0 / np.conj(roots), roots)
        poly = scale * np.poly(roots)[::-1]
        result[:poly.size] = poly
    result /= np.linalg.norm(result)
    if real:
        return result.real.copy()
    return result


@dataclass(frozen=True, eq=False)
class ComplexCoefficients:
    """
    Unit-norm coefficient vector (c_0, ..., c_M) in its canonical gauge.

    The global phase is fixed so that c_0 is real and nonnegative; when c_0
    vanishes the first nonzero coefficient takes that role.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex).ravel()
        if values.size < 1:
            raise ModelValidationError("An NNTS model needs at least one coefficient")
        if not np.all(np.isfinite(values)):
            raise ModelValidationError("NNTS coefficients must be finite")
        norm_sq = float(np.sum(np.abs(values) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ModelValidationError(
                f"Coefficients violate the unit-norm constraint sum |c_k|^2 = 1 "
                f"(got {norm_sq:.15g})"
            )
        values = _fix_gauge(values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def normalized(cls, values: Sequence[complex]) -> "ComplexCoefficients":
        """Scale an arbitrary nonzero vector to unit norm and build coefficients."""
        values = np.asarray(values, dtype=complex).ravel()
        norm = np.linalg.norm(values)
        if not np.isfinite(norm) or norm == 0.0:
            raise ModelValidationError("Cannot normalize a zero coefficient vector")
        return cls(values / norm)

    @property
    def m(self) -> int:
        """Truncation order M."""
        return self.values.size - 1

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.values)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComplexCoefficients):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = object.__hash__


def _autocorrelation(values: np.ndarray) -> np.ndarray:
    """r_d = sum_l c_{l+d} * conj(c_l) for d = 0..M."""
    m = values.size - 1
    return np.array([np.sum(values[d:] * np.conj(values[:m + 1 - d])) for d in range(m + 1)])


def _harmonics(theta: np.ndarray, m: int) -> np.ndarray:
    return np.exp(1j * np.outer(theta, np.arange(m + 1)))


@dataclass(frozen=True, eq=False)
class NntsModel(CircularDistribution):
    """General NNTS density of order M."""

    coeffs: ComplexCoefficients

    @classmethod
    def from_values(cls, values: Sequence[complex], normalize: bool = False) -> "NntsModel":
        """Build a model from raw coefficients, optionally normalizing them first."""
        if normalize:
            return cls(ComplexCoefficients.normalized(values))
        return cls(ComplexCoefficients(values))

    @property
    def family(self) -> str:
        return "nnts_general"

    @property
    def m(self) -> int:
        return self.coeffs.m

    def amplitude(self, theta: ArrayLike) -> np.ndarray:
        """Complex amplitude sum c_k exp(i*k*theta)."""
        values, _ = as_angle_array(theta)
        return _harmonics(values, self.m) @ self.coeffs.values

    def density(self, theta: ArrayLike) -> ArrayLike:
        values, scalar = as_angle_array(theta)
        amp = _harmonics(values, self.m) @ self.coeffs.values
        return restore_shape((amp.real ** 2 + amp.imag ** 2) / TWO_PI, scalar)

    def envelope(self) -> float:
        return float(np.sum(self.coeffs.moduli) ** 2 / TWO_PI)

    @cached_property
    def _autocorrelation(self) -> np.ndarray:
        return _autocorrelation(self.coeffs.values)

    def cdf(self, theta: ArrayLike) -> ArrayLike:
        """
        Closed-form distribution function

            F(theta) = (1/2*pi) * [theta + 2*Re sum_{d>=1} r_d (exp(i*d*theta) - 1) / (i*d)].
        """
        values, scalar = as_angle_array(theta)
        check_cdf_domain(values)
        r = self._autocorrelation
        total = values.copy()
        if self.m > 0:
            d = np.arange(1, self.m + 1)
            terms = (np.exp(1j * np.outer(values, d)) - 1.0) / (1j * d)
            total = total + 2.0 * np.real(terms @ r[1:])
        return restore_shape(np.clip(total / TWO_PI, 0.0, 1.0), scalar)

    def trig_moment(self, p: int) -> complex:
        """
        Population trigonometric moment E[exp(i*p*Theta)].

        Args:
            p: Moment order, p >= 1

        Returns:
            sum_k c_k * conj(c_{k+p}); zero when p > M
        """
        if p < 1:
            raise DomainError(f"Moment order must be at least 1, got {p}")
        if p > self.m:
            return 0j
        return complex(np.conj(self._autocorrelation[p]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, NntsModel):
            return NotImplemented
        return self.coeffs == other.coeffs

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class SymmetricNntsModel(CircularDistribution):
    """
    Reflectively symmetric NNTS density about the axis through mu.

    (rho, mu), (-rho, mu) and ((-1)^k rho_k, mu + pi) describe the same
    density. The stored form keeps mu in [0, pi) and the first nonzero rho_k
    positive.
    """

    rho: np.ndarray
    mu: float = 0.0

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float).ravel()
        if rho.size < 1:
            raise ModelValidationError("A symmetric NNTS model needs at least one coefficient")
        if not np.all(np.isfinite(rho)) or not np.isfinite(self.mu):
            raise ModelValidationError("Symmetric NNTS parameters must be finite")
        norm_sq = float(np.sum(rho ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ModelValidationError(
                f"rho violates the unit-norm constraint sum rho_k^2 = 1 (got {norm_sq:.15g})"
            )

        mu = float(reduce_angles(self.mu))
        if mu >= np.pi:
            mu -= np.pi
            rho = rho * (-1.0) ** np.arange(rho.size)
        leading = np.flatnonzero(np.abs(rho) > GAUGE_EPS)
        if leading.size and rho[leading[0]] < 0.0:
            rho = -rho

        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def normalized(cls, rho: Sequence[float], mu: float) -> "SymmetricNntsModel":
        rho = np.asarray(rho, dtype=float).ravel()
        norm = np.linalg.norm(rho)
        if not np.isfinite(norm) or norm == 0.0:
            raise ModelValidationError("Cannot normalize a zero rho vector")
        return cls(rho / norm, mu)

    @property
    def family(self) -> str:
        return "nnts_symmetric"

    @property
    def m(self) -> int:
        return self.rho.size - 1

    @property
    def signs(self) -> np.ndarray:
        """Signs of rho with zeros counted as positive."""
        return np.where(self.rho < 0.0, -1.0, 1.0)

    @cached_property
    def _general(self) -> NntsModel:
        ks = np.arange(self.rho.size)
        return NntsModel(ComplexCoefficients(self.rho * np.exp(-1j * ks * self.mu)))

    def to_general(self) -> NntsModel:
        """The same density as a general NNTS model."""
        return self._general

    def density(self, theta: ArrayLike) -> ArrayLike:
        return self._general.density(theta)

    def cdf(self, theta: ArrayLike) -> ArrayLike:
        return self._general.cdf(theta)

    def envelope(self) -> float:
        return float(np.sum(np.abs(self.rho)) ** 2 / TWO_PI)

    def trig_moment(self, p: int) -> complex:
        return self._general.trig_moment(p)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymmetricNntsModel):
            return NotImplemented
        return self.mu == other.mu and np.array_equal(self.rho, other.rho)

    __hash__ = object.__hash__


NntsLike = Union[NntsModel, SymmetricNntsModel]


def symmetrize_coeffs(coeffs: ComplexCoefficients, mu: float) -> SymmetricNntsModel:
    """
    Symmetric model with rho_k = |c_k| about the axis mu.

    Args:
        coeffs: General coefficients
        mu: Axis of symmetry

    Returns:
        SymmetricNntsModel (unit norm is inherited from coeffs)
    """
    return SymmetricNntsModel(coeffs.moduli, mu)


def _wrap_half_turn(x: np.ndarray) -> np.ndarray:
    """Wrap into [-pi/2, pi/2)."""
    return np.mod(x + 0.5 * np.pi, np.pi) - 0.5 * np.pi


def _symmetry_axis(values: np.ndarray, tol: float) -> float:
    """Axis mu in [0, pi) minimising the misalignment of phases with -k*mu (mod pi)."""
    ks = np.arange(values.size)
    active = (ks >= 1) & (np.abs(values) > tol)
    if not np.any(active):
        return 0.0

    k = ks[active].astype(float)
    weights = np.abs(values[active]) ** 2
    phases = np.angle(values[active])

    grid = np.arange(SYMMETRY_SEARCH_POINTS) * (np.pi / SYMMETRY_SEARCH_POINTS)
    misfit = (1.0 - np.cos(2.0 * (phases[None, :] + np.outer(grid, k)))) @ weights
    mu = float(grid[np.argmin(misfit)])

    # Gauss-Newton on the wrapped phase residuals.
    for _ in range(2):
        residual = _wrap_half_turn(phases + k * mu)
        mu -= float(np.sum(weights * k * residual) / np.sum(weights * k * k))
    return float(np.mod(mu, np.pi))


def is_reflective_symmetric(model: NntsLike, tol: float = 1e-8) -> Optional[float]:
    """
    Detect whether a density is reflectively symmetric.

    Args:
        model: NNTS model
        tol: Tolerance on coefficient moduli and on max |f(theta) - f(2*mu - theta)|

    Returns:
        Canonical axis mu in [0, pi) when the density is symmetric, else None
    """
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if isinstance(model, SymmetricNntsModel):
        return model.mu

    values = model.coeffs.values
    mu = _symmetry_axis(values, tol)

    grid = np.arange(SYMMETRY_CHECK_POINTS) * (TWO_PI / SYMMETRY_CHECK_POINTS)
    reflected = reduce_angles(2.0 * mu - grid)
    error = float(np.max(np.abs(model.density(grid) - model.density(reflected))))
    if error >= tol:
        return None

    ks = np.arange(values.size)
    rho = np.real(values * np.exp(1j * ks * mu))
    return SymmetricNntsModel.normalized(rho, mu).mu


def log_likelihood(model: CircularDistribution, data: AngleSample) -> float:
    """sum_j log f(theta_j); -inf if the density underflows at any observation."""
    return model.log_likelihood(data)


def random_nnts_model(m: int, generator: np.random.Generator) -> NntsModel:
    """General NNTS model with complex Gaussian coefficients, normalized."""
    if m < 0:
        raise DomainError(f"M must be nonnegative, got {m}")
    raw = generator.standard_normal(m + 1) + 1j * generator.standard_normal(m + 1)
    return NntsModel(ComplexCoefficients.normalized(raw))


def random_symmetric_model(m: int, generator: np.random.Generator) -> SymmetricNntsModel:
    """Symmetric NNTS model with Gaussian rho and a uniform axis."""
    if m < 0:
        raise DomainError(f"M must be nonnegative, got {m}")
    rho = generator.standard_normal(m + 1)
    mu = generator.uniform(0.0, TWO_PI)
    return SymmetricNntsModel.normalized(rho, mu)


def uniform_model() -> NntsModel:
    """The M = 0 model, f = 1 / (2*pi)."""
    return NntsModel(ComplexCoefficients(np.array([1.0 + 0j])))
