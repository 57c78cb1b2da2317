"""
Angles Module

Circular samples: unit conversion, reduction to [0, 2*pi) and sample
trigonometric moments.
"""

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from .exceptions import DegenerateSampleError, DomainError

TWO_PI = 2.0 * np.pi

# Resultant lengths closer than this to 0 or 1 are treated as exact.
RESULTANT_EPS = 1e-12


class AngleUnit(str, Enum):
    """Units accepted on ingestion."""
    RADIANS = "rad"
    DEGREES = "deg"
    HOURS24 = "hour24"

    def to_radians(self, values: np.ndarray) -> np.ndarray:
        """Convert raw values in this unit to radians (not yet reduced)."""
        if self is AngleUnit.DEGREES:
            return values * np.pi / 180.0
        if self is AngleUnit.HOURS24:
            return values * TWO_PI / 24.0
        return values


def reduce_angles(values) -> np.ndarray:
    """
    Reduce angles modulo 2*pi into [0, 2*pi).

    Values that round to exactly 2*pi after reduction map to 0.
    """
    reduced = np.mod(np.asarray(values, dtype=float), TWO_PI)
    return np.where(reduced >= TWO_PI, 0.0, reduced)


@dataclass(frozen=True, eq=False)
class AngleSample:
    """
    Ordered collection of angles in radians on [0, 2*pi).

    Instances are immutable; the underlying array is read-only.
    """

    angles: np.ndarray
    source_unit: AngleUnit = AngleUnit.RADIANS
    source: Optional[str] = None
    _digest: str = field(default="", repr=False, compare=False)

    def __post_init__(self):
        angles = np.array(self.angles, dtype=float).ravel()
        if angles.size < 1:
            raise DomainError("An angle sample needs at least one observation")
        if not np.all(np.isfinite(angles)):
            raise DomainError("Angles must be finite")
        if np.any(angles < 0.0) or np.any(angles >= TWO_PI):
            raise DomainError("Stored angles must lie in [0, 2*pi); use AngleSample.from_values")
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "_digest", hashlib.sha1(angles.tobytes()).hexdigest())

    @classmethod
    def from_values(cls, values: Iterable[float], unit: AngleUnit = AngleUnit.RADIANS,
                    source: Optional[str] = None) -> "AngleSample":
        """
        Build a sample from raw values, converting units and reducing mod 2*pi.

        Args:
            values: Raw angle values
            unit: Unit of the raw values
            source: Optional provenance (e.g. the file path)

        Returns:
            AngleSample in radians
        """
        unit = AngleUnit(unit)
        raw = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
        return cls(reduce_angles(unit.to_radians(raw)), unit, source)

    @property
    def n(self) -> int:
        """Number of observations."""
        return int(self.angles.size)

    @property
    def digest(self) -> str:
        """Content hash used to check that two fits saw the same data."""
        return self._digest

    def rotated(self, delta: float) -> "AngleSample":
        """Return the sample rotated by delta radians."""
        return AngleSample(reduce_angles(self.angles + delta), self.source_unit, self.source)

    def trig_moment(self, p: int = 1) -> complex:
        """Sample trigonometric moment (1/n) * sum exp(i*p*theta_j)."""
        return complex(np.mean(np.exp(1j * p * self.angles)))

    def mean_resultant_length(self) -> float:
        """Length of the first sample trigonometric moment."""
        return abs(self.trig_moment(1))

    def mean_direction(self) -> float:
        """
        Argument of the first sample trigonometric moment, in [0, 2*pi).

        Raises:
            DegenerateSampleError: when the resultant vanishes
        """
        moment = self.trig_moment(1)
        if abs(moment) < RESULTANT_EPS:
            raise DegenerateSampleError("Mean direction is undefined: mean resultant length is zero")
        return float(reduce_angles(np.angle(moment)))

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, AngleSample):
            return NotImplemented
        return self.source_unit == other.source_unit and np.array_equal(self.angles, other.angles)

    __hash__ = object.__hash__
