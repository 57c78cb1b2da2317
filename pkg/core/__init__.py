"""
NNTS Symmetry - Core Module

Nonnegative trigonometric sum (NNTS) models for circular data: maximum
likelihood fitting, tests of reflective symmetry, samplers and a simulation
harness for size and power studies.
"""

__version__ = "1.0.0"

from .angles import AngleSample, AngleUnit
from .distributions import (ComplexCoefficients, KSineModel, NntsModel, SymmetricNntsModel,
                            VonMisesBase)
from .estimation import FitOptions, FitReport, fit_general, fit_pair, fit_symmetric, scan_models
from .inference import TestKind, TestResult
from .rng import RngStream

__all__ = [
    "AngleSample",
    "AngleUnit",
    "ComplexCoefficients",
    "NntsModel",
    "SymmetricNntsModel",
    "KSineModel",
    "VonMisesBase",
    "FitOptions",
    "FitReport",
    "fit_general",
    "fit_symmetric",
    "fit_pair",
    "scan_models",
    "TestKind",
    "TestResult",
    "RngStream",
]
