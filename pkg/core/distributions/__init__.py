"""
Circular distribution families.
"""

from .base_distribution import CircularDistribution, RejectionStats
from .ksine import KSineModel, VonMisesBase, bessel_i0
from .nnts import (ComplexCoefficients, NntsModel, SymmetricNntsModel, is_reflective_symmetric,
                   log_likelihood, minimum_phase, random_nnts_model, random_symmetric_model,
                   symmetrize_coeffs, uniform_model)

__all__ = [
    "CircularDistribution",
    "RejectionStats",
    "ComplexCoefficients",
    "NntsModel",
    "SymmetricNntsModel",
    "KSineModel",
    "VonMisesBase",
    "bessel_i0",
    "is_reflective_symmetric",
    "log_likelihood",
    "minimum_phase",
    "random_nnts_model",
    "random_symmetric_model",
    "symmetrize_coeffs",
    "uniform_model",
]
