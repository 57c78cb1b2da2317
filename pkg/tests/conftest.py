"""
Shared fixtures for the test suite.
"""

import numpy as np
import pytest

from core.angles import AngleSample
from core.distributions import KSineModel, NntsModel, SymmetricNntsModel, VonMisesBase
from core.estimation import FitOptions
from core.rng import RngStream


@pytest.fixture
def cardioid():
    """f(theta) = (1 + cos theta) / 2*pi."""
    return NntsModel.from_values([1.0, 1.0], normalize=True)


@pytest.fixture
def symmetric_m2():
    """Symmetric M=2 model about mu = 2.0."""
    return SymmetricNntsModel([0.6, 0.48, 0.64], 2.0)


@pytest.fixture
def skewed_m3():
    """A clearly asymmetric M=3 model."""
    return NntsModel.from_values([0.5, 0.3 + 0.4j, -0.4 + 0.3j, 0.5j])


@pytest.fixture
def ksine_k3():
    return KSineModel(mu=0.0, lam=0.6, k_star=3, base=VonMisesBase(kappa=1.0))


@pytest.fixture
def fast_options():
    """Cheaper optimizer settings for tests that fit many datasets."""
    return FitOptions(n_restarts=1, max_iters=500, mu_grid_points=128)


@pytest.fixture
def reflected_sample():
    """2,000 angles exactly symmetric about mu = 2.0."""
    generator = RngStream(99).generator()
    draws = generator.vonmises(0.0, 2.0, size=500) + 2.0
    spread = generator.uniform(0.0, np.pi, size=500)
    half = np.concatenate([draws, 2.0 + spread * 0.5])
    return AngleSample.from_values(np.concatenate([half, 4.0 - half]))


@pytest.fixture
def write_angles(tmp_path):
    """Write text to a file under tmp_path and return its path."""
    def _write(content: str, name: str = "angles.csv"):
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return path
    return _write
