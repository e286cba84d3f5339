import numpy as np
import pytest

from nsp.doping import GaussianProfile
from nsp.functionals import PhysParams
from nsp.grid import Field, GridSpec


def gaussian_field(spec: GridSpec, amplitude: float = 1.0, a: float = 1.0, center=(0.0, 0.0, 0.0),
                   phase: float = 0.0) -> Field:
    """``amplitude * exp(-a |x - center|^2 + i phase)``."""
    x, y, z = spec.mesh()
    r2 = (x - center[0]) ** 2 + (y - center[1]) ** 2 + (z - center[2]) ** 2
    values = amplitude * np.exp(-a * r2)
    if phase:
        values = values * np.exp(1j * phase)
    return Field(spec, values)


@pytest.fixture(scope="session")
def spec64() -> GridSpec:
    return GridSpec(64, 8.0)


@pytest.fixture(scope="session")
def spec32() -> GridSpec:
    return GridSpec(32, 8.0)


@pytest.fixture(scope="session")
def params3() -> PhysParams:
    return PhysParams(1.0, 0.5, 3.0)


@pytest.fixture(scope="session")
def weak_gaussian() -> GaussianProfile:
    return GaussianProfile(0.01, 1.0)
