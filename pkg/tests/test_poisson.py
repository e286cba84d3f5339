import math

import numpy as np
import pytest
from scipy import integrate as quad, special

from nsp.errors import InputDomainError
from nsp.grid import Field, GridSpec, RadialGrid, integrate
from nsp.poisson import (coulomb_values, grad_energy_identity, radial_coulomb, radial_coulomb_origin,
                         solve_coulomb)
from nsp.quadrature import FieldInterpolator

from conftest import gaussian_field


def radial_potential_oracle(density, r: float) -> float:
    """``(1/2)[(1/r) int_0^r f s^2 + int_r^inf f s]`` by adaptive 1D quadrature."""
    inner = quad.quad(lambda s: density(s) * s * s, 0.0, r)[0] / r if r > 0 else 0.0
    return 0.5 * (inner + quad.quad(lambda s: density(s) * s, r, np.inf)[0])


def test_oracle_values():
    f = lambda s: math.exp(-s * s)
    assert radial_potential_oracle(f, 0.0) == pytest.approx(0.25, rel=1e-12)
    D = 0.25 * 4 * math.pi * quad.quad(lambda r: radial_potential_oracle(f, r) * f(r) * r * r, 0.0, 12.0)[0]
    assert D == pytest.approx(math.pi**1.5 / (16 * math.sqrt(2)), rel=1e-9)


def test_gaussian_potential_profile(spec64):
    q = gaussian_field(spec64, a=0.5).values ** 2
    S0 = coulomb_values(q, spec64)
    r = spec64.radius
    exact = math.sqrt(math.pi) * special.erf(r) / (8.0 * r)
    inner = r < 4.0
    assert np.max(np.abs(S0[inner] - exact[inner])) / 0.25 <= 1e-6


def test_hockney_is_a_consistent_lower_order_route(spec64):
    q = gaussian_field(spec64).values ** 2
    spectral = coulomb_values(q, spec64)
    hockney = coulomb_values(q, spec64, method="hockney")
    assert np.max(np.abs(spectral - hockney)) / np.max(spectral) <= 1e-2


def test_kernel_is_symmetric(spec32):
    rng = np.random.default_rng(0)
    f, g = (np.exp(-spec32.radius**2) * rng.uniform(size=spec32.shape) for _ in range(2))
    lhs = np.sum(f * coulomb_values(g, spec32))
    rhs = np.sum(coulomb_values(f, spec32) * g)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_no_periodic_image_contamination():
    small, large = GridSpec(32, 4.0), GridSpec(64, 8.0)
    value = []
    for spec in (small, large):
        q = gaussian_field(spec).values ** 2
        value.append(FieldInterpolator(coulomb_values(q, spec), spec)(np.zeros((1, 3)))[0])
    assert abs(value[0] - value[1]) / value[1] <= 1e-4


def test_grad_energy_identity_two_routes(spec32):
    u = gaussian_field(GridSpec(32, 6.0), a=0.8)
    lhs, rhs = grad_energy_identity(u)
    assert abs(lhs - rhs) / rhs <= 1e-6


def test_radial_coulomb_matches_closed_form():
    grid = RadialGrid(1200, 24.0)
    r = grid.r
    V = radial_coulomb(grid, np.exp(-r * r))
    exact = math.sqrt(math.pi) * special.erf(r) / (8.0 * r)
    assert np.max(np.abs(V - exact)) <= 1e-12
    assert radial_coulomb_origin(grid, np.exp(-r * r)) == pytest.approx(0.25, rel=1e-12)


def test_solve_coulomb_validation(spec32):
    with pytest.raises(InputDomainError):
        solve_coulomb(Field(spec32, 1j * np.ones(spec32.shape)))
    with pytest.raises(InputDomainError):
        coulomb_values(np.ones(spec32.shape), spec32, method="multigrid")
    real_complex = Field(spec32, np.exp(-spec32.radius**2) + 0j)
    assert integrate(solve_coulomb(real_complex)) > 0
