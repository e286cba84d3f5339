import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsp.errors import InputDomainError
from nsp.grid import (Field, GridSpec, RadialGrid, boundary_shell_fraction, dilate, integrate, kinetic_integral,
                      laplacian_values, spectral_gradient, transfer)

from conftest import gaussian_field


def test_gaussian_integral_matches_closed_form(spec64):
    u = gaussian_field(spec64)
    assert integrate(u) == pytest.approx(math.pi**1.5, rel=1e-10)


def test_spectral_gradient_of_gaussian(spec64):
    u = gaussian_field(spec64)
    x, _, _ = spec64.mesh()
    exact = -2.0 * x * u.values
    got = spectral_gradient(u)[0].values
    assert np.linalg.norm(got - exact) / np.linalg.norm(exact) <= 1e-8


@settings(max_examples=15, deadline=None)
@given(a=st.floats(0.3, 1.0))
def test_kinetic_integral_of_gaussian(a):
    spec = GridSpec(48, 8.0)
    u = gaussian_field(spec, a=a)
    exact = 3.0 * a * (math.pi / (2.0 * a)) ** 1.5
    assert kinetic_integral(u.values, spec) == pytest.approx(exact, rel=1e-9)


def test_laplacian_is_minus_kinetic_form(spec32):
    u = gaussian_field(spec32, a=0.6)
    lhs = -float(np.sum(u.values * laplacian_values(u.values, spec32)) * spec32.cell_volume)
    assert lhs == pytest.approx(kinetic_integral(u.values, spec32), rel=1e-12)


def test_origin_is_not_a_sample_point(spec32):
    assert np.min(spec32.radius) == pytest.approx(0.5 * math.sqrt(3) * spec32.spacing)


def test_radial_classes_reconstruct_radius(spec32):
    radii, inverse = spec32.radial_classes
    assert np.array_equal(inverse.size, spec32.radius.size)
    assert np.max(np.abs(radii[inverse].reshape(spec32.shape) - spec32.radius)) <= 1e-12


@pytest.mark.parametrize("n, L", [(15, 8.0), (17, 8.0), (8, 8.0), (32, 0.0), (32, -1.0), (32, float("nan")),
                                  (True, 8.0), (32.5, 8.0)])
def test_grid_spec_rejects_bad_input(n, L):
    with pytest.raises(InputDomainError):
        GridSpec(n, L)


def test_field_validation_and_immutability(spec32):
    with pytest.raises(InputDomainError):
        Field(spec32, np.zeros((4, 4, 4)))
    bad = np.zeros(spec32.shape)
    bad[0, 0, 0] = np.nan
    with pytest.raises(InputDomainError):
        Field(spec32, bad)
    source = np.ones(spec32.shape)
    f = Field(spec32, source)
    source[0, 0, 0] = 5.0
    assert f.values[0, 0, 0] == 1.0
    with pytest.raises(ValueError):
        f.values[0, 0, 0] = 2.0


@pytest.mark.parametrize("scale", [0.7, 1.3])
def test_dilate_matches_analytic_gaussian(spec64, scale):
    u = gaussian_field(spec64, amplitude=1.2, a=0.5)
    expected = gaussian_field(spec64, amplitude=1.2 * scale**2, a=0.5 * scale**2).values
    assert np.max(np.abs(dilate(u.values, spec64, scale) - expected)) <= 1e-9


def test_transfer_between_grids(spec32):
    target = GridSpec(48, 6.0)
    u = gaussian_field(spec32, a=0.8)
    expected = gaussian_field(target, a=0.8).values
    assert np.max(np.abs(transfer(u.values, spec32, target) - expected)) <= 1e-5


def test_boundary_shell_fraction(spec32):
    assert boundary_shell_fraction(gaussian_field(spec32)) < 1e-8
    assert boundary_shell_fraction(Field(spec32, np.ones(spec32.shape))) > 0.5
    with pytest.raises(InputDomainError):
        boundary_shell_fraction(np.ones(spec32.shape))


def test_radial_grid_integrates_and_differentiates():
    grid = RadialGrid(800, 20.0)
    r = grid.r
    assert grid.integrate(np.exp(-r * r)) == pytest.approx(math.pi**1.5, rel=1e-12)
    w = r * np.exp(-r * r)
    exact = (4 * r**3 - 6 * r) * np.exp(-r * r)
    assert np.max(np.abs(grid.second_derivative(w) - exact)) <= 1e-10
    radii = np.array([0.0, 0.33, 1.7, 5.0])
    assert np.allclose(grid.evaluate_sine(w, radii), radii * np.exp(-radii**2), atol=1e-12)
    with pytest.raises(InputDomainError):
        RadialGrid(4, 1.0)
