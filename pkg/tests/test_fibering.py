import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsp.doping import Ball, BallUnion, GaussianProfile, InverseRationalProfile
from nsp.errors import InputDomainError, ParameterError, UnsupportedProfileError
from nsp.fibering import (Fiber, coefficient_bounds_hold, decomposition_terms, default_T, fiber_constants, fiber_eval,
                          g_poly, g_poly_prime, g_poly_second, moving_domain_derivatives, project_to_manifold,
                          remainder_bound_report, remainder_by_definition, remainder_direct, scan_fiber)
from nsp.functionals import analyse, breakdown
from nsp.grid import Field, dilate

from conftest import gaussian_field


@pytest.fixture(scope="module")
def gaussian_fiber(spec64, params3):
    u = gaussian_field(spec64, 1.3, 0.7, phase=0.3)
    return Fiber(analyse(u, params3.p, GaussianProfile(0.05, 1.0)), params3)


def test_fiber_at_one_reproduces_the_state(gaussian_fiber):
    f, J = gaussian_fiber(1.0)
    assert f == pytest.approx(gaussian_fiber.breakdown.I, rel=1e-13)
    assert J == pytest.approx(gaussian_fiber.breakdown.J, rel=1e-12)


@pytest.mark.parametrize("lam", [0.5, 0.8, 1.25, 2.0])
def test_fiber_matches_the_dilated_state(spec64, params3, lam):
    profile = GaussianProfile(0.05, 1.0)
    u = gaussian_field(spec64, 1.0, 0.5)
    f, J = fiber_eval(u, lam, params3, profile)
    b = breakdown(Field(spec64, dilate(u.values, spec64, lam)), params3, profile)
    assert f == pytest.approx(b.I, rel=1e-6)
    assert J == pytest.approx(b.J, rel=1e-6, abs=1e-8 * b.scale)


@pytest.mark.parametrize("lam", [0.3, 0.7, 1.0, 1.6, 3.0])
def test_lambda_f_prime_is_J(gaussian_fiber, lam):
    h = 1e-4 * lam
    derivative = lam * (gaussian_fiber(lam + h)[0] - gaussian_fiber(lam - h)[0]) / (2 * h)
    J = gaussian_fiber(lam)[1]
    assert abs(derivative - J) <= 1e-6 * max(abs(J), gaussian_fiber.terms(lam)["scale"])


def test_ball_union_fiber_derivative(spec64, params3):
    union = BallUnion((Ball((0.3, 0.0, 0.0), 1.0, 0.2),))
    fiber = Fiber(analyse(gaussian_field(spec64, 1.3, 0.7), params3.p, union), params3)
    for lam in (0.8, 1.2):
        h = 1e-4
        derivative = lam * (fiber(lam + h)[0] - fiber(lam - h)[0]) / (2 * h)
        assert abs(derivative - fiber(lam)[1]) <= 1e-4 * fiber.terms(lam)["scale"]


def test_scan_finds_a_unique_critical_point(gaussian_fiber):
    scan = scan_fiber(gaussian_fiber)
    assert scan.sign_changes == 1 and scan.unique_max
    assert abs(gaussian_fiber(scan.lambda_u)[1]) <= 1e-10 * gaussian_fiber.terms(scan.lambda_u)["scale"]
    assert np.all(scan.f_values <= gaussian_fiber(scan.lambda_u)[0] + 1e-12)


def test_projection_lands_on_the_manifold(spec64, params3, weak_gaussian):
    u = gaussian_field(spec64, 0.6, 0.5)
    lam, scan = project_to_manifold(u, params3, weak_gaussian)
    assert scan.sign_changes == 1 and lam > 0


def test_fiber_rejects_bad_input(spec32, params3, gaussian_fiber):
    with pytest.raises(InputDomainError):
        Fiber(analyse(Field.zeros(spec32), 3.0, GaussianProfile(0.1, 1.0)), params3)
    for lam in (0.0, -1.0, float("nan")):
        with pytest.raises(InputDomainError):
            gaussian_fiber(lam)


@pytest.mark.parametrize("lam", [0.25, 0.5, 2.0, 4.0])
def test_decomposition_and_remainder_routes(gaussian_fiber, lam):
    terms = decomposition_terms(gaussian_fiber, lam)
    assert terms["residual"] <= 1e-10 * terms["max_term"]
    by_definition = remainder_by_definition(gaussian_fiber, lam)
    direct = remainder_direct(gaussian_fiber, lam)
    assert abs(by_definition - direct) <= 1e-10 * max(abs(direct), terms["max_term"])


def test_remainder_routes_for_a_rational_profile(spec64, params3):
    u = gaussian_field(spec64, 1.0, 0.6)
    report = remainder_bound_report(u, InverseRationalProfile(0.05, 1.0, 4.0), params3, [0.5, 2.0])
    assert report.max_relative_gap <= 1e-8
    with pytest.raises(UnsupportedProfileError):
        remainder_bound_report(u, BallUnion((Ball((0, 0, 0), 1.0, 0.1),)), params3, [0.5])


@settings(max_examples=25, deadline=None)
@given(p=st.floats(2.05, 4.95), lam=st.floats(0.05, 6.0))
def test_g_polynomial_derivatives(p, lam):
    h = 1e-5 * lam
    assert float(g_poly_prime(lam, p)) == pytest.approx(
        float(g_poly(lam + h, p) - g_poly(lam - h, p)) / (2 * h), rel=1e-6, abs=1e-6)
    assert float(g_poly_second(lam, p)) == pytest.approx(
        float(g_poly_prime(lam + h, p) - g_poly_prime(lam - h, p)) / (2 * h), rel=1e-6, abs=1e-6)


@pytest.mark.parametrize("p", [2.2, 3.0, 4.0, 4.9])
def test_fiber_constants_bounds(p):
    assert float(g_poly(1.0, p)) == pytest.approx(0.0, abs=1e-14)
    c = fiber_constants(p)
    assert c.bounds_hold and c.alpha > 0 and 0 < c.tau < 1
    assert coefficient_bounds_hold(default_T(p))


def test_fiber_constants_validation():
    for p in (2.0, 5.0):
        with pytest.raises(ParameterError):
            fiber_constants(p)
    with pytest.raises(InputDomainError):
        fiber_constants(3.0, T=2.0)


def test_moving_domain_derivatives_match_finite_differences(spec64):
    u = gaussian_field(spec64, 1.3, 0.7)
    S0 = Field(spec64, analyse(u, 3.0, GaussianProfile(0.01, 1.0)).S0)
    ball = ((0.3, 0.0, 0.0), 1.0)
    lam, h = 0.9, 1e-3
    mid, up, down = (moving_domain_derivatives(S0, ball, l) for l in (lam, lam + h, lam - h))
    assert mid.first == pytest.approx((up.value - down.value) / (2 * h), rel=1e-4)
    assert mid.second == pytest.approx((up.first - down.first) / (2 * h), rel=1e-3)
    with pytest.raises(InputDomainError):
        moving_domain_derivatives(S0, ball, 0.0)
