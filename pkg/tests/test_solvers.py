import numpy as np
import pytest

from nsp.doping import Ball, BallUnion, GaussianProfile, ZeroProfile
from nsp.errors import BracketError, ConvergenceError, InputDomainError, ParameterError, UnsupportedProfileError
from nsp.fibering import scan_fiber, Fiber
from nsp.functionals import PhysParams, analyse, breakdown, modulus_gradient_gap
from nsp.grid import Field, GridSpec, RadialGrid
from nsp.solvers import (RadialState, estimate_mu_star, gaussian_init, projected_gaussian_init, roundtrip_threshold,
                         solve_action_gss, solve_energy_gss, solve_radial_energy, solve_radial_global)
from nsp.solvers.energy import energy_value
from nsp.solvers.rayleigh import first_box_eigenvalue, quadratic_form_infimum, square_well_ground_energy
from nsp.solvers.radial import radial_analyse, sampled_families
from nsp.solvers.reference import (gaussian_state, gaussian_threshold, gaussian_trial_minimum, gaussian_trial_terms,
                                   infimum_sign_energy, length_scale, mass_scale, threshold_box, threshold_radial_grid)

from conftest import gaussian_field


@pytest.fixture(scope="module")
def coarse_ground_state(params3, weak_gaussian):
    spec = GridSpec(32, 8.0)
    return solve_action_gss(params3, weak_gaussian, gaussian_init(spec, params3))


def test_action_solve_on_a_coarse_grid(coarse_ground_state, params3, weak_gaussian):
    rep = coarse_ground_state
    b = rep.breakdown
    assert rep.converged and rep.residual_norm <= 1e-6
    assert abs(b.N) <= 1e-9 * b.scale
    assert rep.sigma == b.I > 0
    scan = scan_fiber(Fiber(analyse(rep.state, params3.p, weak_gaussian), params3))
    assert scan.sign_changes == 1


def test_action_ground_state_is_positive_and_symmetric(coarse_ground_state):
    u = np.asarray(coarse_ground_state.state.values)
    assert np.all(u.real > -1e-12 * np.max(np.abs(u)))
    assert np.max(np.abs(u - u[::-1, :, :])) <= 1e-8 * np.max(np.abs(u))
    assert np.max(np.abs(u - np.transpose(u, (1, 0, 2)))) <= 1e-8 * np.max(np.abs(u))


def test_action_level_is_phase_invariant(coarse_ground_state, params3, weak_gaussian):
    spec = coarse_ground_state.state.spec
    init = gaussian_init(spec, params3)
    rotated = solve_action_gss(params3, weak_gaussian, Field(spec, init.values * np.exp(0.7j)))
    assert rotated.sigma == pytest.approx(coarse_ground_state.sigma, rel=1e-9)
    assert modulus_gradient_gap(rotated.state)[2] <= 1e-8


def test_action_solver_validation(spec32, params3, weak_gaussian):
    init = gaussian_init(spec32, params3)
    with pytest.raises(ParameterError):
        solve_action_gss(PhysParams(1.0, 0.5, 1.5), weak_gaussian, init)
    with pytest.raises(ParameterError):
        solve_action_gss(params3, weak_gaussian, init, tol=0.0)
    with pytest.raises(ParameterError):
        gaussian_init(spec32, params3, width=-1.0)
    with pytest.raises(InputDomainError):
        solve_action_gss(params3, weak_gaussian, Field.zeros(spec32))
    with pytest.raises(ConvergenceError):
        solve_action_gss(params3, weak_gaussian, init, max_iter=1, polish=False)


def test_projected_gaussian_init_is_on_the_constraint_set(spec64, params3, weak_gaussian):
    state, lam = projected_gaussian_init(spec64, params3, weak_gaussian)
    b = breakdown(state, params3, weak_gaussian)
    assert lam > 0 and abs(b.J) <= 1e-9 * b.scale


def test_energy_solve_below_the_trial_energy():
    mu, e, p = 300.0, 0.5, 2.2
    spec = threshold_box(mu, e, p, 32)
    a, trial_energy = gaussian_trial_minimum(mu, e, p)
    rep = solve_energy_gss(mu, e, p, ZeroProfile(), gaussian_state(spec, mu, a))
    s = analyse(rep.state, p, ZeroProfile())
    assert rep.residual_norm <= 1e-6
    assert s.B == pytest.approx(mu, rel=1e-12)
    assert rep.c_mu == pytest.approx(energy_value(s, e), rel=1e-12)
    assert rep.c_mu < trial_energy < 0
    assert rep.omega_mu > 0


def test_energy_solver_validation(spec32):
    init = gaussian_field(spec32)
    for mu, p in ((-1.0, 2.2), (float("nan"), 2.2), (10.0, 2.5)):
        with pytest.raises((InputDomainError, ParameterError)):
            solve_energy_gss(mu, 0.5, p, ZeroProfile(), init)


def test_gaussian_trial_terms_match_the_grid():
    mu, e, p = 300.0, 0.5, 2.2
    a, _ = gaussian_trial_minimum(mu, e, p)
    spec = threshold_box(mu, e, p, 48)
    s = analyse(gaussian_state(spec, mu, a), p, ZeroProfile())
    terms = gaussian_trial_terms(mu, a, e, p)
    for key in "ABCD":
        assert getattr(s, key) == pytest.approx(terms[key], rel=1e-9)


def test_undoped_scaling_law():
    p = 2.2
    for e in (0.4, 0.7):
        assert gaussian_threshold(e, p) == pytest.approx(gaussian_threshold(1.0, p) * mass_scale(e, p), rel=1e-9)
    assert length_scale(0.5, p) * 0.5 ** ((p - 1) / (2 * (p - 2))) == pytest.approx(1.0)
    assert roundtrip_threshold(100.0, 2.25) == pytest.approx(2 * 2 ** 2 * 100.0)


def test_mu_star_scales_linearly_with_the_charge():
    low, high = estimate_mu_star(0.4, 2.2), estimate_mu_star(0.5, 2.2)
    assert low.monotone and high.monotone
    assert low.mu_star < low.trial_threshold
    expected = mass_scale(0.4, 2.2) / mass_scale(0.5, 2.2)
    assert low.mu_star / high.mu_star == pytest.approx(expected, rel=2e-3)


def test_mu_star_sign_test_and_validation():
    e, p = 0.5, 2.2
    trial = gaussian_threshold(e, p)
    grid = threshold_radial_grid(trial, e, p)
    assert infimum_sign_energy(0.3 * trial, e, p, grid) == 0.0
    assert infimum_sign_energy(1.2 * trial, e, p, grid) < 0.0
    with pytest.raises(BracketError):
        estimate_mu_star(e, p, bracket=(0.2 * trial, 0.4 * trial), probes=3)
    for kwargs in ({"e": 0.0}, {"tol": 0.0}, {"bracket": (2.0, 1.0)}):
        args = {"e": e, "p": p, **kwargs}
        with pytest.raises(ParameterError):
            estimate_mu_star(**args)


def test_radial_primitives_match_the_3d_grid(spec64):
    profile = GaussianProfile(0.05, 1.0)
    grid = RadialGrid(1600, 40.0)
    r = grid.r
    radial = radial_analyse(grid, r * 1.3 * np.exp(-0.7 * r * r), 3.0, profile)
    cube = analyse(gaussian_field(spec64, 1.3, 0.7), 3.0, profile)
    for key in ("A", "B", "C", "D", "E1"):
        assert getattr(radial, key) == pytest.approx(getattr(cube, key), rel=1e-6)


def test_radial_state_dilation_and_lift(spec64):
    grid = RadialGrid(1600, 40.0)
    r = grid.r
    state = RadialState(grid, r * np.exp(-r * r))
    dilated = state.dilate(1.5)
    assert np.max(np.abs(dilated.u - 1.5**2 * np.exp(-(1.5 * r) ** 2))) <= 1e-12
    lifted = state.lift(spec64)
    assert np.max(np.abs(lifted.values - np.exp(-spec64.radius**2))) <= 1e-12


def test_radial_family_sampling_detects_minimality():
    grid = RadialGrid(800, 40.0)
    r = grid.r
    params = PhysParams(1.0, 0.0, 1.5)
    family = sampled_families(RadialState(grid, r * 1e-3 * np.exp(-r * r)), params, ZeroProfile())
    assert not family["minimal"]


def test_radial_solvers_reject_bad_input():
    grid = RadialGrid(400, 20.0)
    state = RadialState(grid, grid.r * np.exp(-grid.r**2))
    with pytest.raises(InputDomainError):
        solve_radial_energy(-1.0, 0.5, 2.2, state)
    with pytest.raises(ParameterError):
        solve_radial_energy(10.0, 0.5, 3.0, state)
    with pytest.raises(UnsupportedProfileError):
        solve_radial_global(PhysParams(1.0, 0.05, 1.5), BallUnion((Ball((0, 0, 0), 1.0, 1.0),)), state)
    with pytest.raises(ParameterError):
        solve_radial_global(PhysParams(1.0, 0.05, 3.0), ZeroProfile(), state)


def test_rayleigh_zero_potential_gives_the_box_eigenvalue():
    spec = GridSpec(16, 4.0)
    res = quadratic_form_infimum(Field.zeros(spec), tol=1e-10)
    assert res.value == pytest.approx(first_box_eigenvalue(spec), rel=1e-8)
    periodic = quadratic_form_infimum(Field.zeros(spec), tol=1e-10, boundary="periodic")
    assert abs(periodic.value) <= 1e-10


def test_rayleigh_square_well():
    spec = GridSpec(32, 6.0)
    well = Field(spec, -10.0 * (spec.radius < 1.0))
    res = quadratic_form_infimum(well, tol=1e-8)
    exact = square_well_ground_energy(10.0, 1.0)
    assert res.value < 0 and res.residual_norm <= 1e-8
    assert res.value == pytest.approx(exact, rel=0.1)
    assert exact == pytest.approx(-4.624, abs=1e-3)
    assert square_well_ground_energy(2.0, 1.0) == 0.0


def test_rayleigh_validation(spec32):
    with pytest.raises(InputDomainError):
        quadratic_form_infimum(gaussian_field(spec32, phase=1.0))
    with pytest.raises(ParameterError):
        quadratic_form_infimum(Field.zeros(spec32), boundary="neumann")
    with pytest.raises(ParameterError):
        quadratic_form_infimum(Field.zeros(spec32), max_iter=0)
    with pytest.raises(ConvergenceError):
        quadratic_form_infimum(Field(spec32, -10.0 * (spec32.radius < 1.0)), max_iter=1)
    with pytest.raises(InputDomainError):
        square_well_ground_energy(-1.0, 1.0)
