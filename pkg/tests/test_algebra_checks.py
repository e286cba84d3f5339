import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsp import algebra_checks as alg
from nsp.errors import SingularSystemError

params = st.tuples(st.floats(2.05, 4.95), st.floats(0.1, 10.0), st.floats(0.1, 10.0))


def test_determinant_example():
    numeric, closed, gap = alg.det_lambda(3.0, 1.0, 1.0, 1.0)
    assert closed == pytest.approx(4.0)
    assert gap <= 1e-12 * max(1.0, abs(closed))


@settings(max_examples=60, deadline=None)
@given(pwe=params, mu=st.floats(0.0, 10.0))
def test_determinant_closed_form(pwe, mu):
    assert alg.det_gap_relative(*pwe, mu) <= 1e-12


def test_random_det_draws_are_reproducible():
    a, b = alg.random_det_draws(50, seed=7), alg.random_det_draws(50, seed=7)
    assert np.array_equal(a, b) and np.max(a) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(pwe=params, mu=st.floats(0.0, 10.0))
def test_lambda_rows_match_the_system_rows(pwe, mu):
    m = alg.lambda_matrix(*pwe, mu)
    assert np.array_equal(m.entries[:2], alg.stationarity_matrix(*pwe)[:2])
    assert np.array_equal(m.rhs_map[:2], alg.stationarity_rhs_map()[:2])


@settings(max_examples=60, deadline=None)
@given(pwe=params, seed=st.integers(0, 2**31))
def test_linear_solve_round_trip(pwe, seed):
    x = np.random.default_rng(seed).uniform(-5, 5, size=4)
    assert alg.round_trip_gap(alg.stationarity_matrix(*pwe), x) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(pwe=params, seed=st.integers(0, 2**31))
def test_closed_form_D_and_C(pwe, seed):
    p, w, e = pwe
    sources = np.random.default_rng(seed).uniform(-5, 5, size=4)
    sol = alg.solve_from_sources(alg.stationarity_matrix(p, w, e), alg.stationarity_rhs_map(), sources, p, e)
    assert sol.D_gap <= 1e-12 and sol.C_gap <= 1e-12


@settings(max_examples=40, deadline=None)
@given(pwe=params, mu=st.floats(0.5, 5.0), seed=st.integers(0, 2**31))
def test_closed_form_C_holds_for_the_multiplier_system(pwe, mu, seed):
    p, w, e = pwe
    sources = np.random.default_rng(seed).uniform(-5, 5, size=4)
    m = alg.lambda_matrix(p, w, e, mu)
    _, _, C, _ = alg.refined_solve(m.entries, m.rhs_map @ sources)
    assert C == pytest.approx(alg.closed_form_C(*sources, p), rel=1e-9, abs=1e-9)


def test_refined_solve_beats_plain_lu_on_ill_conditioned_systems():
    m = alg.stationarity_matrix(2.0565138191656325, 6.894373938448518, 8.667051774402623)
    x = np.array([1.0, -2.0, 3.0, -4.0])
    assert np.linalg.cond(m) > 1e5
    assert alg.round_trip_gap(m, x) <= 1e-14


def test_singularities_and_pivot_row():
    found = alg.detect_singularities(3.0, 1.0, 1.0, (0.0, 1.0 / 3.0, 0.5, 2.0))
    assert found[0.0][0] and found[1.0 / 3.0][0]
    assert not found[0.5][0] and not found[2.0][0]
    assert np.allclose(alg.pivot_coefficients(3.0, 1.0, 1.0), [3.0, 16 / 3, -7 / 3, -1 / 3], atol=1e-12)
    assert alg.singular_mus(3.0, 1.0, 1.0) == [0.0, 1.0 / 3.0]


@pytest.mark.parametrize("p, w, e", [(2.5, 0.3, 2.0), (4.0, 7.0, 0.4)])
def test_pivot_combination_is_parameter_free(p, w, e):
    assert np.allclose(alg.pivot_coefficients(p, w, e), [3.0, 16 / 3, -7 / 3, -1 / 3], atol=1e-10)


def test_singular_systems_raise():
    m = alg.lambda_matrix(3.0, 1.0, 1.0, 1.0 / 3.0)
    with pytest.raises(SingularSystemError) as info:
        alg.solve_from_sources(m.entries, m.rhs_map, (1.0, 0.0, 0.0, 0.0), 3.0, 1.0)
    assert info.value.pivot_row is not None
    with pytest.raises(SingularSystemError):
        alg.closed_form_D(1.0, 0.0, 0.0, 0.0, 3.0, 0.0)
    with pytest.raises(SingularSystemError):
        alg.singular_mus(3.0, 1.0, 0.0)
