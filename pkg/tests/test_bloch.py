import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msfq import bloch
from msfq.bloch import (A_OMEGA, V0, BlochState, cfi_axis, crossover_squeezing, drift_matrix,
                        first_qfi_peak, optimal_time_decoherent, propagate, propagate_with_sensitivity,
                        propagate_with_sensitivity_ode, qfi_at, qfi_mixed, sensitivity_quadrature,
                        sld_axis, steady_state, time_series, xi_ratio)
from msfq.coherent import RabiParams, cfi_population_exact, excited_population, qfi_exact, sensitivity_coherent
from msfq.errors import DomainError, NumericalError
from msfq.params import SensorConfig, derive

drifts = st.builds(
    drift_matrix,
    st.floats(0.2, 2.0), st.floats(-0.5, 0.5), st.floats(0.0, 0.3), st.floats(0.0, 1.5))


def test_drift_matrix_layout():
    d = drift_matrix(1.3, 0.4, 0.0, 0.8)
    np.testing.assert_array_equal(d.A, -d.A.T)
    np.testing.assert_array_equal(d.b, 0.0)
    d = drift_matrix(1.3, 0.4, 0.2, 0.0)
    assert d.rates == (0.1, 0.1, 0.2)
    d = drift_matrix(1.3, 0.4, 0.2, 0.9)
    assert np.trace(d.A) == pytest.approx(-2 * 0.2 * math.cosh(1.8), rel=1e-14)
    assert d.A[0, 1] == 1.3 and d.A[1, 0] == -1.3 and d.A[1, 2] == 0.4 and d.A[2, 1] == -0.4
    assert np.count_nonzero(A_OMEGA) == 2 and A_OMEGA[1, 2] == 1 and A_OMEGA[2, 1] == -1


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0])
def test_steady_state_without_drive(r):
    d = drift_matrix(0.9, 0.0, 0.03, r)
    np.testing.assert_allclose(steady_state(d), [0, 0, -1 / math.cosh(2 * r)], atol=1e-15)
    t = 50.0 / min(d.rates)
    np.testing.assert_allclose(propagate(d, V0, t), steady_state(d), atol=1e-10)


def test_steady_state_residual_and_singular():
    d = drift_matrix(0.9, 0.3, 0.05, 0.7)
    vss = steady_state(d)
    assert np.linalg.norm(d.A @ vss + d.b) <= 1e-12 * np.linalg.norm(d.b)
    with pytest.raises(NumericalError):
        steady_state(drift_matrix(1.0, 0.1, 0.0, 0.2))


def test_free_precession():
    d = drift_matrix(0.7, 0.0, 0.0, 0.4)
    for t in (0.0, 1.0, 7.5):
        np.testing.assert_allclose(propagate(d, [1, 0, 0], t), [math.cos(0.7 * t), -math.sin(0.7 * t), 0],
                                   atol=1e-14)
    with pytest.raises(ValueError):
        propagate(d, V0, -1.0)


@settings(max_examples=25, deadline=None)
@given(drifts)
def test_closed_form_matches_ode(d):
    ts = np.linspace(0.0, 10 * math.pi / d.omega_b, 15)
    ref = propagate_with_sensitivity_ode(d, ts)
    for t, w in zip(ts, ref):
        s = propagate_with_sensitivity(d, t)
        for got, want in ((s.v, w[:3]), (s.u, w[3:])):
            assert np.max(np.abs(got - want)) <= 1e-8 * max(1.0, np.max(np.abs(want)))
        assert np.linalg.norm(s.v) <= 1 + 1e-9


@settings(max_examples=25, deadline=None)
@given(drifts, st.floats(0.1, 20.0))
def test_sensitivity_matches_finite_difference(d, tau):
    t = tau / d.omega_b
    h = 1e-6 * max(d.omega_b, d.rates[1], abs(d.Omega), 1e-3)
    vp = propagate(drift_matrix(d.omega_b, d.Omega + h, d.gamma0, d.r), V0, t)
    vm = propagate(drift_matrix(d.omega_b, d.Omega - h, d.gamma0, d.r), V0, t)
    u = propagate_with_sensitivity(d, t).u
    assert np.max(np.abs((vp - vm) / (2 * h) - u)) <= 1e-6 * max(np.max(np.abs(u)), 1e-3)


def test_sensitivity_quadrature_oracle():
    d = drift_matrix(1.0, 0.2, 0.05, 0.6)
    t = 9.0
    np.testing.assert_allclose(sensitivity_quadrature(d, t), propagate_with_sensitivity(d, t).u, atol=1e-12)
    assert np.array_equal(propagate_with_sensitivity(d, 0.0).u, np.zeros(3))


def test_u_z_reproduces_coherent_population_derivative():
    wb, Om, t = 1.0, 1e-3, 2.2
    d = drift_matrix(wb, Om, 0.0, 0.5)
    h = 1e-7
    dP = (excited_population(RabiParams(wb, Om + h), t) - excited_population(RabiParams(wb, Om - h), t)) / (2 * h)
    assert propagate_with_sensitivity(d, t).u[2] == pytest.approx(2 * dP, rel=1e-6)


def test_qfi_mixed_simple_cases():
    assert qfi_mixed(BlochState(np.array([0, 0, 0.3]), np.zeros(3)), 2.0) == 0.0
    v = np.array([0.5, 0.0, 0.0])
    u = np.array([0.0, 1.0, 2.0])
    assert qfi_mixed(BlochState(v, u), 3.0) == pytest.approx(9.0 * 5.0, rel=1e-15)
    with pytest.raises(NumericalError):
        qfi_mixed(BlochState(np.array([0, 0, 1.1]), u), 1.0)


def test_coherent_limit_and_population_axis():
    wb, Om = 0.8, 0.25
    d = drift_matrix(wb, Om, 0.0, 0.3)
    p = RabiParams(wb, Om)
    for t in np.linspace(0.3, 20.0, 17):
        s = propagate_with_sensitivity(d, t)
        assert qfi_mixed(s, 1.0) == pytest.approx(float(qfi_exact(p, 1.0, t)), rel=1e-8)
        assert cfi_axis(s, [0, 0, 1], 1.0) == pytest.approx(cfi_population_exact(p, 1.0, t), rel=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3), st.floats(0.0, 0.999),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_cfi_never_exceeds_qfi_and_sld_saturates(vdir, vlen, u, ndir):
    vdir, u, n = np.array(vdir), np.array(u), np.array(ndir)
    if np.linalg.norm(vdir) < 1e-3 or np.linalg.norm(u) < 1e-3 or np.linalg.norm(n) < 1e-3:
        return
    s = BlochState(vdir / np.linalg.norm(vdir) * vlen, u)
    fq = qfi_mixed(s, 1.0)
    assert cfi_axis(s, n / np.linalg.norm(n), 1.0) <= fq + 1e-10
    ax = sld_axis(s)
    assert np.linalg.norm(ax.n) == pytest.approx(1.0, abs=1e-12)
    assert cfi_axis(s, ax.n, 1.0) == pytest.approx(fq, rel=1e-8)


def test_sld_axis_cases():
    s = BlochState(np.array([0.2, 0.0, 0.0]), np.array([0.0, 0.0, 3.0]))
    ax = sld_axis(s)
    np.testing.assert_allclose(ax.n, [0, 0, 1])
    assert ax.theta_opt == 0.0
    s = BlochState(np.zeros(3), np.array([0.0, 2.0, 0.0]))
    ax = sld_axis(s)
    assert ax.theta_opt == pytest.approx(math.pi / 2) and ax.phi_opt == pytest.approx(math.pi / 2)
    assert cfi_axis(s, [1, 0, 0], 1.0) == 0.0
    with pytest.raises(DomainError):
        sld_axis(BlochState(np.array([0, 0, 0.5]), np.zeros(3)))


def test_cfi_axis_pure_limit():
    s = BlochState(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    assert cfi_axis(s, [0, 0, 1], 1.0) == 0.0
    with pytest.raises(DomainError):
        cfi_axis(BlochState(np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0])), [0, 0, 1], 1.0)


@pytest.fixture(scope="module")
def reference():
    p = derive(SensorConfig())
    return p


def test_optimal_time_coherent_limit(reference):
    p = reference
    d = drift_matrix(p.omega_b, 0.0, 0.0, p.r)
    t_opt, val = optimal_time_decoherent(d, p.kappa_g)
    # argmin of t / sin^2(x/2) satisfies tan(x/2) = x
    x = t_opt * p.omega_b
    assert math.tan(x / 2) == pytest.approx(x, rel=1e-6)
    assert val < sensitivity_coherent(p.m, p.omega, p.r, p.omega_b)[1]
    t_pk, f_pk = first_qfi_peak(d, p.kappa_g)
    assert t_pk == pytest.approx(math.pi / p.omega_b, rel=1e-6)
    assert math.sqrt(t_pk / f_pk) == pytest.approx(sensitivity_coherent(p.m, p.omega, p.r, p.omega_b)[1],
                                                   rel=1e-10)


def test_optimal_time_pulled_earlier_and_grid_converged(reference):
    p = reference
    d = drift_matrix(p.omega_b, 0.0, 5e-3 * p.omega, p.r)
    t1, v1 = optimal_time_decoherent(d, p.kappa_g)
    assert t1 < math.pi / p.omega_b
    t2, v2 = optimal_time_decoherent(d, p.kappa_g, n_grid=4000)
    assert v2 == pytest.approx(v1, rel=1e-6)


def test_optimal_time_zero_information_error():
    d = drift_matrix(1.0, 0.0, 0.0, 0.0)
    with pytest.raises(NumericalError):
        optimal_time_decoherent(d, 0.0)


def test_crossover_squeezing():
    assert crossover_squeezing(0.0, 0.05, 0.2) is None
    stars = [crossover_squeezing(g, 0.05, 0.2) for g in (1e-4, 1e-3, 5e-3)]
    assert stars[0] > stars[1] > stars[2] > 0
    for g, r in zip((1e-4, 1e-3, 5e-3), stars):
        assert abs(xi_ratio(g, 0.05, r, 0.2) - 1) <= 1e-10
    assert crossover_squeezing(1e-8, 0.05, 0.2) is None
    assert crossover_squeezing(1.0, 0.05, 0.2) == 0.0


def test_time_series_rows(reference):
    p = reference
    d = drift_matrix(p.omega_b, 0.0, 1e-3 * p.omega, p.r)
    rows = time_series(d, p.kappa_g, [0.0, 0.01, 0.02])
    assert len(rows[0]) == len(bloch.TIME_SERIES_COLUMNS)
    assert math.isnan(rows[0][9])  # no information at t = 0
    # at Omega = 0 the z readout carries nothing and the optimal axis sits in the equator
    assert rows[1][8] == 0.0 and rows[1][10] == pytest.approx(math.pi / 2)
    assert rows[1][9] == pytest.approx(rows[1][7], rel=1e-8)
    assert qfi_at(d, p.kappa_g, 0.01) == rows[1][7]
