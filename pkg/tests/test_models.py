import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from pllsim.core import PhaseState, PllParams, SignalState
from pllsim.models import (
    pd_averaged,
    pd_instant,
    phase_g,
    phase_jacobian,
    phase_rhs,
    phase_rhs_kernel,
    signal_g,
    signal_rhs,
    signal_rhs_kernel,
)

angles = st.floats(-2 * math.pi, 2 * math.pi)
xs = st.floats(-1.0, 1.0)


def carrier_mean(theta_delta):
    """Mean of sin(theta2 + theta_delta)*cos(theta2) over one VCO period."""
    val, _ = quad(lambda t2: math.sin(t2 + theta_delta) * math.cos(t2), 0.0, 2 * math.pi,
                  epsabs=1e-13, epsrel=1e-13)
    return val / (2 * math.pi)


def test_pd_instant_values():
    assert pd_instant(0.0, 0.0) == 0.0
    assert pd_instant(math.pi / 2, 0.0) == 1.0
    assert pd_instant(math.pi / 2, math.pi / 3) == pytest.approx(0.5, abs=1e-15)


def test_pd_averaged_values():
    assert pd_averaged(0.0) == 0.0
    assert pd_averaged(math.pi / 2) == pytest.approx(carrier_mean(math.pi / 2), abs=1e-12)
    assert pd_averaged(math.pi / 2) == 0.5


@given(angles)
def test_pd_averaged_odd(theta):
    assert pd_averaged(-theta) == -pd_averaged(theta)
    assert abs(pd_averaged(theta)) <= 0.5


@given(angles, angles)
def test_pd_instant_bounded(a, b):
    assert abs(pd_instant(a, b)) <= 1.0


def test_averaging_matches_quadrature():
    for theta in np.linspace(-math.pi, math.pi, 25):
        assert pd_averaged(theta) == pytest.approx(carrier_mean(theta), abs=1e-10)


def test_signal_rhs_examples(signal_params):
    f = signal_params.filter
    d = signal_rhs(SignalState(0.0, 0.0, 0.0), signal_params)
    assert (d.x, d.theta1, d.theta2) == (0.0, 100000.0, 99905.0)
    d = signal_rhs(SignalState(0.0, math.pi / 2, 0.0), signal_params)
    assert d.x == pytest.approx(f.b, abs=1e-15)
    assert d.x == pytest.approx(0.7077409, abs=1e-7)
    assert d.theta2 == pytest.approx(99905.0 + 250.0 * f.h, abs=1e-9)
    assert d.theta2 == pytest.approx(99978.065, abs=1e-3)
    d = signal_rhs(SignalState(0.1, 0.0, math.pi / 2), signal_params)
    assert d.x == pytest.approx(-1.5797788, abs=1e-7)
    assert d.theta2 == pytest.approx(100299.945, abs=1e-3)


def test_phase_rhs_examples(signal_params):
    d = phase_rhs(PhaseState(0.0, 0.0), signal_params)
    assert (d.x, d.theta_delta) == (0.0, 95.0)
    p4 = PllParams.from_lead_lag(10000.0, 9821.1, 500.0, 0.0448, 0.0185)
    s = 2 * p4.omega_delta / p4.L
    d = phase_rhs(PhaseState(0.0448 * p4.omega_delta / p4.L, math.asin(s)), p4)
    assert abs(d.x) < 1e-12 and abs(d.theta_delta) < 1e-10


@given(xs, angles, st.floats(-300, 300))
def test_phase_rhs_odd_symmetry(x, theta, wd):
    p = PllParams.from_lead_lag(10000.0, 10000.0 - wd, 500.0, 0.0448, 0.0185)
    q = p.with_detuning(-p.omega_delta)
    a = phase_rhs(PhaseState(x, theta), p)
    b = phase_rhs(PhaseState(-x, -theta), q)
    assert b.x == pytest.approx(-a.x, abs=1e-12)
    assert b.theta_delta == pytest.approx(-a.theta_delta, abs=1e-12)


@given(xs, angles, angles)
def test_kernels_match_reference_rhs(x, t1, t2):
    p = PllParams.from_lead_lag(100000.0, 99905.0, 250.0, 0.0448, 0.0185)
    ref = signal_rhs(SignalState(x, t1, t2), p).as_array()
    np.testing.assert_allclose(signal_rhs_kernel(0.0, np.array([x, t1, t2]), p.as_vector()), ref,
                               rtol=1e-15, atol=1e-12)
    ref = phase_rhs(PhaseState(x, t1), p).as_array()
    np.testing.assert_allclose(phase_rhs_kernel(0.0, np.array([x, t1]), p.as_vector()), ref,
                               rtol=1e-15, atol=1e-12)


@given(xs, angles, angles)
def test_models_consistent_under_averaging(x, t1, t2):
    p = PllParams.from_lead_lag(100000.0, 99905.0, 250.0, 0.0448, 0.0185)
    f = p.filter
    phi = pd_averaged(t1 - t2)
    dtheta2 = p.omega2_free + p.L * (f.c * x + f.h * phi)
    assert p.omega1 - dtheta2 == pytest.approx(phase_rhs(PhaseState(x, t1 - t2), p).theta_delta,
                                               abs=1e-9)


def test_filter_output_samples(signal_params):
    states = np.array([[0.1, 0.0, 0.0], [0.0, math.pi / 2, 0.0]])
    f = signal_params.filter
    np.testing.assert_allclose(signal_g(states, signal_params), [f.c * 0.1, f.h])
    np.testing.assert_allclose(phase_g(states[:, :2], signal_params), [f.c * 0.1, 0.5 * f.h])


@given(xs, angles)
def test_jacobian_matches_finite_differences(x, theta):
    p = PllParams.from_lead_lag(10000.0, 9821.1, 500.0, 0.0448, 0.0185)
    J = phase_jacobian(x, theta, p)
    eps = 1e-6
    num = np.empty((2, 2))
    for j, (dx, dth) in enumerate([(eps, 0.0), (0.0, eps)]):
        hi = phase_rhs(PhaseState(x + dx, theta + dth), p).as_array()
        lo = phase_rhs(PhaseState(x - dx, theta - dth), p).as_array()
        num[:, j] = (hi - lo) / (2 * eps)
    np.testing.assert_allclose(J, num, rtol=1e-6, atol=1e-5)
