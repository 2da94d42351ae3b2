import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smcquad.acceptance import adaptive_altitude_scenario, closed_loop_residuals
from smcquad.control import (AxisControllerConfig, AxisReference, MassEstimatorState, altitude_control,
                             attitude_control_pitch, attitude_control_roll, attitude_control_yaw,
                             closed_loop_residual, lyapunov_v1, lyapunov_v2, mass_adaptation_derivative,
                             sliding_surface)
from smcquad.dynamics import QuadrotorParams, RigidBodyState, state_derivative, ControlVector
from smcquad.simulation import run_scenario

P = QuadrotorParams()
CFG = AxisControllerConfig(lam=2.0, k=3.0)
HOLD = AxisReference(0.0, 0.0, 0.0)
finite = st.floats(-10, 10)


@pytest.mark.parametrize("e, e_dot, lam, s", [(0, 0, 7.0, 0), (1, 0, 2, 2), (0.5, -1, 2, 0)])
def test_sliding_surface(e, e_dot, lam, s):
    assert sliding_surface(e, e_dot, lam) == s


def test_config_validation():
    with pytest.raises(ValueError):
        AxisControllerConfig(lam=0.0)
    with pytest.raises(ValueError):
        MassEstimatorState(m_hat=3.0)


def test_hover_thrust_is_weight():
    cmd = altitude_control(RigidBodyState(), HOLD, MassEstimatorState(0.486), CFG, P)
    assert cmd.u1 == pytest.approx(4.7628, rel=1e-12)
    assert cmd.s_z == 0.0 and not cmd.tilt_guard


def test_thrust_linear_in_mass_estimate():
    cmd = altitude_control(RigidBodyState(), HOLD, MassEstimatorState(0.243), CFG, P)
    assert cmd.u1 == pytest.approx(2.3814, rel=1e-12)


def test_thrust_below_reference():
    cmd = altitude_control(RigidBodyState(z=-0.5), HOLD, MassEstimatorState(0.486), CFG, P)
    assert cmd.s_z == -1.0
    assert cmd.u1 == pytest.approx(6.2208, rel=1e-12)


def test_tilt_guard_and_clamp():
    tilted = altitude_control(RigidBodyState(phi=1.5), HOLD, MassEstimatorState(0.486), CFG, P)
    assert tilted.tilt_guard
    assert tilted.u1 == pytest.approx(0.486 * 9.8 / 0.1)
    assert altitude_control(RigidBodyState(z=50.0), HOLD, MassEstimatorState(0.486), CFG, P).u1 == 0.0
    capped = altitude_control(RigidBodyState(z=-50.0), HOLD, MassEstimatorState(0.486), CFG, P, u1_max=10.0)
    assert capped.u1 == 10.0


def test_attitude_laws_vanish_at_rest():
    s = RigidBodyState()
    assert attitude_control_roll(s, HOLD, 0.0, P, CFG).u == 0.0
    assert attitude_control_pitch(s, HOLD, 0.0, P, CFG).u == 0.0
    assert attitude_control_yaw(s, HOLD, P, CFG).u == 0.0


def test_roll_error_case():
    cmd = attitude_control_roll(RigidBodyState(phi=0.1), HOLD, 0.0, P, CFG)
    assert cmd.s == pytest.approx(0.2)
    assert cmd.u == pytest.approx(-9.168e-3, rel=1e-12)


def test_roll_cross_rate_case_cancels_coupling():
    s = RigidBodyState(theta_dot=1.0, psi_dot=1.0)
    cmd = attitude_control_roll(s, HOLD, 0.0, P, CFG)
    assert cmd.u == pytest.approx(1.532e-2, rel=1e-12)
    d = state_derivative(s, ControlVector(0.0, cmd.u, 0.0, 0.0), 0.0, P)
    assert d.phi_ddot == pytest.approx(0.0, abs=1e-15)


def test_pitch_mirrors_roll():
    roll = attitude_control_roll(RigidBodyState(phi=0.1), HOLD, 0.0, P, CFG)
    pitch = attitude_control_pitch(RigidBodyState(theta=0.1), HOLD, 0.0, P, CFG)
    assert pitch.u == pytest.approx(roll.u, rel=1e-15)


def test_pitch_cross_rate_case_cancels_coupling():
    s = RigidBodyState(phi_dot=1.0, psi_dot=1.0)
    cmd = attitude_control_pitch(s, HOLD, 40.0, P, CFG)
    d = state_derivative(s, ControlVector(0.0, 0.0, cmd.u, 0.0), 40.0, P)
    assert d.theta_ddot == pytest.approx(0.0, abs=1e-14)


def test_yaw_error_case():
    assert attitude_control_yaw(RigidBodyState(psi=0.2), HOLD, P, CFG).u == pytest.approx(-9.18e-3, rel=1e-12)


@given(finite, finite, finite, finite, finite, finite, st.floats(-500, 500))
def test_attitude_laws_enforce_reaching_law(phi, theta, phid, thetad, psid, acc, w_bar):
    # with the commanded moments the model gives S' = -K S on each attitude axis
    s = RigidBodyState(phi=phi / 10, theta=theta / 10, phi_dot=phid, theta_dot=thetad, psi_dot=psid)
    ref = AxisReference(0.05, 0.1, acc)
    u2 = attitude_control_roll(s, ref, w_bar, P, CFG)
    u3 = attitude_control_pitch(s, ref, w_bar, P, CFG)
    u4 = attitude_control_yaw(s, ref, P, CFG)
    d = state_derivative(s, ControlVector(0.0, u2.u, u3.u, u4.u), w_bar, P)
    for cmd, acc_axis, rate in ((u2, d.phi_ddot, phid), (u3, d.theta_ddot, thetad), (u4, d.psi_ddot, psid)):
        s_dot = (acc_axis - ref.accel) + CFG.lam * (rate - ref.rate)
        assert s_dot == pytest.approx(-CFG.k * cmd.s, abs=1e-9)


def test_adaptation_examples():
    est = MassEstimatorState(0.486, gamma=0.05)
    assert mass_adaptation_derivative(0.0, HOLD, 0.0, CFG, est) == 0.0
    assert mass_adaptation_derivative(0.1, HOLD, 0.0, CFG, est) == pytest.approx(-0.049, rel=1e-12)
    at_max = MassEstimatorState(2.0, gamma=0.05)
    assert mass_adaptation_derivative(-0.1, HOLD, 0.0, CFG, at_max) == 0.0


@given(st.floats(0.1, 2.0), finite, finite, finite, st.floats(1e-3, 10))
def test_projection_never_pushes_outside(m_hat, s_z, e_dot, acc, gamma):
    est = MassEstimatorState(m_hat, gamma=gamma)
    rate = mass_adaptation_derivative(s_z, AxisReference(0.0, 0.0, acc), e_dot, CFG, est)
    if m_hat >= est.m_max:
        assert rate <= 0
    if m_hat <= est.m_min:
        assert rate >= 0
    assert est.m_min <= est.with_estimate(m_hat + 100 * rate).m_hat <= est.m_max


def test_lyapunov_examples():
    assert [lyapunov_v1(s) for s in (0.0, 2.0, -2.0)] == [0.0, 2.0, 2.0]
    assert lyapunov_v2(0.0, 0.486, 0.486, 0.5) == 0.0
    assert lyapunov_v2(1.0, 0.486, 0.486, 0.05) == pytest.approx(0.243)


@given(finite, st.floats(0.1, 2), st.floats(0.1, 2), st.floats(1e-3, 10))
def test_lyapunov_v2_nonnegative(s, m, m_hat, gamma):
    assert lyapunov_v2(s, m, m_hat, gamma) >= 0.0


@given(finite, finite, finite)
def test_surface_is_linear(e, e_dot, lam):
    assert sliding_surface(2 * e, 2 * e_dot, lam) == pytest.approx(2 * sliding_surface(e, e_dot, lam),
                                                                     rel=1e-12, abs=1e-12)


def test_residual_vanishes_on_reaching_law_with_exact_mass():
    r = closed_loop_residual(-3.0 * 0.4 / 0.486, 0.4, 0.486, 0.486, HOLD, 0.0, CFG)
    assert r == pytest.approx(0.0, abs=1e-15)


def test_residual_nonzero_off_the_loop():
    assert closed_loop_residual(1.0, 0.5, 0.486, 0.3, AxisReference(0, 0, 1.0), 0.2, CFG) != 0.0


def test_logged_run_satisfies_estimate_scaled_error_balance():
    # the thrust law multiplies the reaching term by m_hat, so this is the balance it enforces
    _, consistent = closed_loop_residuals(run_scenario(adaptive_altitude_scenario()))
    assert np.max(np.abs(consistent)) < 1e-4
