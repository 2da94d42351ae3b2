import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smcquad import oracles
from smcquad.dynamics import (AngleSingularity, ControlVector, DisturbanceSample, InfeasibleAllocation,
                              QuadrotorParams, RigidBodyState, RotorSpeeds, SaturatedAllocation,
                              allocate, controls_from_rotors, gyro_residual, rotors_from_controls,
                              state_derivative)

P = QuadrotorParams()
speeds = st.floats(0.0, 1000.0)
rotor_speeds = st.builds(RotorSpeeds, speeds, speeds, speeds, speeds)


def test_table_defaults():
    assert (P.m, P.g, P.l, P.b, P.d) == (0.486, 9.8, 0.25, 2.98e-5, 3.23e-7)
    assert (P.i_xx, P.i_yy, P.i_zz, P.j_r) == (3.82e-3, 3.82e-3, 7.65e-3, 2.83e-5)


def test_params_reject_nonpositive():
    with pytest.raises(ValueError):
        QuadrotorParams(m=0.0)


def test_zero_rotors_give_zero_controls():
    assert controls_from_rotors(RotorSpeeds(0, 0, 0, 0), P) == (0.0, 0.0, 0.0, 0.0)


def test_equal_rotors_give_pure_thrust():
    u = controls_from_rotors(RotorSpeeds(100, 100, 100, 100), P)
    assert u.u1 == pytest.approx(1.192, rel=1e-12)
    assert (u.u2, u.u3, u.u4) == (0.0, 0.0, 0.0)


def test_single_rotor_controls():
    u = controls_from_rotors(RotorSpeeds(0, 100, 0, 0), P)
    np.testing.assert_allclose(u, (0.298, 0.0, -0.298, -3.23e-3), rtol=1e-12, atol=1e-15)


def test_rotors_from_hover_thrust():
    w = rotors_from_controls(ControlVector(4 * P.b * 100.0 ** 2, 0, 0, 0), P)
    np.testing.assert_allclose(w, 100.0, rtol=1e-14)
    assert rotors_from_controls(ControlVector(0, 0, 0, 0), P) == (0.0, 0.0, 0.0, 0.0)


def test_pure_moment_is_infeasible():
    with pytest.raises(InfeasibleAllocation) as info:
        rotors_from_controls(ControlVector(0, 1, 0, 0), P)
    assert min(info.value.clamped) >= 0.0


def test_over_speed_saturates():
    with pytest.raises(SaturatedAllocation) as info:
        rotors_from_controls(ControlVector(4 * P.b * 1200.0 ** 2, 0, 0, 0), P)
    assert max(info.value.clamped) == 1000.0


def test_allocate_flags_without_raising():
    alloc = allocate(ControlVector(0, 1, 0, 0), P)
    assert alloc.infeasible and not alloc.saturated
    assert all(w >= 0 for w in alloc.speeds)


@pytest.mark.parametrize("w, expected", [((7, 7, 7, 7), 0), ((1, 2, 3, 4), -2), ((100, 0, 0, 0), 100)])
def test_gyro_residual(w, expected):
    assert gyro_residual(RotorSpeeds(*w)) == expected


def test_hover_is_a_fixed_point():
    d = state_derivative(RigidBodyState(z=1.0), ControlVector(P.m * P.g, 0, 0, 0), 0.0, P)
    assert d.z_ddot == pytest.approx(0.0, abs=1e-15)
    assert all(v == 0.0 for name, v in d._asdict().items() if name != "z_ddot")


@pytest.mark.parametrize("psi", [0.0, 0.7, -2.0])
def test_free_fall(psi):
    d = state_derivative(RigidBodyState(psi=psi), ControlVector(0, 0, 0, 0), 0.0, P)
    assert (d.x_ddot, d.y_ddot, d.z_ddot) == (0.0, 0.0, -9.8)


def test_disturbance_adds_to_accelerations():
    xi = DisturbanceSample(0.1, -0.2, 0.3, 0.4, -0.5, 0.6)
    s = RigidBodyState(phi=0.1, theta=0.2, phi_dot=0.3)
    u = ControlVector(5.0, 0.01, -0.02, 0.001)
    base = np.array(state_derivative(s, u, 50.0, P))
    with_xi = np.array(state_derivative(s, u, 50.0, P, xi))
    np.testing.assert_allclose(with_xi[6:] - base[6:], xi, atol=1e-14)


def test_pitch_singularity_raises():
    with pytest.raises(AngleSingularity):
        state_derivative(RigidBodyState(theta=math.pi / 2), ControlVector(5, 0, 0, 0), 0.0, P)


angles = st.floats(-1.2, 1.2)
values = st.floats(-5, 5)


@given(st.lists(values, min_size=12, max_size=12), angles, angles, angles,
       st.floats(0, 20), st.floats(-1, 1), st.floats(-1, 1), st.floats(-0.05, 0.05),
       st.floats(-500, 500), st.floats(0.2, 1.5))
def test_matches_vector_oracle(state, phi, theta, psi, u1, u2, u3, u4, w_bar, m):
    state[3:6] = phi, theta, psi
    u = ControlVector(u1, u2, u3, u4)
    got = np.array(state_derivative(RigidBodyState(*state), u, w_bar, P, m=m))
    want = oracles.accelerations(state, u, w_bar, (P.i_xx, P.i_yy, P.i_zz), m, P.l, P.j_r, P.g)
    np.testing.assert_allclose(got[:6], state[6:], rtol=0, atol=0)
    np.testing.assert_allclose(got[6:], want, rtol=1e-12, atol=1e-12)


@given(rotor_speeds)
def test_mixing_round_trip_in_squared_speeds(w):
    back = np.array(allocate(controls_from_rotors(w, P), P).squared)
    assert np.max(np.abs(back - np.square(w))) <= 1e-10 * max(max(w), 1.0) ** 2


@given(rotor_speeds.filter(lambda w: min(w) >= 1e-3 * max(w) and max(w) > 0))
def test_mixing_round_trip_in_speeds(w):
    # the square root amplifies round-off near zero speed, so near-idle rotors are excluded
    back = rotors_from_controls(controls_from_rotors(w, P), P)
    assert np.max(np.abs(np.subtract(back, w))) <= 1e-10 * max(w)


@given(rotor_speeds)
def test_closed_form_inverse_matches_linear_solve(w):
    u = controls_from_rotors(w, P)
    sq = np.array(allocate(u, P).squared)
    np.testing.assert_allclose(sq, oracles.squared_speeds(u, P.b, P.d), atol=1e-10 * max(max(w), 1.0) ** 2)


@given(rotor_speeds, st.integers(0, 3), st.floats(0.1, 100))
def test_thrust_monotone_in_each_rotor(w, i, dw):
    faster = list(w)
    faster[i] += dw
    assert controls_from_rotors(RotorSpeeds(*faster), P).u1 > controls_from_rotors(w, P).u1


@given(st.floats(-1, 1), st.floats(-5, 5), st.floats(-5, 5), st.floats(-0.02, 0.02))
def test_roll_pitch_mirror(angle, rate_a, rate_b, moment):
    # swapping the roll and pitch channels mirrors the accelerations when i_xx = i_yy
    d1 = state_derivative(RigidBodyState(phi_dot=rate_a, theta_dot=rate_b), ControlVector(0, moment, 0, 0),
                          0.0, P)
    d2 = state_derivative(RigidBodyState(phi_dot=rate_b, theta_dot=rate_a), ControlVector(0, 0, moment, 0),
                          0.0, P)
    assert d1.phi_ddot == pytest.approx(d2.theta_ddot, abs=1e-12)
    assert d1.theta_ddot == pytest.approx(d2.phi_ddot, abs=1e-12)
