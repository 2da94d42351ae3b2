"""Fixed-step closed-loop engine: plant, controllers, mass estimator and observers."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .control import (MassEstimatorState, altitude_control, attitude_control_pitch,
                      attitude_control_roll, attitude_control_yaw, lyapunov_v1, lyapunov_v2,
                      mass_adaptation_derivative, sliding_surface)
from .dynamics import (NO_DISTURBANCE, AngleSingularity, ControlVector, RigidBodyState, allocate,
                       controls_from_rotors, gyro_residual, state_derivative)
from .observer import attitude_drifts, observer_derivative, super_twisting_derivative
from .scenario import OBSERVED_AXES, Scenario, validate
from .signals import eval_disturbance, eval_reference, noise_block

STATE_NAMES = RigidBodyState._fields
OBS_NAMES = ("z_hat", "z_dot_hat", "phi_hat", "phi_dot_hat",
             "theta_hat", "theta_dot_hat", "psi_hat", "psi_dot_hat")

#: CSV column order; time first.
COLUMNS = (
    "t", *STATE_NAMES,
    "z_meas", "phi_meas", "theta_meas", "psi_meas",
    *OBS_NAMES,
    "z_ref", "z_ref_rate", "z_ref_accel",
    "phi_ref", "phi_ref_rate", "phi_ref_accel",
    "theta_ref", "theta_ref_rate", "theta_ref_accel",
    "psi_ref", "psi_ref_rate", "psi_ref_accel",
    "s_z", "s_phi", "s_theta", "s_psi",
    "u1", "u2", "u3", "u4",
    "w1", "w2", "w3", "w4", "w_bar",
    "m_hat", "m_true", "v1", "v2",
    "xi_z", "z_ddot", "obs_z_dx1", "obs_z_dx2",
    "tilt_guard", "saturated", "infeasible", "on_estimates",
)
FLAG_COLUMNS = ("tilt_guard", "saturated", "infeasible", "on_estimates")

_N_PLANT = 12
_I_MHAT = 12
_I_OBS = 13
_N_STATE = 21


class NonFiniteState(ArithmeticError):
    def __init__(self, step: int, t: float):
        super().__init__(f"non-finite state at step {step} (t = {t:.6g} s)")
        self.step = step
        self.t = t


@dataclass
class TimeSeriesLog:
    """Column-oriented record of a run. ``columns`` follows :data:`COLUMNS`."""

    columns: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.columns["t"])

    @property
    def dt(self) -> float:
        t = self.columns["t"]
        return float(t[1] - t[0]) if len(t) > 1 else float(self.meta.get("dt", 0.0))


def rk4_step(f: Callable[[float, Sequence[float]], Sequence[float]], state: Sequence[float],
             t: float, dt: float, k1: Sequence[float] | None = None, step: int = 0) -> list[float]:
    """Classical fourth-order Runge-Kutta step.

    ``k1`` may be supplied when the caller already evaluated ``f(t, state)``.
    Raises :class:`NonFiniteState` if any stage or the result is not finite.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    h2 = 0.5 * dt
    if k1 is None:
        k1 = f(t, state)
    y2 = [y + h2 * k for y, k in zip(state, k1)]
    k2 = f(t + h2, y2)
    y3 = [y + h2 * k for y, k in zip(state, k2)]
    k3 = f(t + h2, y3)
    y4 = [y + dt * k for y, k in zip(state, k3)]
    k4 = f(t + dt, y4)
    h6 = dt / 6.0
    out = [y + h6 * (a + 2.0 * b + 2.0 * c + d) for y, a, b, c, d in zip(state, k1, k2, k3, k4)]
    if not all(map(math.isfinite, out)):
        raise NonFiniteState(step, t)
    return out


class _ClosedLoop:
    """Right-hand side of the joint plant / estimator / observer system.

    Joint state layout: 12 plant states, m_hat, then (x1_hat, x2_hat) for
    z, phi, theta, psi.
    """

    def __init__(self, sc: Scenario):
        self.p = sc.params
        self.gains = sc.gains
        ad = sc.adaptation
        self.adapt = ad.enabled
        self.est0 = MassEstimatorState(sc.m_hat0, ad.gamma, ad.m_min, ad.m_max)
        self.obs_gains = tuple(sc.observer.gains[a] for a in OBSERVED_AXES)
        self.in_loop = sc.observer.in_loop
        self.t_obs = sc.observer.t_obs
        self.reference = sc.reference
        self.disturbance = sc.disturbance or None
        self.mass = sc.mass_schedule
        self.w_max = sc.w_max
        self.u1_max = 4.0 * self.p.b * sc.w_max * sc.w_max
        self.eps_tilt = sc.eps_tilt
        self.eps_angle = sc.eps_angle
        self.open_loop = None if sc.open_loop_controls is None else ControlVector(*sc.open_loop_controls)
        # per-step inputs, set by the driver before each step
        self.noise = (0.0, 0.0, 0.0, 0.0)
        self.w_bar_prev = 0.0

    def evaluate(self, t: float, y: Sequence[float], full: bool = False):
        p, g = self.p, self.gains
        plant = RigidBodyState(*y[:_N_PLANT])
        m_hat = y[_I_MHAT]
        z1, z2, phi1, phi2, th1, th2, psi1, psi2 = obs = y[_I_OBS:]
        ref = eval_reference(self.reference, t)
        n = self.noise
        meas = (plant.z + n[0], plant.phi + n[1], plant.theta + n[2], plant.psi + n[3])

        on_estimates = self.in_loop and t >= self.t_obs
        if on_estimates:
            fed = plant._replace(z=z1, z_dot=z2, phi=phi1, phi_dot=phi2,
                                 theta=th1, theta_dot=th2, psi=psi1, psi_dot=psi2)
        else:
            fed = plant

        est = self.est0.with_estimate(m_hat)
        if self.open_loop is None:
            alt = altitude_control(fed, ref.z, est, g.z, p, self.eps_tilt, self.u1_max)
            roll = attitude_control_roll(fed, ref.phi, self.w_bar_prev, p, g.phi)
            pitch = attitude_control_pitch(fed, ref.theta, self.w_bar_prev, p, g.theta)
            yaw = attitude_control_yaw(fed, ref.psi, p, g.psi)
            command = ControlVector(alt.u1, roll.u, pitch.u, yaw.u)
            s_z, tilt_guard = alt.s_z, alt.tilt_guard
        else:
            command = self.open_loop
            tilt_guard = False
            s_z = sliding_surface(fed.z - ref.z.value, fed.z_dot - ref.z.rate, g.z.lam)

        alloc = allocate(command, p, self.w_max)
        applied = command if not (alloc.infeasible or alloc.saturated) else controls_from_rotors(alloc.speeds, p)
        w_bar = gyro_residual(alloc.speeds)

        m_true = self.mass.at(t)
        xi = NO_DISTURBANCE if self.disturbance is None else eval_disturbance(self.disturbance, t)
        dplant = state_derivative(plant, applied, w_bar, p, xi, m=m_true, eps_angle=self.eps_angle)

        if self.adapt:
            dm_hat = mass_adaptation_derivative(s_z, ref.z, fed.z_dot - ref.z.rate, g.z, est, p.g)
        else:
            dm_hat = 0.0

        gz, gphi, gth, gpsi = self.obs_gains
        dz = observer_derivative((z1, z2), meas[0], applied.u1,
                                 (phi1, th1), est.m_hat, p, gz)
        drifts = attitude_drifts((phi2, th2, psi2), applied[1:], w_bar, p)
        dphi = super_twisting_derivative((phi1, phi2), meas[1], drifts[0], gphi)
        dth = super_twisting_derivative((th1, th2), meas[2], drifts[1], gth)
        dpsi = super_twisting_derivative((psi1, psi2), meas[3], drifts[2], gpsi)

        dy = [*dplant, dm_hat, *dz, *dphi, *dth, *dpsi]
        if not full:
            return dy
        if self.open_loop is None:
            surfaces = (s_z, roll.s, pitch.s, yaw.s)
        else:
            surfaces = (s_z, *(sliding_surface(getattr(fed, a) - r.value,
                                               getattr(fed, a + "_dot") - r.rate, getattr(g, a).lam)
                               for a, r in zip(OBSERVED_AXES[1:], ref[1:])))
        record = (
            t, *plant, *meas, *obs, *ref.z, *ref.phi, *ref.theta, *ref.psi, *surfaces,
            *command, *alloc.speeds, w_bar,
            m_hat, m_true, lyapunov_v1(s_z), lyapunov_v2(s_z, m_true, m_hat, est.gamma),
            xi.z, dplant.z_ddot, dz[0], dz[1],
            float(tilt_guard), float(alloc.saturated), float(alloc.infeasible), float(on_estimates),
        )
        return dy, record, w_bar


def initial_joint_state(sc: Scenario) -> list[float]:
    s0 = sc.initial_state
    obs = []
    for axis in OBSERVED_AXES:
        dx1, dx2 = sc.observer.initial_offset.get(axis, (0.0, 0.0))
        obs += [getattr(s0, axis) + dx1, getattr(s0, axis + "_dot") + dx2]
    return [*s0, sc.m_hat0, *obs]


def run_scenario(sc: Scenario) -> TimeSeriesLog:
    """Integrate ``sc`` and return one record per grid point ``t_k = k dt``.

    Controls, adaptation and observer injections are re-evaluated at every
    Runge-Kutta stage. Noise samples and the gyroscopic residual fed to the
    attitude laws are held over each step.
    """
    validate(sc)
    started = time.perf_counter()
    loop = _ClosedLoop(sc)
    n = sc.n_steps
    dt = sc.dt
    noise = np.column_stack([noise_block(sc.seed, ch, n + 1, getattr(sc.noise, axis))
                             for ch, axis in enumerate(OBSERVED_AXES)]).tolist()
    ad = sc.adaptation
    y = initial_joint_state(sc)
    records = []

    for k in range(n + 1):
        t = k * dt
        loop.noise = noise[k]
        try:
            k1, record, w_bar = loop.evaluate(t, y, full=True)
            records.append(record)
            if k == n:
                break
            y = rk4_step(loop.evaluate, y, t, dt, k1=k1, step=k)
        except AngleSingularity as exc:
            exc.step, exc.t = k, t
            raise
        y[_I_MHAT] = min(max(y[_I_MHAT], ad.m_min), ad.m_max)
        loop.w_bar_prev = w_bar

    data = np.array(records, dtype=float)
    columns = {name: data[:, i] for i, name in enumerate(COLUMNS)}
    meta = {"dt": dt, "duration": sc.duration, "seed": sc.seed,
            "wall_time": time.perf_counter() - started}
    return TimeSeriesLog(columns, meta)
