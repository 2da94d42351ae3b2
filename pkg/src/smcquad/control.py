"""Sliding-mode control laws, mass adaptation and Lyapunov diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .dynamics import W_MAX, QuadrotorParams, RigidBodyState

EPS_TILT = 0.1


@dataclass(frozen=True)
class AxisControllerConfig:
    lam: float = 2.0
    k: float = 3.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"surface slope must be > 0, got {self.lam!r}")
        if not self.k > 0:
            raise ValueError(f"reaching gain must be > 0, got {self.k!r}")


@dataclass(frozen=True)
class MassEstimatorState:
    m_hat: float
    gamma: float = 0.5
    m_min: float = 0.1
    m_max: float = 2.0

    def __post_init__(self):
        if not 0 < self.m_min <= self.m_max:
            raise ValueError(f"need 0 < m_min <= m_max, got [{self.m_min}, {self.m_max}]")
        if not self.gamma > 0:
            raise ValueError(f"adaptation gain must be > 0, got {self.gamma!r}")
        if not self.m_min <= self.m_hat <= self.m_max:
            raise ValueError(f"m_hat={self.m_hat} outside [{self.m_min}, {self.m_max}]")

    def with_estimate(self, m_hat: float) -> "MassEstimatorState":
        """Copy with ``m_hat`` clipped into the projection interval."""
        clipped = min(max(m_hat, self.m_min), self.m_max)
        if clipped == self.m_hat:
            return self
        # skips __post_init__: the clipped copy satisfies every invariant already checked
        new = object.__new__(MassEstimatorState)
        new.__dict__.update(self.__dict__, m_hat=clipped)
        return new


class AxisReference(NamedTuple):
    value: float = 0.0
    rate: float = 0.0
    accel: float = 0.0


class ReferenceSample(NamedTuple):
    z: AxisReference = AxisReference()
    phi: AxisReference = AxisReference()
    theta: AxisReference = AxisReference()
    psi: AxisReference = AxisReference()


class SurfaceSample(NamedTuple):
    s_z: float
    s_phi: float
    s_theta: float
    s_psi: float


class AltitudeCommand(NamedTuple):
    u1: float
    s_z: float
    tilt_guard: bool


class AttitudeCommand(NamedTuple):
    u: float
    s: float


def sliding_surface(e: float, e_dot: float, lam: float) -> float:
    return e_dot + lam * e


def altitude_control(state: RigidBodyState, ref: AxisReference, est: MassEstimatorState,
                     cfg: AxisControllerConfig, p: QuadrotorParams, eps_tilt: float = EPS_TILT,
                     u1_max: float | None = None) -> AltitudeCommand:
    """Adaptive thrust law using the current mass estimate.

    The tilt factor ``cos(theta) cos(phi)`` is floored at ``eps_tilt``; when the
    floor is active the command is still returned with ``tilt_guard`` set.
    Thrust is clamped to ``[0, u1_max]`` (default ``4 b w_max^2``).
    """
    e = state.z - ref.value
    e_dot = state.z_dot - ref.rate
    s = sliding_surface(e, e_dot, cfg.lam)
    tilt = math.cos(state.theta) * math.cos(state.phi)
    guard = tilt < eps_tilt
    if guard:
        tilt = eps_tilt
    u1 = est.m_hat / tilt * (ref.accel - cfg.lam * e_dot - cfg.k * s + p.g)
    if u1_max is None:
        u1_max = 4.0 * p.b * W_MAX * W_MAX
    return AltitudeCommand(min(max(u1, 0.0), u1_max), s, guard)


def attitude_control_roll(state: RigidBodyState, ref: AxisReference, w_bar: float,
                          p: QuadrotorParams, cfg: AxisControllerConfig) -> AttitudeCommand:
    e_dot = state.phi_dot - ref.rate
    s = sliding_surface(state.phi - ref.value, e_dot, cfg.lam)
    coupling = (p.i_yy - p.i_zz) * state.psi_dot * state.theta_dot - p.j_r * w_bar * state.theta_dot
    u2 = (p.i_xx * (ref.accel - cfg.lam * e_dot - cfg.k * s) - coupling) / p.l
    return AttitudeCommand(u2, s)


def attitude_control_pitch(state: RigidBodyState, ref: AxisReference, w_bar: float,
                           p: QuadrotorParams, cfg: AxisControllerConfig) -> AttitudeCommand:
    e_dot = state.theta_dot - ref.rate
    s = sliding_surface(state.theta - ref.value, e_dot, cfg.lam)
    coupling = (p.i_zz - p.i_xx) * state.psi_dot * state.phi_dot - p.j_r * w_bar * state.phi_dot
    u3 = (p.i_yy * (ref.accel - cfg.lam * e_dot - cfg.k * s) - coupling) / p.l
    return AttitudeCommand(u3, s)


def attitude_control_yaw(state: RigidBodyState, ref: AxisReference,
                         p: QuadrotorParams, cfg: AxisControllerConfig) -> AttitudeCommand:
    e_dot = state.psi_dot - ref.rate
    s = sliding_surface(state.psi - ref.value, e_dot, cfg.lam)
    coupling = (p.i_xx - p.i_yy) * state.phi_dot * state.theta_dot
    return AttitudeCommand(p.i_zz * (ref.accel - cfg.lam * e_dot - cfg.k * s) - coupling, s)


def mass_adaptation_derivative(s_z: float, ref: AxisReference, e_dot_z: float,
                               cfg: AxisControllerConfig, est: MassEstimatorState,
                               g: float = 9.8) -> float:
    """Gradient update for the mass estimate with projection onto ``[m_min, m_max]``."""
    rate = -est.gamma * s_z * (ref.accel - cfg.lam * e_dot_z + g)
    if (est.m_hat >= est.m_max and rate > 0) or (est.m_hat <= est.m_min and rate < 0):
        return 0.0
    return rate


def lyapunov_v1(s: float) -> float:
    return 0.5 * s * s


def lyapunov_v2(s: float, m_true: float, m_hat: float, gamma: float) -> float:
    m_err = m_true - m_hat
    return 0.5 * m_true * s * s + 0.5 * m_err * m_err / gamma


def closed_loop_residual(s_dot: float, s: float, m_true: float, m_hat: float,
                         ref: AxisReference, e_dot_z: float, cfg: AxisControllerConfig,
                         g: float = 9.8) -> float:
    """``m S' + K S + (m - m_hat)(z_d'' - lam e' + g)``, the altitude error balance."""
    return (m_true * s_dot + cfg.k * s
            + (m_true - m_hat) * (ref.accel - cfg.lam * e_dot_z + g))
