"""Nonlinear quadrotor model, rotor mixing and control allocation.

State ordering used throughout the package::

    x, y, z, phi, theta, psi, x_dot, y_dot, z_dot, phi_dot, theta_dot, psi_dot
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

EPS_ANGLE = 1e-3
W_MAX = 1000.0


class AngleSingularity(ArithmeticError):
    """Raised when pitch gets too close to +/- pi/2 for the Euler model."""

    def __init__(self, theta: float, eps_angle: float):
        super().__init__(f"|theta| = {abs(theta):.6g} rad violates the Euler guard "
                         f"(limit pi/2 - {eps_angle:g})")
        self.theta = theta
        self.eps_angle = eps_angle


class InfeasibleAllocation(ValueError):
    """Some rotor would need a negative squared speed."""

    def __init__(self, rotor: int, deficit: float, clamped: "RotorSpeeds"):
        super().__init__(f"rotor {rotor} needs w^2 = {-deficit:.6g} < 0")
        self.rotor = rotor
        self.deficit = deficit
        self.clamped = clamped


class SaturatedAllocation(ValueError):
    """Some rotor would exceed ``w_max``; ``clamped`` holds the realisable speeds."""

    def __init__(self, rotors: tuple[int, ...], clamped: "RotorSpeeds"):
        super().__init__(f"rotor(s) {', '.join(map(str, rotors))} exceed w_max")
        self.rotors = rotors
        self.clamped = clamped


@dataclass(frozen=True)
class QuadrotorParams:
    """Physical constants. Defaults are the published airframe values."""

    m: float = 0.486
    l: float = 0.25
    i_xx: float = 3.82e-3
    i_yy: float = 3.82e-3
    i_zz: float = 7.65e-3
    d: float = 3.23e-7
    b: float = 2.98e-5
    j_r: float = 2.83e-5
    g: float = 9.8

    def __post_init__(self):
        for name, value in vars(self).items():
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"QuadrotorParams.{name} must be finite and > 0, got {value!r}")


class RigidBodyState(NamedTuple):
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0
    x_dot: float = 0.0
    y_dot: float = 0.0
    z_dot: float = 0.0
    phi_dot: float = 0.0
    theta_dot: float = 0.0
    psi_dot: float = 0.0


class StateDerivative(NamedTuple):
    x_dot: float
    y_dot: float
    z_dot: float
    phi_dot: float
    theta_dot: float
    psi_dot: float
    x_ddot: float
    y_ddot: float
    z_ddot: float
    phi_ddot: float
    theta_ddot: float
    psi_ddot: float


class ControlVector(NamedTuple):
    u1: float
    u2: float
    u3: float
    u4: float


class RotorSpeeds(NamedTuple):
    w1: float
    w2: float
    w3: float
    w4: float


class DisturbanceSample(NamedTuple):
    """Additive accelerations (m/s^2 or rad/s^2) per axis."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0


NO_DISTURBANCE = DisturbanceSample()


def controls_from_rotors(w: RotorSpeeds, p: QuadrotorParams) -> ControlVector:
    s1, s2, s3, s4 = (wi * wi for wi in w)
    return ControlVector(
        p.b * (s1 + s2 + s3 + s4),
        p.b * (-s1 + s3),
        p.b * (-s2 + s4),
        p.d * (s1 - s2 + s3 - s4),
    )


class Allocation(NamedTuple):
    speeds: RotorSpeeds
    squared: tuple[float, float, float, float]
    infeasible: bool
    saturated: bool


def allocate(u: ControlVector, p: QuadrotorParams, w_max: float = W_MAX) -> Allocation:
    """Invert the mixing matrix without raising.

    Squared speeds outside ``[0, w_max**2]`` are clamped and reported through
    the ``infeasible`` / ``saturated`` flags.
    """
    u1, u2, u3, u4 = u
    total = u1 / p.b
    yaw = u4 / p.d
    pair13 = 0.5 * (total + yaw)
    pair24 = 0.5 * (total - yaw)
    roll = u2 / p.b
    pitch = u3 / p.b
    sq = (0.5 * (pair13 - roll), 0.5 * (pair24 - pitch),
          0.5 * (pair13 + roll), 0.5 * (pair24 + pitch))
    w_max_sq = w_max * w_max
    infeasible = min(sq) < 0.0
    saturated = max(sq) > w_max_sq
    if infeasible or saturated:
        speeds = RotorSpeeds(*(math.sqrt(min(max(s, 0.0), w_max_sq)) for s in sq))
    else:
        speeds = RotorSpeeds(math.sqrt(sq[0]), math.sqrt(sq[1]), math.sqrt(sq[2]), math.sqrt(sq[3]))
    return Allocation(speeds, sq, infeasible, saturated)


def rotors_from_controls(u: ControlVector, p: QuadrotorParams, w_max: float = W_MAX) -> RotorSpeeds:
    """Rotor speeds realising ``u`` exactly.

    Raises :class:`InfeasibleAllocation` or :class:`SaturatedAllocation`
    when no admissible speeds exist; both carry the clamped speeds.
    """
    alloc = allocate(u, p, w_max)
    if alloc.infeasible:
        rotor = min(range(4), key=lambda i: alloc.squared[i])
        raise InfeasibleAllocation(rotor + 1, -alloc.squared[rotor], alloc.speeds)
    if alloc.saturated:
        over = tuple(i + 1 for i, s in enumerate(alloc.squared) if s > w_max * w_max)
        raise SaturatedAllocation(over, alloc.speeds)
    return alloc.speeds


def gyro_residual(w: RotorSpeeds) -> float:
    return w[0] - w[1] + w[2] - w[3]


def state_derivative(s: RigidBodyState, u: ControlVector, w_bar: float, p: QuadrotorParams,
                     xi: DisturbanceSample = NO_DISTURBANCE, m: float | None = None,
                     eps_angle: float = EPS_ANGLE) -> StateDerivative:
    """Right-hand side of the rigid-body model.

    ``m`` overrides ``p.m`` so a time-varying true mass can be simulated.
    U4 enters the yaw channel as ``+U4 / I_zz``; the drag coefficient is
    already folded into U4 by the mixing matrix.
    """
    x, y, z, phi, theta, psi, xd, yd, zd, phid, thetad, psid = s
    if not abs(theta) < 0.5 * math.pi - eps_angle:
        raise AngleSingularity(theta, eps_angle)
    u1, u2, u3, u4 = u
    mass = p.m if m is None else m
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cpsi, spsi = math.cos(psi), math.sin(psi)
    thrust = u1 / mass
    return StateDerivative(
        xd, yd, zd, phid, thetad, psid,
        (cphi * sth * cpsi + sphi * spsi) * thrust + xi[0],
        (cphi * sth * spsi - sphi * cpsi) * thrust + xi[1],
        cphi * cth * thrust - p.g + xi[2],
        ((p.i_yy - p.i_zz) * psid * thetad - p.j_r * w_bar * thetad + p.l * u2) / p.i_xx + xi[3],
        ((p.i_zz - p.i_xx) * psid * phid - p.j_r * w_bar * phid + p.l * u3) / p.i_yy + xi[4],
        ((p.i_xx - p.i_yy) * phid * thetad + u4) / p.i_zz + xi[5],
    )
