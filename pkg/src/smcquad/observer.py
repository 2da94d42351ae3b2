"""Super-twisting sliding-mode observers, one per measured axis."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .dynamics import QuadrotorParams


class NonPositiveBound(ValueError):
    pass


@dataclass(frozen=True)
class ObserverGains:
    alpha: float
    beta: float
    f_plus: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha!r}")
        if not self.beta > self.f_plus > 0:
            raise ValueError(f"need beta > f_plus > 0, got beta={self.beta!r}, f_plus={self.f_plus!r}")


class SuperTwistingObserverState(NamedTuple):
    x1_hat: float = 0.0
    x2_hat: float = 0.0


def sgn(v: float) -> float:
    # sgn(0) = 0 keeps the converged fixed point stationary
    return (v > 0.0) - (v < 0.0)


def correction_terms(x1_tilde: float, gains: ObserverGains) -> tuple[float, float]:
    """Output error injections ``(alpha |e|^1/2 sgn(e), beta sgn(e))``."""
    if x1_tilde > 0.0:
        return gains.alpha * math.sqrt(x1_tilde), gains.beta
    if x1_tilde < 0.0:
        return -gains.alpha * math.sqrt(-x1_tilde), -gains.beta
    return 0.0, 0.0


def super_twisting_derivative(obs: SuperTwistingObserverState, x1_meas: float, drift: float,
                              gains: ObserverGains) -> tuple[float, float]:
    """Generic observer right-hand side given the model drift for the velocity state.

    ``obs`` may be any ``(x1_hat, x2_hat)`` pair.
    """
    x1_hat, x2_hat = obs
    v1, v2 = correction_terms(x1_meas - x1_hat, gains)
    return x2_hat + v1, drift + v2


def observer_derivative(obs: SuperTwistingObserverState, x1_meas: float, u1: float,
                        attitude_est: tuple[float, float], m_hat: float, p: QuadrotorParams,
                        gains: ObserverGains) -> tuple[float, float]:
    """Altitude observer. Uses the mass estimate in place of the unknown true mass."""
    phi_hat, theta_hat = attitude_est
    drift = math.cos(phi_hat) * math.cos(theta_hat) / m_hat * u1 - p.g
    return super_twisting_derivative(obs, x1_meas, drift, gains)


def attitude_drifts(rates: tuple[float, float, float], u: tuple[float, float, float],
                    w_bar: float, p: QuadrotorParams) -> tuple[float, float, float]:
    """Roll, pitch and yaw accelerations of the model at estimated rates.

    ``rates`` is ``(phi_dot, theta_dot, psi_dot)`` and ``u`` is ``(U2, U3, U4)``.
    """
    phid, thetad, psid = rates
    u2, u3, u4 = u
    return (
        ((p.i_yy - p.i_zz) * psid * thetad - p.j_r * w_bar * thetad + p.l * u2) / p.i_xx,
        ((p.i_zz - p.i_xx) * psid * phid - p.j_r * w_bar * phid + p.l * u3) / p.i_yy,
        ((p.i_xx - p.i_yy) * phid * thetad + u4) / p.i_zz,
    )


def suggest_gains(f_plus: float) -> ObserverGains:
    """Gains satisfying the usual sufficient conditions for a perturbation bound ``f_plus``."""
    if not f_plus > 0:
        raise NonPositiveBound(f"perturbation bound must be > 0, got {f_plus!r}")
    return ObserverGains(alpha=1.5 * math.sqrt(f_plus), beta=1.1 * f_plus, f_plus=f_plus)
