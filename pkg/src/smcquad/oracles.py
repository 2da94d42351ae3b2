"""Independent reference computations used to cross-check the main code paths.

Nothing here imports the dynamics or control implementations; each function
reaches the same quantity by a different route (matrix algebra instead of
expanded scalar expressions, a linear solve instead of the closed-form
inverse).
"""
from __future__ import annotations

import numpy as np


def rotation_zyx(phi: float, theta: float, psi: float) -> np.ndarray:
    """Body-to-earth rotation ``Rz(psi) @ Ry(theta) @ Rx(phi)``."""
    cx, sx = np.cos(phi), np.sin(phi)
    cy, sy = np.cos(theta), np.sin(theta)
    cz, sz = np.cos(psi), np.sin(psi)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rz @ ry @ rx


def accelerations(state, u, w_bar, inertia, m, l, j_r, g, xi=np.zeros(6)) -> np.ndarray:
    """Six accelerations of the quadrotor model from vector identities.

    Translation: ``R e3 U1 / m - g e3``. Rotation: Euler-rate Euler equations
    ``I w' = -w x (I w) - J_r w_bar (theta', phi', 0) + (l U2, l U3, U4)``.
    """
    state = np.asarray(state, dtype=float)
    phi, theta, psi = state[3:6]
    rates = state[9:12]
    inertia = np.asarray(inertia, dtype=float)
    lin = rotation_zyx(phi, theta, psi)[:, 2] * u[0] / m - np.array([0.0, 0.0, g])
    gyro = j_r * w_bar * np.array([rates[1], rates[0], 0.0])
    torque = -np.cross(rates, inertia * rates) - gyro + np.array([l * u[1], l * u[2], u[3]])
    return np.concatenate([lin, torque / inertia]) + np.asarray(xi, dtype=float)


def mixing_matrix(b: float, d: float) -> np.ndarray:
    return np.array([[b, b, b, b],
                     [-b, 0, b, 0],
                     [0, -b, 0, b],
                     [d, -d, d, -d]], dtype=float)


def squared_speeds(u, b: float, d: float) -> np.ndarray:
    """Solve the mixing relation for the squared rotor speeds."""
    return np.linalg.solve(mixing_matrix(b, d), np.asarray(u, dtype=float))
