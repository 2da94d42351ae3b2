"""Acceptance scenarios and their pass/fail checks.

Shared by ``smcquad suite`` and ``tests/test_acceptance.py``. Every scenario
uses the default airframe parameters, ``dt = 1e-3`` and a fixed seed.
"""
from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import oracles
from .control import AxisControllerConfig
from .dynamics import (ControlVector, QuadrotorParams, RigidBodyState, RotorSpeeds, allocate,
                       controls_from_rotors, rotors_from_controls, state_derivative)
from .logio import log_to_csv, write_log
from .observer import suggest_gains
from .scenario import AdaptationConfig, NoiseConfig, ObserverConfig, Scenario
from .signals import ConstantReference, ReferenceProgram, SinusoidReference, StepMass, StepReference
from .simulation import STATE_NAMES, TimeSeriesLog, run_scenario

P = QuadrotorParams()
K_DEFAULT = AxisControllerConfig().k
LAM_DEFAULT = AxisControllerConfig().lam
SEED = 2024


# -- scenarios ---------------------------------------------------------------

def equilibrium_scenario() -> Scenario:
    """Open-loop hover at U1 = m g."""
    return Scenario(duration=10.0, seed=SEED, initial_state=RigidBodyState(z=1.0),
                    open_loop_controls=(P.m * P.g, 0.0, 0.0, 0.0), initial_m_hat=P.m,
                    adaptation=AdaptationConfig(enabled=False),
                    reference=ReferenceProgram(z=ConstantReference(1.0)))


def altitude_step_scenario() -> Scenario:
    """Smoothed 1 m step, starting 0.1 m below the reference, exact fixed mass estimate."""
    return Scenario(duration=10.0, seed=SEED, initial_state=RigidBodyState(z=-0.1),
                    initial_m_hat=P.m, adaptation=AdaptationConfig(enabled=False),
                    reference=ReferenceProgram(z=StepReference(0.0, 1.0, t0=0.5, rise_time=2.0)))


def attitude_step_scenario() -> Scenario:
    """0.2 rad smoothed roll and pitch steps from a slightly tilted start."""
    return Scenario(duration=6.0, seed=SEED,
                    initial_state=RigidBodyState(z=1.0, phi=0.05, theta=-0.05),
                    initial_m_hat=P.m, adaptation=AdaptationConfig(enabled=False),
                    reference=ReferenceProgram(z=ConstantReference(1.0),
                                               phi=StepReference(0.0, 0.2, t0=0.5, rise_time=1.0),
                                               theta=StepReference(0.0, 0.2, t0=0.5, rise_time=1.0)))


def adaptive_altitude_scenario() -> Scenario:
    return dataclasses.replace(altitude_step_scenario(), initial_m_hat=0.7 * P.m,
                               adaptation=AdaptationConfig(enabled=True))


def sinusoid_mass_scenario() -> Scenario:
    return Scenario(duration=20.0, seed=SEED, initial_m_hat=0.7 * P.m,
                    reference=ReferenceProgram(z=SinusoidReference(amplitude=0.5, frequency=0.2)))


def mass_step_scenario() -> Scenario:
    return dataclasses.replace(sinusoid_mass_scenario(), duration=20.0,
                               mass=StepMass(P.m, ((10.0, 0.6),)))


def observer_offset_scenario() -> Scenario:
    gains = {a: suggest_gains(4.0) for a in ("z", "phi", "theta", "psi")}
    return dataclasses.replace(altitude_step_scenario(),
                               observer=ObserverConfig(gains=gains, initial_offset={"z": (0.5, 0.0)}))


def noise_scenario(std: float) -> Scenario:
    return dataclasses.replace(altitude_step_scenario(), observer=ObserverConfig(in_loop=True),
                               noise=NoiseConfig(z=std))


NOISE_LOW, NOISE_HIGH = 0.005, 0.02

SCENARIOS: dict[str, Callable[[], Scenario]] = {
    "equilibrium": equilibrium_scenario,
    "altitude_step": altitude_step_scenario,
    "attitude_step": attitude_step_scenario,
    "adaptive_altitude": adaptive_altitude_scenario,
    "mass_constant": sinusoid_mass_scenario,
    "mass_step": mass_step_scenario,
    "observer_offset": observer_offset_scenario,
    "noise_low": lambda: noise_scenario(NOISE_LOW),
    "noise_high": lambda: noise_scenario(NOISE_HIGH),
}


# -- helpers -----------------------------------------------------------------

@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:>2}. {self.name}: {self.detail}"


def fit_decay_rate(t: np.ndarray, s: np.ndarray, floor_ratio: float = 1e-6) -> float:
    """Exponential decay rate of ``|s|`` from a log-linear least-squares fit.

    Uses the leading run of samples with ``|s| >= floor_ratio * |s[0]|``.
    """
    mag = np.abs(s)
    below = np.nonzero(mag < floor_ratio * mag[0])[0]
    end = below[0] if len(below) else len(s)
    slope = np.polyfit(t[:end], np.log(mag[:end]), 1)[0]
    return -slope


def central_difference(y: np.ndarray, dt: float) -> np.ndarray:
    """Derivative at interior samples ``1 .. n-2``."""
    return (y[2:] - y[:-2]) / (2.0 * dt)


def _run_one(name: str) -> tuple[str, TimeSeriesLog]:
    return name, run_scenario(SCENARIOS[name]())


def run_logs(names=None, jobs: int = 1) -> dict[str, TimeSeriesLog]:
    names = list(SCENARIOS if names is None else names)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return dict(pool.map(_run_one, names))
    return dict(map(_run_one, names))


# -- criteria ----------------------------------------------------------------

def check_equilibrium(logs) -> CriterionResult:
    log = logs["equilibrium"]
    dev = max(float(np.max(np.abs(log[c] - log[c][0]))) for c in STATE_NAMES)
    wall = log.meta["wall_time"]
    return CriterionResult(1, "equilibrium hold", dev < 1e-9 and wall < 1.0,
                           f"max state deviation {dev:.3e} (< 1e-9), runtime {wall:.2f} s (< 1 s)")


def check_altitude_tracking(logs) -> CriterionResult:
    log = logs["altitude_step"]
    t = log["t"]
    err = float(np.max(np.abs((log["z"] - log["z_ref"])[t > 5.0])))
    rate = fit_decay_rate(t, log["s_z"])
    rel = abs(rate - K_DEFAULT) / K_DEFAULT
    wall = log.meta["wall_time"]
    ok = err < 0.01 and rel < 0.15 and wall < 5.0
    return CriterionResult(2, "altitude tracking", ok,
                           f"max|e_z| after 5 s {err:.2e} (< 0.01), S_z decay rate {rate:.4f} vs K={K_DEFAULT} "
                           f"({rel:.1%} < 15%), runtime {wall:.2f} s (< 5 s)")


def check_attitude_tracking(logs) -> CriterionResult:
    log = logs["attitude_step"]
    t = log["t"]
    late = t > 3.0
    e_phi = float(np.max(np.abs((log["phi"] - log["phi_ref"])[late])))
    e_th = float(np.max(np.abs((log["theta"] - log["theta_ref"])[late])))
    r_phi = fit_decay_rate(t, log["s_phi"])
    r_th = fit_decay_rate(t, log["s_theta"])
    rel = max(abs(r_phi - K_DEFAULT), abs(r_th - K_DEFAULT)) / K_DEFAULT
    ok = e_phi < 0.005 and e_th < 0.005 and rel < 0.15
    return CriterionResult(3, "attitude tracking", ok,
                           f"max|e_phi| {e_phi:.2e}, max|e_theta| {e_th:.2e} after 3 s (< 0.005); "
                           f"decay rates {r_phi:.4f}, {r_th:.4f} vs K ({rel:.1%} < 15%)")


def check_lyapunov_decrease(logs) -> CriterionResult:
    log = logs["adaptive_altitude"]
    sc = adaptive_altitude_scenario()
    inc = float(np.max(np.diff(log["v2"])))
    m_hat = log["m_hat"]
    inside = bool(np.all((m_hat > sc.adaptation.m_min) & (m_hat < sc.adaptation.m_max)))
    return CriterionResult(4, "Lyapunov decrease", inc <= 1e-6 and inside,
                           f"max V2 step increase {inc:.3e} (<= 1e-6), projection inactive: {inside}")


def _mass_error_after(log, t_from: float, m_ref: float) -> float:
    t = log["t"]
    return float(np.max(np.abs(log["m_hat"][t >= t_from] - m_ref)) / m_ref)


def check_mass_constant(logs) -> CriterionResult:
    rel = _mass_error_after(logs["mass_constant"], 10.0, P.m)
    return CriterionResult(5, "mass estimation, constant mass", rel < 0.02,
                           f"max |m_hat - m|/m for t >= 10 s: {rel:.2e} (< 0.02)")


def check_mass_step(logs) -> CriterionResult:
    rel = _mass_error_after(logs["mass_step"], 18.0, 0.6)
    return CriterionResult(6, "mass estimation, time-varying mass", rel < 0.02,
                           f"max |m_hat - m|/m for t >= 18 s (8 s after the step): {rel:.2e} (< 0.02)")


def observer_error_equation_residuals(log: TimeSeriesLog, gains, p: QuadrotorParams = P,
                                      min_error: float = 1e-6) -> tuple[float, float]:
    """Largest mismatch between logged error rates and the observer error equations.

    The perturbation term is rebuilt from the logged true state, attitude
    estimates, applied thrust (from rotor speeds) and disturbance.
    """
    x1_err = log["z"] - log["z_hat"]
    x2_err = log["z_dot"] - log["z_dot_hat"]
    away = np.abs(x1_err) > min_error
    sign = np.sign(x1_err)
    u1 = p.b * (log["w1"] ** 2 + log["w2"] ** 2 + log["w3"] ** 2 + log["w4"] ** 2)
    f_true = np.cos(log["phi"]) * np.cos(log["theta"]) / log["m_true"] * u1 - p.g
    f_est = np.cos(log["phi_hat"]) * np.cos(log["theta_hat"]) / log["m_hat"] * u1 - p.g
    big_f = f_true - f_est + log["xi_z"]
    r1 = (log["z_dot"] - log["obs_z_dx1"]) - (x2_err - gains.alpha * np.sqrt(np.abs(x1_err)) * sign)
    r2 = (log["z_ddot"] - log["obs_z_dx2"]) - (big_f - gains.beta * sign)
    return float(np.max(np.abs(r1[away]), initial=0.0)), float(np.max(np.abs(r2[away]), initial=0.0))


def check_observer_convergence(logs) -> CriterionResult:
    log = logs["observer_offset"]
    gains = observer_offset_scenario().observer.gains["z"]
    t = log["t"]
    err = np.abs(log["z"] - log["z_hat"])
    # below 1e-3 at t_hit and below 1e-2 at every later sample; a transient
    # zero crossing before convergence does not count
    stays = np.logical_and.accumulate((err < 1e-2)[::-1])[::-1]
    hits = np.nonzero((err < 1e-3) & stays)[0]
    t_hit = float(t[hits[0]]) if len(hits) else float("inf")
    after = float(np.max(err[hits[0]:])) if len(hits) else float("inf")
    r1, r2 = observer_error_equation_residuals(log, gains)
    ok = t_hit <= 1.0 and r1 < 1e-9 and r2 < 1e-9
    return CriterionResult(7, "observer convergence", ok,
                           f"|x1 err| < 1e-3 at {t_hit:.3f} s (<= 1 s) and max {after:.2e} afterwards "
                           f"(< 1e-2); error-equation mismatch {r1:.1e}, {r2:.1e} (< 1e-9)")


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def check_noise_robustness(logs) -> CriterionResult:
    out = {}
    for key in ("noise_low", "noise_high"):
        log = logs[key]
        late = log["t"] >= 5.0
        out[key] = (_rms((log["z"] - log["z_ref"])[late]), _rms((log["z_dot"] - log["z_dot_hat"])[late]))
    (e_lo, x2_lo), (e_hi, x2_hi) = out["noise_low"], out["noise_high"]
    ok = e_lo < 0.05 and e_hi < 0.05 and x2_hi >= x2_lo
    return CriterionResult(8, "noise robustness", ok,
                           f"RMS e_z after 5 s {e_lo:.2e} / {e_hi:.2e} (< 0.05); "
                           f"RMS x2 error {x2_lo:.3e} -> {x2_hi:.3e} (non-decreasing)")


def closed_loop_residuals(log: TimeSeriesLog, k: float = K_DEFAULT, lam: float = LAM_DEFAULT,
                          g: float = P.g) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(stated, consistent)`` residuals at interior, guard-inactive samples.

    ``stated`` is ``m S' + K S + m_err a``; ``consistent`` scales the reaching
    term by the estimate, ``m S' + m_hat K S + m_err a``, which is what the
    estimate-scaled thrust law enforces.
    """
    s = log["s_z"]
    s_dot = central_difference(s, log.dt)
    mid = slice(1, -1)
    m, m_hat = log["m_true"][mid], log["m_hat"][mid]
    accel = log["z_ref_accel"][mid] - lam * (log["z_dot"] - log["z_ref_rate"])[mid] + g
    active = log["tilt_guard"][mid] == 0
    stated = m * s_dot + k * s[mid] + (m - m_hat) * accel
    consistent = m * s_dot + m_hat * k * s[mid] + (m - m_hat) * accel
    return stated[active], consistent[active]


def check_closed_loop_residual(logs) -> CriterionResult:
    stated, consistent = closed_loop_residuals(logs["adaptive_altitude"])
    worst = float(np.max(np.abs(stated)))
    alt = float(np.max(np.abs(consistent)))
    return CriterionResult(9, "closed-loop residual", worst < 1e-4,
                           f"max|m S' + K S + m_err a| = {worst:.3e} (< 1e-4); "
                           f"with the reaching term scaled by m_hat: {alt:.3e}")


def check_oracles(n_random: int = 10_000, seed: int = SEED) -> CriterionResult:
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    inertia = (P.i_xx, P.i_yy, P.i_zz)
    worst_dyn = 0.0
    for _ in range(n_random):
        state = rng.uniform(-5, 5, 12)
        state[3:6] = rng.uniform(-1.2, 1.2, 3)
        u = ControlVector(rng.uniform(0, 20), *rng.uniform(-1, 1, 2), rng.uniform(-0.05, 0.05))
        w_bar = rng.uniform(-500, 500)
        m = rng.uniform(0.2, 1.5)
        xi = rng.uniform(-1, 1, 6)
        got = np.array(state_derivative(RigidBodyState(*state), u, w_bar, P, xi, m=m))
        want = oracles.accelerations(state, u, w_bar, inertia, m, P.l, P.j_r, P.g, xi)
        scale = np.maximum(1.0, np.abs(want))
        worst_dyn = max(worst_dyn, float(np.max(np.abs(got[6:] - want) / scale)),
                        float(np.max(np.abs(got[:6] - state[6:]))))

    worst_mix = 0.0
    for _ in range(n_random):
        w = RotorSpeeds(*rng.uniform(0, 1000, 4))
        back = np.array(rotors_from_controls(controls_from_rotors(w, P), P))
        worst_mix = max(worst_mix, float(np.max(np.abs(back - w)) / max(w)))
        sq = np.array(allocate(controls_from_rotors(w, P), P).squared)
        worst_mix = max(worst_mix, float(np.max(np.abs(sq - oracles.squared_speeds(controls_from_rotors(w, P), P.b, P.d)))
                                         / max(w) ** 2))

    ratio = rk4_halving_ratio()
    elapsed = time.perf_counter() - started
    ok = worst_dyn <= 1e-12 and worst_mix <= 1e-10 and ratio >= 8 and elapsed < 30
    return CriterionResult(10, "oracles and round trips", ok,
                           f"dynamics vs oracle {worst_dyn:.1e} (<= 1e-12), mixing round trip {worst_mix:.1e} "
                           f"(<= 1e-10), RK4 halving ratio {ratio:.2f} (>= 8), {elapsed:.1f} s (< 30 s)")


def rk4_halving_ratio(dt: float = 1e-3, duration: float = 2.0) -> float:
    """Error ratio between runs at ``dt`` and ``dt/2``, measured against ``dt/8``.

    Uses the adaptive altitude scenario without noise; the observer does not
    feed back, so the plant and estimator states are smooth.
    """
    base = dataclasses.replace(adaptive_altitude_scenario(), duration=duration)

    def final(step: float) -> np.ndarray:
        log = run_scenario(dataclasses.replace(base, dt=step))
        return np.array([log[c][-1] for c in (*STATE_NAMES, "m_hat")])

    ref = final(dt / 8)
    return float(np.linalg.norm(final(dt) - ref) / np.linalg.norm(final(dt / 2) - ref))


def check_determinism(logs, names=None) -> CriterionResult:
    names = list(SCENARIOS if names is None else names)
    again = run_logs(names)
    differing = [n for n in names if log_to_csv(logs[n]) != log_to_csv(again[n])]
    return CriterionResult(11, "determinism", not differing,
                           f"{len(names) - len(differing)}/{len(names)} scenario logs byte-identical on rerun"
                           + (f"; differing: {', '.join(differing)}" if differing else ""))


LOG_CHECKS = (check_equilibrium, check_altitude_tracking, check_attitude_tracking,
              check_lyapunov_decrease, check_mass_constant, check_mass_step,
              check_observer_convergence, check_noise_robustness, check_closed_loop_residual)


def run_suite(out_dir: str | Path | None = None, jobs: int = 1,
              report: Callable[[str], None] | None = None) -> list[CriterionResult]:
    """Run every acceptance criterion; optionally write each scenario log to ``out_dir/<name>/log.csv``."""
    logs = run_logs(jobs=jobs)
    if out_dir is not None:
        for name, log in logs.items():
            target = Path(out_dir) / name
            target.mkdir(parents=True, exist_ok=True)
            write_log(log, target / "log.csv")
    results = []
    for check in (*LOG_CHECKS, lambda _: check_oracles(), check_determinism):
        res = check(logs)
        if report is not None:
            report(res.line())
        results.append(res)
    return results
