"""Scenario description and its strict JSON loader.

Every key is optional; omitted keys take the defaults below. Unknown keys are
rejected so a typo never silently falls back to a default.
"""
from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .control import AxisControllerConfig
from .dynamics import EPS_ANGLE, W_MAX, QuadrotorParams, RigidBodyState
from .control import EPS_TILT
from .observer import ObserverGains, suggest_gains
from .signals import (ConstantMass, ConstantReference, DisturbanceProfile, ImpulseDisturbance,
                      MassSchedule, RampMass, ReferenceProgram, SinusoidDisturbance,
                      SinusoidReference, StepDisturbance, StepMass, StepReference)

OBSERVED_AXES = ("z", "phi", "theta", "psi")
SEED_ENV = "SMCQUAD_SEED"


class ScenarioError(ValueError):
    pass


class ParseError(ScenarioError):
    """Malformed JSON or a value of the wrong type."""


class ValidationError(ScenarioError):
    """Well-formed input that violates a scenario invariant."""


@dataclass(frozen=True)
class AxisGains:
    z: AxisControllerConfig = field(default_factory=AxisControllerConfig)
    phi: AxisControllerConfig = field(default_factory=AxisControllerConfig)
    theta: AxisControllerConfig = field(default_factory=AxisControllerConfig)
    psi: AxisControllerConfig = field(default_factory=AxisControllerConfig)


@dataclass(frozen=True)
class AdaptationConfig:
    enabled: bool = True
    gamma: float = 0.5
    m_min: float = 0.1
    m_max: float = 2.0


def _default_observer_gains() -> dict[str, ObserverGains]:
    return {"z": suggest_gains(4.0), "phi": suggest_gains(4.0),
            "theta": suggest_gains(4.0), "psi": suggest_gains(4.0)}


@dataclass(frozen=True)
class ObserverConfig:
    in_loop: bool = False
    t_obs: float = 0.5
    gains: dict[str, ObserverGains] = field(default_factory=_default_observer_gains)
    # (position, rate) offsets of the initial estimate from the true initial state
    initial_offset: dict[str, tuple[float, float]] = field(default_factory=dict)


@dataclass(frozen=True)
class NoiseConfig:
    z: float = 0.0
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0


def _default_reference() -> ReferenceProgram:
    return ReferenceProgram(z=StepReference(initial=0.0, final=1.0, t0=0.0, rise_time=2.0))


@dataclass(frozen=True)
class Scenario:
    duration: float = 10.0
    dt: float = 1e-3
    seed: int = 0
    params: QuadrotorParams = field(default_factory=QuadrotorParams)
    initial_state: RigidBodyState = RigidBodyState()
    initial_m_hat: float | None = None
    gains: AxisGains = field(default_factory=AxisGains)
    adaptation: AdaptationConfig = field(default_factory=AdaptationConfig)
    observer: ObserverConfig = field(default_factory=ObserverConfig)
    reference: ReferenceProgram = field(default_factory=_default_reference)
    disturbance: tuple[DisturbanceProfile, ...] = ()
    mass: MassSchedule | None = None
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    # constant (U1..U4) applied instead of the controllers when set
    open_loop_controls: tuple[float, float, float, float] | None = None
    w_max: float = W_MAX
    eps_tilt: float = EPS_TILT
    eps_angle: float = EPS_ANGLE

    @property
    def m_hat0(self) -> float:
        return 0.7 * self.params.m if self.initial_m_hat is None else self.initial_m_hat

    @property
    def mass_schedule(self) -> MassSchedule:
        return ConstantMass(self.params.m) if self.mass is None else self.mass

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.duration / self.dt + 1e-9))

    def replace(self, **changes) -> "Scenario":
        return validate(dataclasses.replace(self, **changes))


def validate(sc: Scenario) -> Scenario:
    """Check cross-field invariants; return ``sc`` unchanged when they hold."""
    def need(ok: bool, what: str):
        if not ok:
            raise ValidationError(what)

    need(sc.dt > 0, "dt > 0")
    need(sc.duration >= sc.dt, "duration >= dt")
    need(all(math.isfinite(v) for v in sc.initial_state), "initial_state finite")
    for axis in OBSERVED_AXES:
        need(getattr(sc.noise, axis) >= 0, f"noise.{axis} >= 0")
    ad = sc.adaptation
    need(ad.gamma > 0, "adaptation.gamma > 0")
    need(0 < ad.m_min <= ad.m_max, "0 < adaptation.m_min <= adaptation.m_max")
    need(ad.m_min <= sc.m_hat0 <= ad.m_max, "m_min <= initial_m_hat <= m_max")
    need(all(ad.m_min <= v <= ad.m_max for v in sc.mass_schedule.values()),
         "mass schedule values within [m_min, m_max]")
    need(sc.observer.t_obs >= 0, "observer.t_obs >= 0")
    need(set(sc.observer.gains) == set(OBSERVED_AXES), "observer.gains covers z, phi, theta, psi")
    need(sc.w_max > 0, "w_max > 0")
    need(0 < sc.eps_tilt < 1, "0 < eps_tilt < 1")
    need(0 < sc.eps_angle < math.pi / 2, "0 < eps_angle < pi/2")
    need(abs(sc.initial_state.theta) < math.pi / 2 - sc.eps_angle, "|theta0| < pi/2 - eps_angle")
    return sc


# -- JSON loading ------------------------------------------------------------

def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ParseError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: expected an integer, got {value!r}")
    return value


def _boolean(value: Any, where: str) -> bool:
    if not isinstance(value, bool):
        raise ParseError(f"{where}: expected true/false, got {value!r}")
    return value


def _object(value: Any, where: str) -> dict:
    if not isinstance(value, dict):
        raise ParseError(f"{where}: expected an object, got {type(value).__name__}")
    return value


def _check_keys(data: dict, allowed, where: str):
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ParseError(f"{where}: unknown key(s) {', '.join(map(repr, unknown))}; "
                         f"allowed: {', '.join(sorted(allowed))}")


def _construct(cls, kwargs: dict, where: str):
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def _numbers_into(cls, data: Any, where: str, extra: dict | None = None):
    """Build a dataclass whose fields are all numeric (plus optional pre-parsed ``extra``)."""
    data = _object(data, where)
    names = [f.name for f in dataclasses.fields(cls)]
    _check_keys(data, names, where)
    kwargs = {k: _number(v, f"{where}.{k}") for k, v in data.items() if k not in (extra or {})}
    kwargs.update(extra or {})
    return _construct(cls, kwargs, where)


def _axis_gains(data: Any, where: str) -> AxisGains:
    data = _object(data, where)
    _check_keys(data, OBSERVED_AXES, where)
    out = {}
    for axis, cfg in data.items():
        cfg = _object(cfg, f"{where}.{axis}")
        _check_keys(cfg, ("lambda", "k"), f"{where}.{axis}")
        kw = {}
        if "lambda" in cfg:
            kw["lam"] = _number(cfg["lambda"], f"{where}.{axis}.lambda")
        if "k" in cfg:
            kw["k"] = _number(cfg["k"], f"{where}.{axis}.k")
        out[axis] = _construct(AxisControllerConfig, kw, f"{where}.{axis}")
    return AxisGains(**out)


def _adaptation(data: Any, where: str) -> AdaptationConfig:
    data = _object(data, where)
    _check_keys(data, ("enabled", "gamma", "m_min", "m_max"), where)
    kw = {k: _number(v, f"{where}.{k}") for k, v in data.items() if k != "enabled"}
    if "enabled" in data:
        kw["enabled"] = _boolean(data["enabled"], f"{where}.enabled")
    return AdaptationConfig(**kw)


def _observer_gains(data: Any, where: str) -> ObserverGains:
    data = _object(data, where)
    _check_keys(data, ("alpha", "beta", "f_plus"), where)
    vals = {k: _number(v, f"{where}.{k}") for k, v in data.items()}
    if set(vals) == {"f_plus"}:
        try:
            return suggest_gains(vals["f_plus"])
        except ValueError as exc:
            raise ValidationError(f"{where}: {exc}") from None
    if set(vals) != {"alpha", "beta", "f_plus"}:
        raise ParseError(f"{where}: give either f_plus alone or all of alpha, beta, f_plus")
    return _construct(ObserverGains, vals, where)


def _observer(data: Any, where: str) -> ObserverConfig:
    data = _object(data, where)
    _check_keys(data, ("in_loop", "t_obs", "gains", "initial_offset"), where)
    kw: dict[str, Any] = {}
    if "in_loop" in data:
        kw["in_loop"] = _boolean(data["in_loop"], f"{where}.in_loop")
    if "t_obs" in data:
        kw["t_obs"] = _number(data["t_obs"], f"{where}.t_obs")
    if "gains" in data:
        gains = _object(data["gains"], f"{where}.gains")
        _check_keys(gains, OBSERVED_AXES, f"{where}.gains")
        merged = _default_observer_gains()
        merged.update({a: _observer_gains(g, f"{where}.gains.{a}") for a, g in gains.items()})
        kw["gains"] = merged
    if "initial_offset" in data:
        offs = _object(data["initial_offset"], f"{where}.initial_offset")
        _check_keys(offs, OBSERVED_AXES, f"{where}.initial_offset")
        parsed = {}
        for axis, pair in offs.items():
            w = f"{where}.initial_offset.{axis}"
            if not isinstance(pair, list) or len(pair) != 2:
                raise ParseError(f"{w}: expected [position_offset, rate_offset]")
            parsed[axis] = (_number(pair[0], f"{w}[0]"), _number(pair[1], f"{w}[1]"))
        kw["initial_offset"] = parsed
    return ObserverConfig(**kw)


def _kind(data: Any, where: str, kinds: dict):
    data = _object(data, where)
    if "kind" not in data:
        raise ParseError(f"{where}: missing 'kind' (one of {', '.join(kinds)})")
    kind = data["kind"]
    if kind not in kinds:
        raise ParseError(f"{where}.kind: unknown kind {kind!r} (one of {', '.join(kinds)})")
    return kinds[kind], {k: v for k, v in data.items() if k != "kind"}


_REFERENCE_KINDS = {"constant": ConstantReference, "step": StepReference, "sinusoid": SinusoidReference}


def _reference(data: Any, where: str) -> ReferenceProgram:
    data = _object(data, where)
    _check_keys(data, OBSERVED_AXES, where)
    axes = {}
    for axis, prog in data.items():
        cls, body = _kind(prog, f"{where}.{axis}", _REFERENCE_KINDS)
        axes[axis] = _numbers_into(cls, body, f"{where}.{axis}")
    return ReferenceProgram(**axes)


_DISTURBANCE_KINDS = {"step": StepDisturbance, "sinusoid": SinusoidDisturbance,
                      "impulse": ImpulseDisturbance}


def _disturbance(data: Any, where: str) -> tuple[DisturbanceProfile, ...]:
    if isinstance(data, dict) and data.get("kind") == "none":
        _check_keys(data, ("kind",), where)
        return ()
    items = data if isinstance(data, list) else [data]
    out = []
    for i, item in enumerate(items):
        w = f"{where}[{i}]" if isinstance(data, list) else where
        cls, body = _kind(item, w, _DISTURBANCE_KINDS)
        axis = body.get("axis", "z")
        if not isinstance(axis, str):
            raise ParseError(f"{w}.axis: expected a string")
        out.append(_numbers_into(cls, {k: v for k, v in body.items() if k != "axis"}, w,
                                 extra={"axis": axis}))
    return tuple(out)


def _mass(data: Any, where: str) -> MassSchedule:
    cls, body = _kind(data, where, {"constant": ConstantMass, "steps": StepMass, "ramp": RampMass})
    if cls is not StepMass:
        return _numbers_into(cls, body, where)
    steps = body.get("steps", [])
    if not isinstance(steps, list):
        raise ParseError(f"{where}.steps: expected a list of [time, mass] pairs")
    parsed = []
    for i, pair in enumerate(steps):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError(f"{where}.steps[{i}]: expected [time, mass]")
        parsed.append((_number(pair[0], f"{where}.steps[{i}][0]"),
                       _number(pair[1], f"{where}.steps[{i}][1]")))
    return _numbers_into(StepMass, {k: v for k, v in body.items() if k != "steps"}, where,
                         extra={"steps": tuple(parsed)})


def _initial_state(data: Any, where: str) -> RigidBodyState:
    data = _object(data, where)
    _check_keys(data, RigidBodyState._fields, where)
    return RigidBodyState(**{k: _number(v, f"{where}.{k}") for k, v in data.items()})


def _open_loop(data: Any, where: str):
    if data is None:
        return None
    if not isinstance(data, list) or len(data) != 4:
        raise ParseError(f"{where}: expected [U1, U2, U3, U4] or null")
    return tuple(_number(v, f"{where}[{i}]") for i, v in enumerate(data))


_TOP_LEVEL = {
    "duration": lambda v, w: _number(v, w),
    "dt": lambda v, w: _number(v, w),
    "seed": lambda v, w: _integer(v, w),
    "params": lambda v, w: _numbers_into(QuadrotorParams, v, w),
    "initial_state": _initial_state,
    "initial_m_hat": lambda v, w: None if v is None else _number(v, w),
    "gains": _axis_gains,
    "adaptation": _adaptation,
    "observer": _observer,
    "reference": _reference,
    "disturbance": _disturbance,
    "mass": _mass,
    "noise": lambda v, w: _numbers_into(NoiseConfig, v, w),
    "open_loop_controls": _open_loop,
    "w_max": lambda v, w: _number(v, w),
    "eps_tilt": lambda v, w: _number(v, w),
    "eps_angle": lambda v, w: _number(v, w),
}


def scenario_from_dict(data: Any) -> Scenario:
    data = _object(data, "scenario")
    _check_keys(data, _TOP_LEVEL, "scenario")
    kwargs = {key: _TOP_LEVEL[key](value, key) for key, value in data.items()}
    return validate(Scenario(**kwargs))


def parse_scenario(path: str | os.PathLike) -> Scenario:
    """Load a scenario file. An empty (or whitespace-only) file yields the defaults."""
    text = Path(path).read_text()
    if not text.strip():
        return validate(Scenario())
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return scenario_from_dict(data)
    except ScenarioError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def resolve_seed(sc: Scenario, cli_seed: int | None = None) -> Scenario:
    """Apply the seed precedence: ``--seed`` flag, then ``SMCQUAD_SEED``, then the file."""
    if cli_seed is not None:
        return dataclasses.replace(sc, seed=cli_seed)
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return dataclasses.replace(sc, seed=int(env))
        except ValueError:
            raise ParseError(f"{SEED_ENV}={env!r} is not an integer") from None
    return sc


def scenario_to_dict(sc: Scenario) -> dict:
    """JSON-ready form that :func:`scenario_from_dict` reads back to an equal scenario."""
    def kinded(obj, kinds):
        kind = next(k for k, c in kinds.items() if isinstance(obj, c))
        body = dataclasses.asdict(obj)
        if isinstance(obj, StepMass):
            body["steps"] = [list(s) for s in obj.steps]
        return {"kind": kind, **body}

    obs = sc.observer
    return {
        "duration": sc.duration, "dt": sc.dt, "seed": sc.seed,
        "params": dataclasses.asdict(sc.params),
        "initial_state": sc.initial_state._asdict(),
        "initial_m_hat": sc.initial_m_hat,
        "gains": {a: {"lambda": getattr(sc.gains, a).lam, "k": getattr(sc.gains, a).k}
                  for a in OBSERVED_AXES},
        "adaptation": dataclasses.asdict(sc.adaptation),
        "observer": {
            "in_loop": obs.in_loop, "t_obs": obs.t_obs,
            "gains": {a: dataclasses.asdict(g) for a, g in obs.gains.items()},
            "initial_offset": {a: list(v) for a, v in obs.initial_offset.items()},
        },
        "reference": {a: kinded(getattr(sc.reference, a), _REFERENCE_KINDS) for a in OBSERVED_AXES},
        "disturbance": [kinded(d, _DISTURBANCE_KINDS) for d in sc.disturbance],
        "mass": kinded(sc.mass_schedule, {"constant": ConstantMass, "steps": StepMass, "ramp": RampMass}),
        "noise": dataclasses.asdict(sc.noise),
        "open_loop_controls": None if sc.open_loop_controls is None else list(sc.open_loop_controls),
        "w_max": sc.w_max, "eps_tilt": sc.eps_tilt, "eps_angle": sc.eps_angle,
    }
