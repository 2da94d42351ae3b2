"""Time-dependent inputs of a scenario: references, disturbances, true mass, sensor noise."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Union

import numpy as np

from .control import AxisReference, ReferenceSample
from .dynamics import DisturbanceSample

AXES = ("x", "y", "z", "phi", "theta", "psi")


# -- reference programs ------------------------------------------------------

@dataclass(frozen=True)
class ConstantReference:
    value: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "_sample", AxisReference(self.value, 0.0, 0.0))

    def sample(self, t: float) -> AxisReference:
        return self._sample


@dataclass(frozen=True)
class StepReference:
    """Step from ``initial`` to ``final`` smoothed by a quintic ramp over ``rise_time``.

    The ramp has zero rate and acceleration at both ends, so all three
    outputs are continuous.
    """

    initial: float = 0.0
    final: float = 1.0
    t0: float = 0.0
    rise_time: float = 2.0

    def __post_init__(self):
        if not self.rise_time > 0:
            raise ValueError("rise_time must be > 0")

    def sample(self, t: float) -> AxisReference:
        tau = (t - self.t0) / self.rise_time
        if tau <= 0.0:
            return AxisReference(self.initial, 0.0, 0.0)
        if tau >= 1.0:
            return AxisReference(self.final, 0.0, 0.0)
        span = self.final - self.initial
        tau2 = tau * tau
        shape = tau2 * tau * (10.0 - 15.0 * tau + 6.0 * tau2)
        dshape = 30.0 * tau2 * (1.0 - tau) ** 2
        ddshape = 60.0 * tau * (1.0 - tau) * (1.0 - 2.0 * tau)
        return AxisReference(self.initial + span * shape,
                             span * dshape / self.rise_time,
                             span * ddshape / self.rise_time ** 2)


@dataclass(frozen=True)
class SinusoidReference:
    """``offset + amplitude * sin(2 pi frequency t + phase)``; frequency in Hz."""

    amplitude: float = 0.5
    frequency: float = 0.2
    phase: float = 0.0
    offset: float = 0.0

    def sample(self, t: float) -> AxisReference:
        w = 2.0 * math.pi * self.frequency
        arg = w * t + self.phase
        sin, cos = math.sin(arg), math.cos(arg)
        return AxisReference(self.offset + self.amplitude * sin,
                             self.amplitude * w * cos,
                             -self.amplitude * w * w * sin)


AxisProgram = Union[ConstantReference, StepReference, SinusoidReference]


@dataclass(frozen=True)
class ReferenceProgram:
    z: AxisProgram = field(default_factory=ConstantReference)
    phi: AxisProgram = field(default_factory=ConstantReference)
    theta: AxisProgram = field(default_factory=ConstantReference)
    psi: AxisProgram = field(default_factory=ConstantReference)


def eval_reference(program: ReferenceProgram, t: float) -> ReferenceSample:
    return ReferenceSample(program.z.sample(t), program.phi.sample(t),
                           program.theta.sample(t), program.psi.sample(t))


# -- disturbances ------------------------------------------------------------

def _axis_index(axis: str) -> int:
    try:
        return AXES.index(axis)
    except ValueError:
        raise ValueError(f"unknown disturbance axis {axis!r}; expected one of {AXES}") from None


@dataclass(frozen=True)
class StepDisturbance:
    t0: float
    magnitude: float
    axis: str = "z"

    def __post_init__(self):
        _axis_index(self.axis)

    def value(self, t: float) -> float:
        return self.magnitude if t >= self.t0 else 0.0


@dataclass(frozen=True)
class SinusoidDisturbance:
    amplitude: float
    frequency: float
    axis: str = "z"
    phase: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        _axis_index(self.axis)

    def value(self, t: float) -> float:
        if t < self.t0:
            return 0.0
        return self.amplitude * math.sin(2.0 * math.pi * self.frequency * (t - self.t0) + self.phase)


@dataclass(frozen=True)
class ImpulseDisturbance:
    """Rectangular pulse of ``magnitude`` on ``[t0, t0 + width)``."""

    t0: float
    magnitude: float
    width: float = 0.05
    axis: str = "z"

    def __post_init__(self):
        _axis_index(self.axis)
        if not self.width > 0:
            raise ValueError("impulse width must be > 0")

    def value(self, t: float) -> float:
        return self.magnitude if self.t0 <= t < self.t0 + self.width else 0.0


DisturbanceProfile = Union[StepDisturbance, SinusoidDisturbance, ImpulseDisturbance]


def eval_disturbance(profile: DisturbanceProfile | Iterable[DisturbanceProfile] | None,
                     t: float) -> DisturbanceSample:
    """Sum of the active profiles, per axis. ``None`` or an empty list means no disturbance."""
    if profile is None:
        return DisturbanceSample()
    profiles = (profile,) if hasattr(profile, "value") else tuple(profile)
    acc = [0.0] * 6
    for prof in profiles:
        acc[_axis_index(prof.axis)] += prof.value(t)
    return DisturbanceSample(*acc)


# -- true mass ---------------------------------------------------------------

@dataclass(frozen=True)
class ConstantMass:
    value: float = 0.486

    def at(self, t: float) -> float:
        return self.value

    def values(self) -> tuple[float, ...]:
        return (self.value,)


@dataclass(frozen=True)
class StepMass:
    """Piecewise-constant mass; ``steps`` holds ``(time, new_value)`` pairs."""

    initial: float = 0.486
    steps: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        times = [ts for ts, _ in self.steps]
        if times != sorted(times):
            raise ValueError("mass steps must be sorted by time")

    def at(self, t: float) -> float:
        value = self.initial
        for ts, v in self.steps:
            if t >= ts:
                value = v
            else:
                break
        return value

    def values(self) -> tuple[float, ...]:
        return (self.initial, *(v for _, v in self.steps))


@dataclass(frozen=True)
class RampMass:
    """Linear change from ``start`` to ``end`` over ``[t0, t1]``, constant outside."""

    start: float = 0.486
    end: float = 0.6
    t0: float = 0.0
    t1: float = 1.0

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ValueError("ramp needs t1 > t0")

    def at(self, t: float) -> float:
        if t <= self.t0:
            return self.start
        if t >= self.t1:
            return self.end
        return self.start + (self.end - self.start) * (t - self.t0) / (self.t1 - self.t0)

    def values(self) -> tuple[float, ...]:
        return (self.start, self.end)


MassSchedule = Union[ConstantMass, StepMass, RampMass]


def eval_mass_schedule(schedule: MassSchedule, t: float) -> float:
    return schedule.at(t)


# -- sensor noise ------------------------------------------------------------

class NoiseStream(NamedTuple):
    """Position in a counter-based Gaussian stream.

    Draw ``k`` of ``(seed, channel)`` depends only on those three integers, so
    any draw can be regenerated without replaying the stream.
    """

    seed: int
    channel: int = 0
    counter: int = 0


_TWO_NEG53 = 2.0 ** -53


def _box_muller(raw: np.ndarray) -> np.ndarray:
    # raw[..., 0] -> u1 in (0, 1], raw[..., 1] -> u2 in [0, 1)
    u1 = ((raw[..., 0] >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_NEG53
    u2 = (raw[..., 1] >> np.uint64(11)).astype(np.float64) * _TWO_NEG53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def _philox(seed: int, channel: int, counter: int = 0) -> np.random.Philox:
    return np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, channel], counter=[counter, 0, 0, 0])


def sample_noise(stream: NoiseStream, std: float) -> tuple[float, NoiseStream]:
    """One zero-mean Gaussian draw with standard deviation ``std``; ``std == 0`` gives exactly 0."""
    if std < 0:
        raise ValueError("noise std must be >= 0")
    nxt = stream._replace(counter=stream.counter + 1)
    if std == 0:
        return 0.0, nxt
    raw = _philox(stream.seed, stream.channel, stream.counter).random_raw(4)
    return float(std * _box_muller(raw[:2])), nxt


def noise_block(seed: int, channel: int, n: int, std: float) -> np.ndarray:
    """First ``n`` draws of a stream in one call; identical to repeated :func:`sample_noise`."""
    if std < 0:
        raise ValueError("noise std must be >= 0")
    if std == 0 or n == 0:
        return np.zeros(n)
    raw = _philox(seed, channel).random_raw(4 * n).reshape(n, 4)
    return std * _box_muller(raw)
