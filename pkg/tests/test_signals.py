import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from smcquad.signals import (ConstantMass, ConstantReference, ImpulseDisturbance, NoiseStream, RampMass,
                             ReferenceProgram, SinusoidDisturbance, SinusoidReference, StepDisturbance,
                             StepMass, StepReference, eval_disturbance, eval_mass_schedule, eval_reference,
                             noise_block, sample_noise)

# first draw of (seed 2024, channel 0) at std 1, frozen when the generator was chosen
GOLDEN_FIRST_DRAW = -0.427687727629522


def test_constant_reference():
    assert tuple(ConstantReference(1.5).sample(3.0)) == (1.5, 0.0, 0.0)


def test_sinusoid_reference_at_zero():
    ref = SinusoidReference(amplitude=0.5, frequency=0.2)
    w = 2 * math.pi * 0.2
    assert tuple(ref.sample(0.0)) == pytest.approx((0.0, 0.5 * w, 0.0))


def test_step_reference_endpoints():
    ref = StepReference(0.0, 1.0, t0=0.5, rise_time=2.0)
    assert tuple(ref.sample(0.2)) == (0.0, 0.0, 0.0)
    assert tuple(ref.sample(2.5)) == (1.0, 0.0, 0.0)
    assert ref.sample(1.5).value == pytest.approx(0.5)


programs = st.sampled_from([StepReference(-0.3, 1.2, t0=0.4, rise_time=1.5),
                            SinusoidReference(0.7, 0.3, phase=0.4, offset=0.1)])


@given(programs, st.floats(0.01, 4.0))
def test_rates_match_central_differences(ref, t):
    h = 1e-5
    # the ramp joins the flat parts with a jerk discontinuity, so stay off the joints
    assume(min(abs(t - 0.4), abs(t - 1.9)) > 1e-3)
    lo, mid, hi = ref.sample(t - h), ref.sample(t), ref.sample(t + h)
    assert (hi.value - lo.value) / (2 * h) == pytest.approx(mid.rate, abs=1e-6)
    assert (hi.rate - lo.rate) / (2 * h) == pytest.approx(mid.accel, abs=1e-5)


def test_eval_reference_per_axis():
    prog = ReferenceProgram(z=ConstantReference(1.0), psi=ConstantReference(0.3))
    sample = eval_reference(prog, 2.0)
    assert sample.z.value == 1.0 and sample.psi.value == 0.3 and sample.phi.value == 0.0


def test_no_disturbance():
    assert tuple(eval_disturbance(None, 1.0)) == (0.0,) * 6
    assert tuple(eval_disturbance((), 1.0)) == (0.0,) * 6


def test_step_disturbance():
    prof = StepDisturbance(t0=2.0, magnitude=1.0, axis="z")
    assert eval_disturbance(prof, 1.9).z == 0.0
    assert eval_disturbance(prof, 2.1).z == 1.0


@given(st.floats(0, 20))
def test_sinusoid_disturbance_closed_form(t):
    prof = SinusoidDisturbance(amplitude=0.3, frequency=0.5, axis="phi", phase=0.2)
    assert eval_disturbance(prof, t).phi == pytest.approx(0.3 * math.sin(math.pi * t + 0.2))


def test_profiles_add_up_and_impulse_is_rectangular():
    profs = (StepDisturbance(0.0, 0.5, "x"), ImpulseDisturbance(1.0, 2.0, width=0.1, axis="x"))
    assert eval_disturbance(profs, 1.05).x == 2.5
    assert eval_disturbance(profs, 1.1).x == 0.5
    with pytest.raises(ValueError):
        StepDisturbance(0.0, 1.0, axis="w")


def test_mass_schedules():
    assert all(eval_mass_schedule(ConstantMass(0.486), t) == 0.486 for t in (0.0, 3.0, 100.0))
    step = StepMass(0.486, ((5.0, 0.6),))
    assert eval_mass_schedule(step, 4.99) == 0.486
    assert eval_mass_schedule(step, 5.01) == 0.6
    ramp = RampMass(0.486, 0.6, t0=1.0, t1=3.0)
    assert (ramp.at(1.0), ramp.at(3.0), ramp.at(2.0)) == pytest.approx((0.486, 0.6, 0.543))


def test_noise_zero_std_is_exact_zero():
    value, nxt = sample_noise(NoiseStream(7), 0.0)
    assert value == 0.0 and nxt.counter == 1


def test_noise_golden_value():
    assert sample_noise(NoiseStream(2024, 0, 0), 1.0)[0] == GOLDEN_FIRST_DRAW


def test_noise_block_matches_single_draws():
    stream, draws = NoiseStream(11, 3), []
    for _ in range(50):
        v, stream = sample_noise(stream, 0.01)
        draws.append(v)
    np.testing.assert_array_equal(noise_block(11, 3, 50, 0.01), draws)


def test_noise_channels_are_independent_streams():
    assert not np.array_equal(noise_block(1, 0, 10, 1.0), noise_block(1, 1, 10, 1.0))


def test_noise_statistics():
    x = noise_block(2024, 0, 100_000, 0.01)
    assert abs(x.mean()) < 3 * 0.01 / math.sqrt(1e5)
    assert x.std() == pytest.approx(0.01, rel=0.02)


def test_negative_std_rejected():
    with pytest.raises(ValueError):
        sample_noise(NoiseStream(0), -1.0)
