"""Adaptive sliding-mode control and super-twisting observation of a quadrotor."""
from .control import (AxisControllerConfig, AxisReference, MassEstimatorState, ReferenceSample,
                      altitude_control, attitude_control_pitch, attitude_control_roll,
                      attitude_control_yaw, closed_loop_residual, lyapunov_v1, lyapunov_v2,
                      mass_adaptation_derivative, sliding_surface)
from .dynamics import (AngleSingularity, ControlVector, DisturbanceSample, InfeasibleAllocation,
                       QuadrotorParams, RigidBodyState, RotorSpeeds, SaturatedAllocation,
                       controls_from_rotors, gyro_residual, rotors_from_controls, state_derivative)
from .logio import emit_figure_data, read_log, summarize, write_log
from .observer import ObserverGains, SuperTwistingObserverState, correction_terms, \
    observer_derivative, suggest_gains
from .scenario import Scenario, parse_scenario
from .simulation import NonFiniteState, TimeSeriesLog, rk4_step, run_scenario

__version__ = "0.1.0"
