"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line."""
import pytest

from smcquad import acceptance


@pytest.fixture(scope="module")
def logs():
    return acceptance.run_logs()


@pytest.fixture
def report(capsys):
    def emit(result):
        with capsys.disabled():
            print("\n" + result.line())
        assert result.passed, result.detail
    return emit


def test_c01_equilibrium_hold(logs, report):
    report(acceptance.check_equilibrium(logs))


def test_c02_altitude_tracking(logs, report):
    report(acceptance.check_altitude_tracking(logs))


def test_c03_attitude_tracking(logs, report):
    report(acceptance.check_attitude_tracking(logs))


def test_c04_lyapunov_decrease(logs, report):
    report(acceptance.check_lyapunov_decrease(logs))


def test_c05_mass_estimation_constant(logs, report):
    report(acceptance.check_mass_constant(logs))


def test_c06_mass_estimation_step(logs, report):
    report(acceptance.check_mass_step(logs))


def test_c07_observer_convergence(logs, report):
    report(acceptance.check_observer_convergence(logs))


def test_c08_noise_robustness(logs, report):
    report(acceptance.check_noise_robustness(logs))


def test_c09_closed_loop_residual(logs, report):
    report(acceptance.check_closed_loop_residual(logs))


def test_c10_oracles_and_round_trips(report):
    report(acceptance.check_oracles())


def test_c11_determinism(logs, report):
    report(acceptance.check_determinism(logs))
