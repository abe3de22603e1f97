import os

import pytest
from hypothesis import HealthCheck, settings

from pllsim.analysis.orbits import find_cycle_fold, find_periodic_orbits
from pllsim.presets import rotation_example_params, signal_example_params

# compiled kernels make the first example of a test slow
settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def signal_params():
    return signal_example_params()


@pytest.fixture(scope="session")
def rotation_params():
    return rotation_example_params()


@pytest.fixture(scope="session")
def rotation_orbits(rotation_params):
    return find_periodic_orbits(rotation_params)


@pytest.fixture(scope="session")
def cycle_fold(rotation_params):
    return find_cycle_fold(rotation_params.with_detuning(178.9), (150.0, 250.0))


@pytest.fixture
def acceptance():
    """Record and print one pass/fail line, then assert."""

    def check(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
