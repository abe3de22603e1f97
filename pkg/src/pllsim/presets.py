"""Parameter sets and initial data of the reference examples."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .core import PhaseState, PllParams, SignalState

TAU1 = 0.0448
TAU2 = 0.0185


def signal_example_params() -> PllParams:
    """omega1 = 1e5, detuning 95 rad/s, L = 250."""
    return PllParams.from_lead_lag(100000.0, 100000.0 - 95.0, 250.0, TAU1, TAU2)


def rotation_example_params() -> PllParams:
    """omega1 = 1e4, |detuning| = 178.9 rad/s, L = 500.

    The VCO runs fast (omega2_free = omega1 + 178.9): in this orientation the
    stable rotation lies above the unstable one at the section and the seed
    x0 = 0.1318 sits in the band the coarse integrator slips across.
    """
    return PllParams.from_lead_lag(10000.0, 10000.0 + 178.9, 500.0, TAU1, TAU2)


@dataclass(frozen=True)
class Scenario:
    label: str
    model: str  # "signal" or "phase"
    initial: object  # SignalState or PhaseState
    expected: str  # LockStatus value
    rtol: Optional[float] = None  # phase-model runs only


@dataclass(frozen=True)
class Example:
    number: int
    params: PllParams
    scenarios: tuple = field(default_factory=tuple)
    #: "match": every scenario must reproduce ``expected``;
    #: "flip": the verdicts of the scenarios must differ
    rule: str = "match"


def _signal(x0, theta_delta0=0.0):
    return SignalState(x0, theta_delta0, 0.0)


EXAMPLES = {
    1: Example(1, signal_example_params(), (
        Scenario("x0=0.18", "signal", _signal(0.18), "not_locked"),
        Scenario("x0=0", "signal", _signal(0.0), "locked"),
    )),
    2: Example(2, signal_example_params(), (
        Scenario("theta0=pi", "signal", _signal(0.01, math.pi), "not_locked"),
        Scenario("theta0=0", "signal", _signal(0.01, 0.0), "locked"),
    )),
    3: Example(3, signal_example_params(), (
        Scenario("signal", "signal", _signal(0.017, 2.276), "not_locked"),
        Scenario("phase", "phase", PhaseState(0.017, 2.276), "locked"),
    )),
    4: Example(4, rotation_example_params(), (
        Scenario("rtol=1e-3", "phase", PhaseState(0.1318, 0.0), "", rtol=1e-3),
        Scenario("rtol=1e-9", "phase", PhaseState(0.1318, 0.0), "", rtol=1e-9),
    ), rule="flip"),
}

PRESETS = {f"example{n}": ex for n, ex in EXAMPLES.items()}
