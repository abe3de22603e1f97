"""Run either PLL model and attach the loop-filter output g(t)."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .core import PhaseState, PllParams, SignalState, Trajectory
from .models import phase_g, phase_rhs_kernel, signal_g, signal_rhs_kernel
from .odeint import FIXED_RK4, REFERENCE, IntegratorConfig, integrate, signal_default_dt


def signal_config(params: PllParams, t_end: float = 5.0, dt: Optional[float] = None,
                  record_every: int = 1) -> IntegratorConfig:
    """Fixed-step RK4 resolving the carrier (default 20 steps per period)."""
    return IntegratorConfig(
        method=FIXED_RK4,
        dt=signal_default_dt(params.omega1) if dt is None else dt,
        t_end=t_end,
        max_steps=10**9,
        record_every=record_every,
    )


def _state(initial, n):
    if hasattr(initial, "as_array"):
        y = initial.as_array()
    else:
        y = np.asarray(initial, dtype=float)
    if y.shape != (n,):
        raise ValueError(f"expected a state of length {n}, got shape {y.shape}")
    return y


def simulate_phase(params: PllParams, initial, config: IntegratorConfig = REFERENCE) -> Trajectory:
    y0 = _state(initial, 2)
    traj = integrate(phase_rhs_kernel, y0, config, params.as_vector())
    traj.model = "phase"
    traj.g = phase_g(traj.states, params)
    return traj


def simulate_signal(params: PllParams, initial, config: Optional[IntegratorConfig] = None) -> Trajectory:
    y0 = _state(initial, 3)
    if config is None:
        config = signal_config(params)
    traj = integrate(signal_rhs_kernel, y0, config, params.as_vector())
    traj.model = "signal"
    traj.carrier_period = 2.0 * math.pi / params.omega1
    traj.g = signal_g(traj.states, params)
    return traj


def simulate(model: str, params: PllParams, initial, config: Optional[IntegratorConfig] = None) -> Trajectory:
    if model == "phase":
        return simulate_phase(params, initial, REFERENCE if config is None else config)
    if model == "signal":
        return simulate_signal(params, initial, config)
    raise ValueError(f"unknown model {model!r}")


def matched_phase_state(state: SignalState) -> PhaseState:
    return PhaseState(state.x, state.theta1 - state.theta2)
