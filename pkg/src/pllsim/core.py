"""Domain types for the classical PLL and the lead-lag filter realization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class LeadLagFilter:
    """Passive lead-lag filter F(s) = (1 + s*tau2) / (1 + s*(tau1 + tau2)).

    Parameters
    ----------
    tau1, tau2 : float
        Time constants in seconds.
    """

    tau1: float
    tau2: float

    def __post_init__(self):
        if not (math.isfinite(self.tau1) and math.isfinite(self.tau2)):
            raise ValueError("filter time constants must be finite")
        if self.tau1 + self.tau2 == 0:
            raise ZeroDivisionError("tau1 + tau2 must be nonzero")
        if self.tau1 <= 0:
            raise ValueError(f"tau1 must be positive, got {self.tau1}")
        if self.tau2 < 0:
            raise ValueError(f"tau2 must be non-negative, got {self.tau2}")


@dataclass(frozen=True)
class FilterRealization:
    """First-order state-space form: x' = A x + b u, g = c x + h u."""

    A: float
    b: float
    c: float
    h: float


def lead_lag_realization(filt: LeadLagFilter) -> FilterRealization:
    """State-space coefficients of the lead-lag filter.

    >>> r = lead_lag_realization(LeadLagFilter(1.0, 0.0))
    >>> (r.A, r.b, r.c, r.h)
    (-1.0, 1.0, 1.0, 0.0)
    """
    total = filt.tau1 + filt.tau2
    if total == 0:
        raise ZeroDivisionError("tau1 + tau2 must be nonzero")
    return FilterRealization(
        A=-1.0 / total,
        b=1.0 - filt.tau2 / total,
        c=1.0 / total,
        h=filt.tau2 / total,
    )


def filter_output(realization: FilterRealization, x, phi):
    """Loop-filter output g = c*x + h*phi (works elementwise on arrays)."""
    return realization.c * x + realization.h * phi


@dataclass(frozen=True)
class PllParams:
    """Loop constants of the classical PLL.

    ``omega1`` is the reference frequency, ``omega2_free`` the VCO free-running
    frequency (both rad/s) and ``L`` the VCO gain.
    """

    omega1: float
    omega2_free: float
    L: float
    filter: FilterRealization
    # only kept so closed-form equilibria can be reported; optional
    lead_lag: Optional[LeadLagFilter] = None

    def __post_init__(self):
        if not self.omega1 > 0:
            raise ValueError(f"omega1 must be positive, got {self.omega1}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @property
    def omega_delta(self) -> float:
        return self.omega1 - self.omega2_free

    @classmethod
    def from_lead_lag(cls, omega1, omega2_free, L, tau1, tau2) -> "PllParams":
        filt = LeadLagFilter(tau1, tau2)
        return cls(omega1, omega2_free, L, lead_lag_realization(filt), filt)

    def with_detuning(self, omega_delta: float) -> "PllParams":
        """Same loop with ``omega2_free`` moved so that omega1 - omega2_free = omega_delta."""
        return PllParams(self.omega1, self.omega1 - omega_delta, self.L, self.filter, self.lead_lag)

    def with_gain(self, L: float) -> "PllParams":
        return PllParams(self.omega1, self.omega2_free, L, self.filter, self.lead_lag)

    def as_vector(self) -> np.ndarray:
        """Parameter vector consumed by the compiled right-hand sides."""
        f = self.filter
        return np.array([self.omega1, self.omega2_free, self.L, f.A, f.b, f.c, f.h], dtype=float)


def _check_finite(name, *values):
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"{name} fields must be finite")


@dataclass(frozen=True)
class SignalState:
    x: float
    theta1: float
    theta2: float

    def __post_init__(self):
        _check_finite("SignalState", self.x, self.theta1, self.theta2)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.theta1, self.theta2], dtype=float)

    @property
    def theta_delta(self) -> float:
        return self.theta1 - self.theta2


@dataclass(frozen=True)
class PhaseState:
    x: float
    theta_delta: float

    def __post_init__(self):
        _check_finite("PhaseState", self.x, self.theta_delta)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.theta_delta], dtype=float)


def wrap_phase(theta):
    """Reduce phases to [0, 2*pi); for output only, the dynamics use unwrapped phases."""
    return np.mod(theta, 2.0 * np.pi)


@dataclass
class Trajectory:
    """Time-stamped samples of a PLL run.

    ``states`` is an ``(n, dim)`` array whose rows are either (x, theta1, theta2)
    for ``model="signal"`` or (x, theta_delta) for ``model="phase"``. ``g`` holds
    the loop-filter output at every sample; it may be ``None`` for generic ODEs.
    """

    times: np.ndarray
    states: np.ndarray
    g: Optional[np.ndarray] = None
    model: str = "generic"
    carrier_period: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim == 1:
            self.states = self.states[:, None]
        n = len(self.times)
        if self.states.shape[0] != n or (self.g is not None and len(self.g) != n):
            raise ValueError("times, states and g must have equal lengths")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def theta_delta(self) -> np.ndarray:
        if self.model == "signal":
            return self.states[:, 1] - self.states[:, 2]
        if self.model == "phase":
            return self.states[:, 1]
        raise ValueError(f"theta_delta undefined for model {self.model!r}")

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def state(self, i: int):
        row = self.states[i]
        if self.model == "signal":
            return SignalState(*row)
        if self.model == "phase":
            return PhaseState(*row)
        return row

    def decimate(self, stride: int) -> "Trajectory":
        """Every ``stride``-th sample; the last sample is always kept."""
        if stride <= 1:
            return self
        idx = np.arange(0, len(self), stride)
        if idx[-1] != len(self) - 1:
            idx = np.append(idx, len(self) - 1)
        return Trajectory(
            self.times[idx],
            self.states[idx],
            None if self.g is None else self.g[idx],
            self.model,
            self.carrier_period,
            dict(self.meta),
        )
