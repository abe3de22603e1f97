"""Lock detection on simulated trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..core import Trajectory


class TrajectoryTooShort(ValueError):
    pass


class LockStatus(str, Enum):
    LOCKED = "locked"
    NOT_LOCKED = "not_locked"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class LockCriteria:
    """Thresholds applied to the tail window of a run.

    ``escape_threshold`` bounds the unwrapped excursion |theta_delta - theta_delta(0)|.
    It is infinite by default: a run that slips cycles and then settles counts
    as locked. Pass a finite value (e.g. ``4*pi``) to reject cycle slipping.
    """

    window: float = 1.0
    freq_tol: float = 1.0
    phase_drift_tol: float = 0.1
    escape_threshold: float = math.inf

    def __post_init__(self):
        for name in ("window", "freq_tol", "phase_drift_tol", "escape_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class LockVerdict:
    status: LockStatus
    final_theta_delta: float
    residual_freq: float
    tail_drift: float = math.nan

    @property
    def locked(self) -> bool:
        return self.status is LockStatus.LOCKED

    def __str__(self):
        return (f"{self.status.value} (final theta_delta={self.final_theta_delta:.6g} rad, "
                f"residual freq={self.residual_freq:.3g} rad/s)")


def carrier_average(times: np.ndarray, values: np.ndarray, period: float) -> np.ndarray:
    """Moving average over one carrier period on a uniform time grid.

    The first samples (less than a period in) are averaged over what is
    available so that the output has the input's length.
    """
    if len(times) < 2:
        return values.copy()
    step = (times[-1] - times[0]) / (len(times) - 1)
    n = int(round(period / step))
    if n < 2:
        return values.copy()
    csum = np.concatenate(([0.0], np.cumsum(values)))
    out = np.empty_like(values)
    idx = np.arange(len(values))
    lo = np.maximum(idx - n + 1, 0)
    out[:] = (csum[idx + 1] - csum[lo]) / (idx + 1 - lo)
    return out


def slow_theta_delta(traj: Trajectory) -> np.ndarray:
    """theta_delta with the carrier-frequency ripple of the signal model removed."""
    theta = traj.theta_delta
    if traj.model == "signal" and traj.carrier_period:
        return carrier_average(traj.times, theta, traj.carrier_period)
    return theta


def detect_lock(traj: Trajectory, criteria: LockCriteria = LockCriteria()) -> LockVerdict:
    """Classify a run as locked, not locked or undecided.

    Locked: over the tail window the theta_delta range stays within
    ``phase_drift_tol`` and the mean |d theta_delta/dt| within ``freq_tol``.
    For signal-model runs theta_delta is first averaged over one carrier
    period, so the double-frequency ripple of the multiplier does not count
    as frequency error.
    """
    t = traj.times
    if len(t) < 2 or t[-1] - t[0] < 2.0 * criteria.window:
        raise TrajectoryTooShort(
            f"trajectory spans {t[-1] - t[0]:.3g} s, need at least {2 * criteria.window:.3g} s"
        )
    theta = slow_theta_delta(traj)
    tail = t >= t[-1] - criteria.window
    # keep one sample before the window so the tail covers the full window
    first = max(int(np.argmax(tail)) - 1, 0)
    tt, th = t[first:], theta[first:]
    drift = float(np.ptp(th))
    residual = float(np.sum(np.abs(np.diff(th))) / (tt[-1] - tt[0]))
    final = float(traj.theta_delta[-1])

    escaped = float(np.max(np.abs(traj.theta_delta - traj.theta_delta[0]))) > criteria.escape_threshold
    if escaped or residual > criteria.freq_tol:
        status = LockStatus.NOT_LOCKED
    elif drift <= criteria.phase_drift_tol:
        status = LockStatus.LOCKED
    else:
        status = LockStatus.UNDECIDED
    return LockVerdict(status, final, residual, drift)
