"""Phase-detector characteristics and right-hand sides of the two PLL models.

The signal-space model keeps the multiplier output sin(theta1)*cos(theta2)
with its double-frequency component. The phase-space model replaces it by the
averaged characteristic 0.5*sin(theta_delta).

The ``*_kernel`` functions are numba-compiled versions with the
``rhs(t, y, p)`` calling convention used by :mod:`pllsim.odeint`, where ``p`` is
:meth:`PllParams.as_vector`.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .core import PhaseState, PllParams, SignalState

# indices into PllParams.as_vector()
W1, W2FREE, GAIN, FA, FB, FC, FH = range(7)


def pd_instant(theta1, theta2):
    """Multiplier phase-detector output sin(theta1)*cos(theta2)."""
    return np.sin(theta1) * np.cos(theta2)


def pd_averaged(theta_delta):
    """Carrier-averaged phase-detector characteristic."""
    return 0.5 * np.sin(theta_delta)


def signal_rhs(state: SignalState, params: PllParams) -> SignalState:
    """Time derivative of (x, theta1, theta2) for the signal-space model."""
    f = params.filter
    phi = math.sin(state.theta1) * math.cos(state.theta2)
    return SignalState(
        f.A * state.x + f.b * phi,
        params.omega1,
        params.omega2_free + params.L * (f.c * state.x + f.h * phi),
    )


def phase_rhs(state: PhaseState, params: PllParams) -> PhaseState:
    """Time derivative of (x, theta_delta) for the averaged phase-space model."""
    f = params.filter
    phi = 0.5 * math.sin(state.theta_delta)
    return PhaseState(
        f.A * state.x + f.b * phi,
        params.omega_delta - params.L * (f.c * state.x + f.h * phi),
    )


@njit(cache=True)
def signal_rhs_kernel(t, y, p):
    phi = math.sin(y[1]) * math.cos(y[2])
    out = np.empty(3)
    out[0] = p[FA] * y[0] + p[FB] * phi
    out[1] = p[W1]
    out[2] = p[W2FREE] + p[GAIN] * (p[FC] * y[0] + p[FH] * phi)
    return out


@njit(cache=True)
def phase_rhs_kernel(t, y, p):
    phi = 0.5 * math.sin(y[1])
    out = np.empty(2)
    out[0] = p[FA] * y[0] + p[FB] * phi
    out[1] = (p[W1] - p[W2FREE]) - p[GAIN] * (p[FC] * y[0] + p[FH] * phi)
    return out


def signal_g(states: np.ndarray, params: PllParams) -> np.ndarray:
    """Filter output g(t) = c*x + h*phi(t) along signal-model samples."""
    f = params.filter
    phi = pd_instant(states[:, 1], states[:, 2])
    return f.c * states[:, 0] + f.h * phi


def phase_g(states: np.ndarray, params: PllParams) -> np.ndarray:
    """Filter output g(t) = c*x + h*phi(theta_delta) along phase-model samples."""
    f = params.filter
    return f.c * states[:, 0] + f.h * pd_averaged(states[:, 1])


def phase_jacobian(x: float, theta_delta: float, params: PllParams) -> np.ndarray:
    """2x2 Jacobian of the phase-space model."""
    f = params.filter
    dphi = 0.5 * math.cos(theta_delta)
    return np.array(
        [
            [f.A, f.b * dphi],
            [-params.L * f.c, -params.L * f.h * dphi],
        ]
    )
