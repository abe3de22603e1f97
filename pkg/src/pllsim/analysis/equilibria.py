"""Equilibria of the phase-space model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import PhaseState, PllParams
from ..models import phase_jacobian, phase_rhs

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Equilibrium:
    x_star: float
    theta_delta_star: float
    jacobian_eigenvalues: tuple
    stability: str  # "stable", "saddle" or "unstable"

    @property
    def state(self) -> PhaseState:
        return PhaseState(self.x_star, self.theta_delta_star)


def _residual(x, theta, params):
    d = phase_rhs(PhaseState(x, theta), params)
    return np.array([d.x, d.theta_delta])


def classify_eigenvalues(eig) -> str:
    re = np.real(eig)
    if np.all(re < 0):
        return "stable"
    if np.min(re) < 0 < np.max(re):
        return "saddle"
    return "unstable"


def find_equilibria(params: PllParams) -> list[Equilibrium]:
    """All rest points with theta_delta in [0, 2*pi), sorted by angle.

    Setting x' = 0 gives x = -b*phi/A; substituting into the phase equation
    leaves phi(theta) = omega_delta / (L*k) with k = h - c*b/A (k = 1 for the
    lead-lag filter), so sin(theta) = 2*omega_delta/(L*k). Each root is
    polished with Newton steps on the full two-dimensional system.
    """
    f = params.filter
    k = f.h - f.c * f.b / f.A
    if k == 0.0:
        # the phase detector does not reach the VCO in steady state
        if params.omega_delta != 0.0:
            return []
        raise ValueError("every phase is an equilibrium when the loop is open and omega_delta = 0")
    s = 2.0 * params.omega_delta / (params.L * k)
    if abs(s) > 1.0:
        return []
    base = math.asin(s)
    angles = sorted({round(a % TWO_PI, 15) for a in (base, math.pi - base)})
    result = []
    for theta in angles:
        x = -f.b * 0.5 * math.sin(theta) / f.A
        for _ in range(5):
            r = _residual(x, theta, params)
            if np.max(np.abs(r)) == 0.0:
                break
            jac = phase_jacobian(x, theta, params)
            if abs(np.linalg.det(jac)) < 1e-300:
                break
            dx, dth = np.linalg.solve(jac, -r)
            x, theta = x + dx, theta + dth
        theta %= TWO_PI
        eig = np.linalg.eigvals(phase_jacobian(x, theta, params))
        result.append(Equilibrium(float(x), float(theta), tuple(complex(e) for e in eig),
                                  classify_eigenvalues(eig)))
    return result


def equilibrium_residual(eq: Equilibrium, params: PllParams) -> float:
    return float(np.linalg.norm(_residual(eq.x_star, eq.theta_delta_star, params)))
