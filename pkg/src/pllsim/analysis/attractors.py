"""Hidden versus self-excited classification of rotation attractors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..core import PllParams
from ..models import phase_jacobian, phase_rhs_kernel
from ..odeint import REFERENCE, IntegratorConfig, integrate
from .equilibria import Equilibrium, find_equilibria
from .orbits import PeriodicOrbit, orbit_curve

TWO_PI = 2.0 * math.pi


class NoStableOrbit(ValueError):
    pass


class AttractorKind(str, Enum):
    SELF_EXCITED = "self_excited"
    HIDDEN = "hidden"


@dataclass(frozen=True)
class AttractorProtocol:
    """Perturbation protocol around non-stable equilibria.

    ``n_directions`` seeds on a circle of radius ``radius`` plus both
    directions of every unstable eigenvector. A seed reaches the orbit when
    its trajectory stays within ``proximity`` of the orbit curve, in
    (x, theta_delta mod 2*pi), over the second half of ``t_end``.
    """

    n_directions: int = 16
    radius: float = 1e-3
    proximity: float = 1e-2
    t_end: float = 2.0


def perturbation_seeds(eq: Equilibrium, params: PllParams, n_directions: int, radius: float):
    angles = TWO_PI * np.arange(n_directions) / n_directions
    seeds = [(eq.x_star + radius * math.cos(a), eq.theta_delta_star + radius * math.sin(a))
             for a in angles]
    w, v = np.linalg.eig(phase_jacobian(eq.x_star, eq.theta_delta_star, params))
    for lam, vec in zip(w, v.T):
        if lam.real > 0 and abs(lam.imag) < 1e-12:
            u = np.real(vec) / np.linalg.norm(np.real(vec))
            for s in (1.0, -1.0):
                seeds.append((eq.x_star + s * radius * u[0], eq.theta_delta_star + s * radius * u[1]))
    return seeds


def _wrapped_distance(points, curve):
    """Distance from each point to the nearest curve sample on the cylinder."""
    out = np.empty(len(points))
    for i, (x, th) in enumerate(points):
        dth = (curve[:, 1] - th + math.pi) % TWO_PI - math.pi
        out[i] = np.sqrt(np.min((curve[:, 0] - x) ** 2 + dth ** 2))
    return out


def _dense_curve(orbit, params, config):
    traj = orbit_curve(orbit, params, config)
    # the integrator steps are too sparse for a 1e-2 proximity test; interpolate
    s = np.concatenate(([0.0], np.cumsum(np.hypot(np.diff(traj.x), np.diff(traj.theta_delta)))))
    fine = np.linspace(0.0, s[-1], max(2000, len(s)))
    return np.column_stack([np.interp(fine, s, traj.x), np.interp(fine, s, traj.theta_delta)])


def reaches_orbit(seed, curve, params, protocol: AttractorProtocol,
                  config: IntegratorConfig = REFERENCE) -> bool:
    traj = integrate(phase_rhs_kernel, np.asarray(seed, dtype=float),
                     config.replace(t_end=protocol.t_end), params.as_vector())
    tail = traj.times >= 0.5 * protocol.t_end
    pts = traj.states[tail]
    return bool(np.all(_wrapped_distance(pts, curve) < protocol.proximity))


def classify_attractor(orbit: PeriodicOrbit, params: PllParams, equilibria=None,
                       protocol: AttractorProtocol = AttractorProtocol(),
                       config: IntegratorConfig = REFERENCE) -> AttractorKind:
    """Self-excited if a trajectory leaving the neighbourhood of a saddle or
    unstable equilibrium ends on the orbit, hidden otherwise."""
    if orbit.stability != "stable":
        raise NoStableOrbit(f"orbit at x={orbit.section_x:.6g} is {orbit.stability}")
    if equilibria is None:
        equilibria = find_equilibria(params)
    sources = [eq for eq in equilibria if eq.stability != "stable"]
    if not sources:
        return AttractorKind.HIDDEN
    curve = _dense_curve(orbit, params, config)
    for eq in sources:
        for seed in perturbation_seeds(eq, params, protocol.n_directions, protocol.radius):
            if reaches_orbit(seed, curve, params, protocol, config):
                return AttractorKind.SELF_EXCITED
    return AttractorKind.HIDDEN
