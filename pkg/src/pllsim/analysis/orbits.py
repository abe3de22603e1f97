"""Rotation-type periodic trajectories of the phase-space model.

A rotation advances theta_delta by 2*pi per period (in the direction of the
detuning). The return map P sends the filter state x at the section
theta_delta = s to its value at the next crossing of s + 2*pi*sign(omega_delta).
Its fixed points are the periodic trajectories; P'(x*) is the multiplier.
Initial states captured by an equilibrium never return (:class:`NoReturn`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np
from scipy.optimize import minimize_scalar

from ..core import PllParams, Trajectory
from .equilibria import find_equilibria
from ..models import phase_rhs_kernel
from ..odeint import IntegratorConfig, EventSpec, integrate_with_events

TWO_PI = 2.0 * math.pi

#: accuracy used for return maps; fixed points must be resolved to ~1e-10
ORBIT_CONFIG = IntegratorConfig(rtol=1e-12, atol=1e-14, t_end=1.0)

#: trajectories entering this disc around a stable equilibrium count as captured.
#: Rotations near the fold pass about 1e-2 from the focus, so the disc must be
#: much smaller than that.
CAPTURE_RADIUS = 1e-4


class NoReturn(RuntimeError):
    """The trajectory did not come back to the section within ``t_end``."""


class NoSignChange(ValueError):
    pass


@dataclass(frozen=True)
class PeriodicOrbit:
    section_x: float
    section_theta: float
    period: float
    multiplier: float
    stability: str  # "stable", "unstable" or "semistable"
    direction: int = 1

    def residual(self, params: PllParams, config: IntegratorConfig = ORBIT_CONFIG) -> float:
        nxt, _ = poincare_map(self.section_x, self.section_theta, params, config)
        return abs(nxt - self.section_x)


def rotation_direction(params: PllParams) -> int:
    return -1 if params.omega_delta < 0 else 1


def poincare_map(section_x: float, section_theta: float, params: PllParams,
                 config: IntegratorConfig = ORBIT_CONFIG, return_trajectory: bool = False):
    """One return to the section; returns ``(next_x, return_time)``.

    With ``return_trajectory=True`` the integrated arc is appended.
    """
    sgn = rotation_direction(params)
    target = section_theta + sgn * TWO_PI
    events = [EventSpec(lambda t, y: sgn * (y[..., 1] - target), "rising", terminal=True,
                        vectorized=True)]
    events += [_capture_event(eq) for eq in find_equilibria(params) if eq.stability == "stable"]
    traj, hits = integrate_with_events(
        phase_rhs_kernel, np.array([section_x, section_theta]), config, events, params.as_vector()
    )
    if not hits or hits[-1].index != 0:
        raise NoReturn(f"no return to the section from x={section_x!r} within {config.t_end} s")
    hit = hits[-1]
    if return_trajectory:
        traj.model = "phase"
        return float(hit.y[0]), float(hit.t), traj
    return float(hit.y[0]), float(hit.t)


def _capture_event(eq, radius=CAPTURE_RADIUS):
    """Terminal event on entering a small disc around a stable equilibrium."""

    def g(t, y):
        dth = (y[..., 1] - eq.theta_delta_star + math.pi) % TWO_PI - math.pi
        return radius - np.hypot(y[..., 0] - eq.x_star, dth)

    return EventSpec(g, "rising", terminal=True, vectorized=True)


def _displacement(params, theta, config):
    """F(x) = P(x) - x, or None where the map is undefined."""
    cache = {}

    def F(x):
        x = float(x)
        if x not in cache:
            try:
                cache[x] = poincare_map(x, theta, params, config)[0] - x
            except NoReturn:
                cache[x] = None
        return cache[x]

    return F


def _bisect_root(F, a, fa, b, fb, width):
    while b - a > width:
        m = 0.5 * (a + b)
        fm = F(m)
        if fm is None:
            return None
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    return 0.5 * (a + b)


def _domain_edge(F, a, b, iters=40):
    """Boundary between defined a and undefined b (either order)."""
    for _ in range(iters):
        m = 0.5 * (a + b)
        if F(m) is None:
            b = m
        else:
            a = m
    return a


def _hidden_pair(F, a, m, b, xatol=1e-13):
    """Look for a sign-changing dip of F inside [a, b] around the sample m.

    Returns the extremum location if F changes sign there, else None.
    """
    s = 1.0 if F(m) > 0 else -1.0
    big = 1e300

    def obj(x):
        v = F(x)
        return big if v is None else s * v

    res = minimize_scalar(obj, bounds=(a, b), method="bounded", options={"xatol": xatol})
    v = F(res.x)
    if v is not None and s * v < 0:
        return float(res.x)
    return None


def multiplier(F, x_star, delta=None) -> float:
    """Central difference of P at x_star (one-sided where P is undefined)."""
    if delta is None:
        delta = 1e-6 * (1.0 + abs(x_star))
    fp, fm = F(x_star + delta), F(x_star - delta)
    f0 = F(x_star)
    if fp is not None and fm is not None:
        return 1.0 + (fp - fm) / (2 * delta)
    if fp is not None and f0 is not None:
        return 1.0 + (fp - f0) / delta
    if fm is not None and f0 is not None:
        return 1.0 + (f0 - fm) / delta
    return math.nan


def classify_multiplier(mu: float) -> str:
    if abs(abs(mu) - 1.0) < 1e-3:
        return "semistable"
    return "stable" if abs(mu) < 1.0 else "unstable"


def find_periodic_orbits(params: PllParams, x_scan_range=(-0.5, 0.5), n_scan: int = 200,
                         config: IntegratorConfig = ORBIT_CONFIG, section_theta: float = 0.0,
                         root_width: float = 1e-10) -> list[PeriodicOrbit]:
    """Locate rotation orbits through their section points, sorted by x.

    F(x) = P(x) - x is sampled on a uniform grid. Brackets come from sign
    changes between defined neighbours; grid points without a return are
    excluded. Two refinements catch orbits that fall between grid points:
    cells next to a no-return point are resampled up to the edge of the
    map's domain, and every local extremum of F that keeps its sign on the
    grid is minimized to see whether it dips through zero (a close
    stable/unstable pair). Roots are then bisected to ``root_width``.
    """
    F = _displacement(params, section_theta, config)
    xs = list(np.linspace(x_scan_range[0], x_scan_range[1], n_scan))
    vals = [F(x) for x in xs]

    extra = []
    for i in range(len(xs) - 1):
        a, b = xs[i], xs[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if (fa is None) != (fb is None):
            edge = _domain_edge(F, a, b) if fa is not None else _domain_edge(F, b, a)
            lo, hi = (a, edge) if fa is not None else (edge, b)
            extra.extend(np.linspace(lo, hi, 34)[1:-1])
            extra.append(edge)
    if extra:
        xs = sorted(set(xs) | set(float(e) for e in extra))
        vals = [F(x) for x in xs]

    brackets = []
    for i in range(len(xs) - 1):
        fa, fb = vals[i], vals[i + 1]
        if fa is None or fb is None:
            continue
        if fa == 0.0:
            brackets.append((xs[i], xs[i]))
        elif (fa < 0) != (fb < 0):
            brackets.append((xs[i], xs[i + 1]))
    for i in range(1, len(xs) - 1):
        fl, fm, fr = vals[i - 1], vals[i], vals[i + 1]
        if fl is None or fm is None or fr is None:
            continue
        same_sign = (fl < 0) == (fm < 0) == (fr < 0)
        if same_sign and abs(fm) <= abs(fl) and abs(fm) <= abs(fr) and fm != 0.0:
            dip = _hidden_pair(F, xs[i - 1], xs[i], xs[i + 1])
            if dip is not None:
                brackets.append((xs[i - 1], dip))
                brackets.append((dip, xs[i + 1]))

    roots = []
    for a, b in brackets:
        if a == b:
            roots.append(a)
            continue
        r = _bisect_root(F, a, F(a), b, F(b), root_width)
        if r is not None:
            roots.append(r)
    roots.sort()
    unique = []
    for r in roots:
        if not unique or r - unique[-1] > 10 * root_width:
            unique.append(r)

    orbits = []
    for r in unique:
        try:
            _, period = poincare_map(r, section_theta, params, config)
        except NoReturn:
            continue
        mu = multiplier(F, r)
        orbits.append(PeriodicOrbit(r, section_theta, period, mu, classify_multiplier(mu),
                                    rotation_direction(params)))
    return orbits


def orbit_gap(orbits) -> float:
    """Distance between the outermost stable and unstable section points.

    Returns nan unless both a stable and an unstable orbit are present; with
    several of each, the smallest stable/unstable separation is reported.
    """
    stable = [o.section_x for o in orbits if o.stability == "stable"]
    unstable = [o.section_x for o in orbits if o.stability == "unstable"]
    if not stable or not unstable:
        return math.nan
    return min(abs(s - u) for s in stable for u in unstable)


def orbit_curve(orbit: PeriodicOrbit, params: PllParams,
                config: IntegratorConfig = ORBIT_CONFIG) -> Trajectory:
    """One period of the orbit, sampled at the integrator's accepted steps."""
    _, _, traj = poincare_map(orbit.section_x, orbit.section_theta, params, config,
                              return_trajectory=True)
    return traj


def has_orbit_pair(params: PllParams, **kwargs) -> bool:
    return len(find_periodic_orbits(params, **kwargs)) >= 2


@dataclass(frozen=True)
class FoldLocation:
    omega_delta: float
    pair_side: float  # detuning at the bracket end where the pair exists
    gap: float  # orbit gap at ``pair_side``


def _bisect_predicate(pred, lo, p_lo, hi, width):
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if pred(mid) == p_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def find_cycle_fold(params_template: PllParams, omega_delta_range=(150.0, 250.0),
                    config: IntegratorConfig = ORBIT_CONFIG, width: float = 1e-3,
                    n_scan: int = 21, **scan) -> FoldLocation:
    """Locate the detuning where the stable/unstable orbit pair is born.

    The range is sampled at ``n_scan`` detunings; every change of the
    predicate "at least two orbits" is bisected to ``width``. The pair can
    also disappear without the gap closing (the unstable orbit running into
    a saddle loop), so among the transitions the one with the smallest gap on
    the pair side is returned: that is where the two orbits merge into a
    semistable one.
    """
    cache = {}

    def orbits_at(w):
        if w not in cache:
            cache[w] = find_periodic_orbits(params_template.with_detuning(w), config=config, **scan)
        return cache[w]

    def pred(w):
        return len(orbits_at(w)) >= 2

    grid = np.linspace(omega_delta_range[0], omega_delta_range[1], n_scan)
    flags = [pred(w) for w in grid]
    if all(f == flags[0] for f in flags):
        raise NoSignChange(
            f"orbit-pair predicate is {flags[0]} everywhere on {tuple(omega_delta_range)}"
        )
    best = None
    for i in range(n_scan - 1):
        if flags[i] == flags[i + 1]:
            continue
        lo, hi = _bisect_predicate(pred, grid[i], flags[i], grid[i + 1], width)
        pair_side = lo if pred(lo) else hi
        gap = orbit_gap(orbits_at(pair_side))
        cand = FoldLocation(0.5 * (lo + hi), pair_side, gap)
        if best is None or not gap >= best.gap:
            best = cand
    return best


def locate_cycle_fold(params_template: PllParams, omega_delta_range=(150.0, 250.0),
                      config: IntegratorConfig = ORBIT_CONFIG, width: float = 1e-3,
                      **scan) -> float:
    """Detuning (rad/s) of the cycle fold; see :func:`find_cycle_fold`."""
    return find_cycle_fold(params_template, omega_delta_range, config, width, **scan).omega_delta


def returns_from(x0: float, theta0: float, params: PllParams, n_returns: int,
                 config: IntegratorConfig = ORBIT_CONFIG) -> list[float]:
    """Iterate the return map from (x0, theta0); stops early on capture."""
    xs = [x0]
    x = x0
    for _ in range(n_returns):
        try:
            x, _ = poincare_map(x, theta0, params, config)
        except NoReturn:
            break
        xs.append(x)
    return xs


def section_crossings(traj: Trajectory, section_theta: float, direction: int) -> np.ndarray:
    """x values where an (unwrapped) phase trajectory crosses section + 2*pi*k.

    Linear interpolation between samples; used for diagnostics on runs that
    were not integrated with events.
    """
    th = traj.theta_delta
    k = np.floor(direction * (th - section_theta) / TWO_PI)
    idx = np.nonzero(np.diff(k) == 1)[0]
    out = []
    for i in idx:
        level = section_theta + direction * TWO_PI * k[i + 1]
        w = (level - th[i]) / (th[i + 1] - th[i])
        out.append(traj.x[i] + w * (traj.x[i + 1] - traj.x[i]))
    return np.array(out)
