"""Explicit Runge-Kutta integration with event location.

Two methods are available:

* ``fixed_rk4``: classical four-stage RK4 on a uniform grid t_k = k*dt.
* ``adaptive_rk45``: Dormand-Prince 5(4) pair (local extrapolation, FSAL) with a
  PI step-size controller, safety factor 0.9 and step ratio clamped to [0.2, 5].

Right-hand sides use the ``rhs(t, y, p) -> ndarray`` convention. They are
numba-compiled; a plain Python callable is compiled on first use.

Stepping runs in compiled chunks; between chunks the accepted steps are
scanned for sign changes of the event functions. A crossing is refined by
bisecting the length of a single step taken from the left end of the
bracketing step (no dense output). Results do not depend on the chunk size.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from types import SimpleNamespace
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np
from numba import njit
from numba.core.registry import CPUDispatcher

from .core import Trajectory

FIXED_RK4 = "fixed_rk4"
ADAPTIVE_RK45 = "adaptive_rk45"
METHODS = (FIXED_RK4, ADAPTIVE_RK45)

_EMPTY_P = np.zeros(0)


class IntegrationError(RuntimeError):
    pass


class StepLimitExceeded(IntegrationError):
    pass


class StepUnderflow(IntegrationError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings.

    ``dt`` is used by ``fixed_rk4`` only, ``rtol``/``atol``/``max_step`` by
    ``adaptive_rk45`` only. ``atol`` may be a scalar or one value per state
    component. ``record_every`` keeps every k-th accepted step (plus the last).
    """

    method: str = ADAPTIVE_RK45
    dt: float = 1e-3
    rtol: float = 1e-9
    atol: Union[float, tuple] = 1e-12
    t_end: float = 5.0
    max_steps: int = 50_000_000
    max_step: float = math.inf
    record_every: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.method == FIXED_RK4 and not self.dt > 0:
            raise ValueError("dt must be positive for fixed_rk4")
        if self.method == ADAPTIVE_RK45:
            if not 0 < self.rtol <= 1e-2:
                raise ValueError(f"rtol must lie in (0, 1e-2], got {self.rtol}")
            if not np.all(np.asarray(self.atol, dtype=float) > 0):
                raise ValueError("atol must be positive")
            if not self.max_step > 0:
                raise ValueError("max_step must be positive")
        if self.max_steps < 1 or self.record_every < 1:
            raise ValueError("max_steps and record_every must be >= 1")

    def replace(self, **changes) -> "IntegratorConfig":
        from dataclasses import replace

        return replace(self, **changes)


#: reference ("truth") configuration for the phase model
REFERENCE = IntegratorConfig(method=ADAPTIVE_RK45, rtol=1e-9, atol=1e-12)
#: coarse configuration; atol = 0.1*rtol keeps the filter state (~1e-2) under
#: relative control, like a solver's automatic absolute tolerance
COARSE = IntegratorConfig(method=ADAPTIVE_RK45, rtol=1e-3, atol=1e-4)


def signal_default_dt(omega1: float) -> float:
    """Twenty RK4 steps per reference-carrier period."""
    return 2.0 * math.pi / (20.0 * omega1)


@dataclass(frozen=True)
class EventSpec:
    """Zero crossing of ``function(t, y)``.

    ``direction`` is ``"rising"`` (negative to non-negative), ``"falling"`` or
    ``"both"``. A terminal event stops the integration at the refined time.
    A ``vectorized`` function takes ``(times, states)`` with states of shape
    (n, dim) and returns n values, which lets a whole chunk be scanned at once.
    """

    function: Callable[[float, np.ndarray], float]
    direction: str = "both"
    terminal: bool = False
    vectorized: bool = False

    def __post_init__(self):
        if self.direction not in ("rising", "falling", "both"):
            raise ValueError(f"bad event direction {self.direction!r}")

    def crosses(self, g0: float, g1: float) -> bool:
        rising = (g0 < 0.0) & (g1 >= 0.0)
        falling = (g0 > 0.0) & (g1 <= 0.0)
        if self.direction == "rising":
            return rising
        if self.direction == "falling":
            return falling
        return rising | falling

    def values(self, ts: np.ndarray, ys: np.ndarray) -> np.ndarray:
        if self.vectorized:
            return np.asarray(self.function(ts, ys), dtype=float)
        return np.array([float(self.function(t, y)) for t, y in zip(ts, ys)])

    def value(self, t: float, y: np.ndarray) -> float:
        if self.vectorized:
            return float(self.function(np.array([t]), y[None, :])[0])
        return float(self.function(t, y))


class EventHit(NamedTuple):
    t: float
    y: np.ndarray
    index: int


# --------------------------------------------------------------------------
# compiled kernels

@njit(cache=True)
def _rk4_step(rhs, t, y, h, p):
    k1 = rhs(t, y, p)
    k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1, p)
    k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2, p)
    k4 = rhs(t + h, y + h * k3, p)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def _rk4_chunk(rhs, t0, k0, y, dt, n_total, t_end, p, nmax, every):
    """Advance from step index k0 by at most nmax steps; returns recorded rows."""
    d = y.shape[0]
    ts = np.empty(nmax)
    ys = np.empty((nmax, d))
    m = 0
    k = k0
    for _ in range(nmax):
        if k >= n_total:
            break
        t = t0 + k * dt
        t_next = t_end if k + 1 == n_total else t0 + (k + 1) * dt
        y = _rk4_step(rhs, t, y, t_next - t, p)
        k += 1
        if k % every == 0 or k == n_total:
            ts[m] = t_next
            ys[m] = y
            m += 1
    return ts[:m], ys[:m], k, y


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# 5th minus 4th order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


@njit(cache=True)
def _dp_step(rhs, t, y, k1, h, p):
    k2 = rhs(t + _C2 * h, y + h * (_A21 * k1), p)
    k3 = rhs(t + _C3 * h, y + h * (_A31 * k1 + _A32 * k2), p)
    k4 = rhs(t + _C4 * h, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3), p)
    k5 = rhs(t + _C5 * h, y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4), p)
    k6 = rhs(t + h, y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5), p)
    y_new = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
    k7 = rhs(t + h, y_new, p)
    err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
    return y_new, k7, err


@njit(cache=True)
def _err_norm(err, y, y_new, rtol, atol):
    e = 0.0
    for i in range(err.shape[0]):
        sc = atol[i] + rtol * max(abs(y[i]), abs(y_new[i]))
        r = abs(err[i]) / sc
        if not np.isfinite(r) or not np.isfinite(y_new[i]):
            return np.inf  # overflow: reject and shrink the step
        e = max(e, r)
    return e


@njit(cache=True)
def _initial_step(rhs, t, y, f0, p, rtol, atol, t_end, max_step):
    d0 = 0.0
    d1 = 0.0
    for i in range(y.shape[0]):
        sc = atol[i] + rtol * abs(y[i])
        d0 = max(d0, abs(y[i]) / sc)
        d1 = max(d1, abs(f0[i]) / sc)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_end - t, max_step)
    y1 = y + h0 * f0
    f1 = rhs(t + h0, y1, p)
    d2 = 0.0
    for i in range(y.shape[0]):
        sc = atol[i] + rtol * abs(y[i])
        d2 = max(d2, abs(f1[i] - f0[i]) / sc)
    d2 /= h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, t_end - t, max_step)


@njit(cache=True)
def _dp_chunk(rhs, t, y, f0, h, err_prev, p, rtol, atol, t_end, max_step, h_min,
              nmax, every, n_acc):
    """Run up to nmax accepted steps.

    Status: 0 chunk full, 1 reached t_end, 2 step underflow.
    """
    d = y.shape[0]
    ts = np.empty(nmax)
    ys = np.empty((nmax, d))
    m = 0
    accepted = 0
    status = 0
    rejected_last = False
    while accepted < nmax:
        if t >= t_end:
            status = 1
            break
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        y_new, k7, err = _dp_step(rhs, t, y, f0, h, p)
        e = _err_norm(err, y, y_new, rtol, atol)
        if e <= 1.0:
            t = t_end if last else t + h
            y = y_new
            f0 = k7
            accepted += 1
            n_acc += 1
            if n_acc % every == 0 or t >= t_end:
                ts[m] = t
                ys[m] = y
                m += 1
            if e == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * e ** (-0.7 / 5.0) * err_prev ** (0.4 / 5.0)
                fac = min(5.0, max(0.2, fac))
            if rejected_last:
                fac = min(fac, 1.0)
            err_prev = max(e, 1e-4)
            rejected_last = False
            h = min(h * fac, max_step)
        else:
            fac = max(0.2, 0.9 * e ** (-1.0 / 5.0))
            h = h * fac
            rejected_last = True
            if h < h_min:
                status = 2
                break
    if status == 0 and t >= t_end:
        status = 1
    return ts[:m], ys[:m], t, y, f0, h, err_prev, status, n_acc


# --------------------------------------------------------------------------
# python drivers


@functools.lru_cache(maxsize=None)
def _compiled(rhs):
    if isinstance(rhs, CPUDispatcher):
        return rhs
    return njit(rhs)


@functools.lru_cache(maxsize=None)
def _bound(rhs):
    """Kernels with ``rhs`` baked in.

    A compiled function passed as an argument costs a slow type lookup on every
    call. Closures avoid that, at the price of compiling once per process and
    per right-hand side (numba cannot cache closures on disk).
    """

    @njit
    def rk4_chunk(t0, k0, y, dt, n_total, t_end, p, nmax, every):
        return _rk4_chunk(rhs, t0, k0, y, dt, n_total, t_end, p, nmax, every)

    @njit
    def rk4_step(t, y, h, p):
        return _rk4_step(rhs, t, y, h, p)

    @njit
    def dp_chunk(t, y, f0, h, err_prev, p, rtol, atol, t_end, max_step, h_min, nmax,
                 every, n_acc):
        return _dp_chunk(rhs, t, y, f0, h, err_prev, p, rtol, atol, t_end, max_step, h_min,
                         nmax, every, n_acc)

    @njit
    def dp_step(t, y, h, p):
        return _dp_step(rhs, t, y, rhs(t, y, p), h, p)[0]

    @njit
    def start(t, y, p, rtol, atol, t_end, max_step):
        f0 = rhs(t, y, p)
        return f0, _initial_step(rhs, t, y, f0, p, rtol, atol, t_end, max_step)

    return SimpleNamespace(rk4_chunk=rk4_chunk, rk4_step=rk4_step, dp_chunk=dp_chunk,
                           dp_step=dp_step, start=start)


def _as_state(initial) -> np.ndarray:
    if hasattr(initial, "as_array"):
        return initial.as_array()
    return np.atleast_1d(np.asarray(initial, dtype=float)).copy()


class _Stepper:
    """Chunked driver shared by ``integrate`` and ``integrate_with_events``."""

    def __init__(self, rhs, y0, config: IntegratorConfig, p, t0=0.0):
        self.kern = _bound(_compiled(rhs))
        self.cfg = config
        self.p = _EMPTY_P if p is None else np.ascontiguousarray(p, dtype=float)
        self.t = self.t0 = float(t0)
        self.y = y0
        self.t_end = float(config.t_end)
        self.n_acc = 0
        d = y0.shape[0]
        if config.method == FIXED_RK4:
            n = (self.t_end - self.t) / config.dt
            self.n_total = max(1, int(math.ceil(n - 1e-9)))
            self.k = 0
        else:
            atol = np.broadcast_to(np.asarray(config.atol, dtype=float), (d,))
            self.atol = np.ascontiguousarray(atol)
            self.f0, self.h = self.kern.start(self.t, y0, self.p, config.rtol, self.atol,
                                              self.t_end, config.max_step)
            self.err_prev = 1e-4
            self.h_min = 1e-14 * self.t_end

    @property
    def done(self) -> bool:
        if self.cfg.method == FIXED_RK4:
            return self.k >= self.n_total
        return self.t >= self.t_end

    def advance(self, nmax: int, every: int):
        cfg = self.cfg
        nmax = max(1, min(nmax, cfg.max_steps - self.n_acc))
        if cfg.method == FIXED_RK4:
            ts, ys, self.k, self.y = self.kern.rk4_chunk(
                self.t0, self.k, self.y, cfg.dt, self.n_total, self.t_end, self.p, nmax, every
            )
            self.n_acc = self.k
            if len(ts):
                self.t = ts[-1]
        else:
            (ts, ys, self.t, self.y, self.f0, self.h, self.err_prev, status,
             self.n_acc) = self.kern.dp_chunk(
                self.t, self.y, self.f0, self.h, self.err_prev, self.p,
                cfg.rtol, self.atol, self.t_end, cfg.max_step, self.h_min, nmax, every,
                self.n_acc,
            )
            if status == 2:
                raise StepUnderflow(f"step size fell below {self.h_min:g} at t={self.t:.9g}")
        if self.n_acc >= cfg.max_steps and not self.done:
            raise StepLimitExceeded(f"max_steps={cfg.max_steps} reached at t={self.t:.9g}")
        return ts, ys

    def single_step(self, t, y, h):
        """One step of length h from (t, y), used for event refinement."""
        if self.cfg.method == FIXED_RK4:
            return self.kern.rk4_step(t, y, h, self.p)
        return self.kern.dp_step(t, y, h, self.p)


def integrate(rhs, initial, config: IntegratorConfig, p=None) -> Trajectory:
    """Integrate ``y' = rhs(t, y, p)`` from t=0 to ``config.t_end``.

    Samples are recorded at accepted steps (every ``config.record_every``-th).
    """
    traj, _ = integrate_with_events(rhs, initial, config, (), p)
    return traj


def _refine(stepper: _Stepper, fun, t0, y0, t1, y1, g0, g1):
    """Locate the crossing inside one step by re-stepping from its start.

    Illinois false position on the step length, stopping once
    |fun| <= 1e-12*(1+|y|) or the bracket collapses.
    """
    lo, hi = 0.0, t1 - t0
    glo, ghi = g0, g1
    best_t, best_y, best_g = (t0, y0, g0) if abs(g0) < abs(g1) else (t1, y1, g1)
    side = 0
    for _ in range(200):
        tol = 1e-12 * (1.0 + float(np.abs(best_y).max()))
        if abs(best_g) <= tol:
            break
        mid = hi - ghi * (hi - lo) / (ghi - glo) if ghi != glo else 0.5 * (lo + hi)
        if not lo < mid < hi:
            mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
        y_mid = stepper.single_step(t0, y0, mid)
        g_mid = fun(t0 + mid, y_mid)
        if abs(g_mid) < abs(best_g):
            best_t, best_y, best_g = t0 + mid, y_mid, g_mid
        if (g_mid < 0.0) == (glo < 0.0) and glo != 0.0:
            lo, glo = mid, g_mid
            if side == -1:
                ghi *= 0.5
            side = -1
        else:
            hi, ghi = mid, g_mid
            if side == 1:
                glo *= 0.5
            side = 1
    return best_t, best_y


def integrate_with_events(
    rhs,
    initial,
    config: IntegratorConfig,
    events: Sequence[EventSpec],
    p=None,
    t0: float = 0.0,
):
    """Integrate and locate zero crossings of ``events``.

    Returns ``(trajectory, hits)`` where ``hits`` is a time-ordered list of
    :class:`EventHit`. A terminal event ends the trajectory at the refined
    event point.
    """
    y0 = _as_state(initial)
    stepper = _Stepper(rhs, y0, config, p, t0)
    every = config.record_every
    times = [np.array([stepper.t])]
    states = [y0[None, :].copy()]
    hits: list[EventHit] = []

    t_prev, y_prev = stepper.t, y0
    g_prev = np.array([ev.value(t_prev, y_prev) for ev in events])
    # event scanning needs every step; record_every then applies to storage only
    scan_every = 1 if events else every
    nmax = 64 if events else 4096
    stopped = False
    while not stepper.done and not stopped:
        ts, ys = stepper.advance(nmax, scan_every)
        nmax = min(2 * nmax, 65536)
        if not events or len(ts) == 0:
            times.append(ts)
            states.append(ys)
            continue
        # g[j, i] is event j at sample i; column 0 is the last sample of the previous chunk
        g = np.empty((len(events), len(ts) + 1))
        g[:, 0] = g_prev
        for j, ev in enumerate(events):
            g[j, 1:] = ev.values(ts, ys)
        crossing = np.zeros(len(ts), dtype=bool)
        for j, ev in enumerate(events):
            crossing |= ev.crosses(g[j, :-1], g[j, 1:])
        for i in np.flatnonzero(crossing):
            t_a, y_a = (t_prev, y_prev) if i == 0 else (ts[i - 1], ys[i - 1])
            step_hits = []
            for j, ev in enumerate(events):
                if ev.crosses(g[j, i], g[j, i + 1]):
                    te, ye = _refine(stepper, ev.value, t_a, y_a, ts[i], ys[i], g[j, i], g[j, i + 1])
                    step_hits.append(EventHit(te, ye, j))
            step_hits.sort(key=lambda e: (e.t, e.index))
            for hit in step_hits:
                hits.append(hit)
                if events[hit.index].terminal:
                    stopped = True
                    break
            if stopped:
                times.append(np.append(ts[:i], hits[-1].t))
                states.append(np.vstack([ys[:i], hits[-1].y[None, :]]))
                break
        if not stopped:
            times.append(ts)
            states.append(ys)
            t_prev, y_prev, g_prev = ts[-1], ys[-1], g[:, -1].copy()

    t_all = np.concatenate(times)
    y_all = np.concatenate(states, axis=0)
    if events and every > 1:
        idx = np.arange(0, len(t_all), every)
        if idx[-1] != len(t_all) - 1:
            idx = np.append(idx, len(t_all) - 1)
        t_all, y_all = t_all[idx], y_all[idx]
    # a terminal event exactly on a step end would duplicate the time stamp
    keep = np.concatenate(([True], np.diff(t_all) > 0))
    traj = Trajectory(t_all[keep], y_all[keep])
    traj.meta["terminated_by_event"] = stopped
    traj.meta["accepted_steps"] = stepper.n_acc
    return traj, hits


def order_check(rhs, y0, exact: Callable[[float], np.ndarray], dts, t_end=1.0, p=None):
    """Observed convergence order of fixed-step RK4.

    Returns ``(slope, errors)``; the slope is ``nan`` when every error is at
    rounding level (nothing to fit).
    """
    errors = []
    for dt in dts:
        cfg = IntegratorConfig(method=FIXED_RK4, dt=dt, t_end=t_end)
        traj = integrate(rhs, y0, cfg, p)
        errors.append(float(np.max(np.abs(traj.final_state - exact(t_end)))))
    errors = np.array(errors)
    scale = 1.0 + float(np.max(np.abs(exact(t_end))))
    if np.all(errors <= 1e-13 * scale):
        return math.nan, errors
    slope = np.polyfit(np.log(dts), np.log(errors), 1)[0]
    return float(slope), errors
