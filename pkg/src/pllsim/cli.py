"""Command-line experiment runner.

Exit codes: 0 success, 1 verdict mismatch against the example's claim,
2 configuration error, 3 integrator error, 4 empty analysis result.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis.lock import LockCriteria, detect_lock
from .analysis.orbits import NoSignChange, find_cycle_fold, find_periodic_orbits, orbit_gap
from .analysis.sensitivity import tolerance_config
from .core import PhaseState, PllParams, SignalState, Trajectory
from .odeint import ADAPTIVE_RK45, FIXED_RK4, IntegrationError, IntegratorConfig, signal_default_dt
from .presets import EXAMPLES, PRESETS, TAU1, TAU2
from .simulate import signal_config, simulate

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_INTEGRATOR, EXIT_EMPTY = range(5)
MAX_ROWS = 100_000

# flag dest -> config-file key (identical apart from dashes)
CONFIG_KEYS = ("model", "w1", "w2free", "L", "tau1", "tau2", "x0", "theta0", "theta1_0",
               "theta2_0", "method", "dt", "rtol", "atol", "t_end", "window", "freq_tol",
               "phase_drift_tol", "escape_threshold", "out", "stride")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    params: PllParams
    initial: object  # PhaseState or SignalState
    integrator: IntegratorConfig
    lock: LockCriteria
    out: Optional[str] = None
    stride: Optional[int] = None


def _add_common(p: argparse.ArgumentParser):
    g = p.add_argument_group("experiment")
    g.add_argument("--config", help="JSON file with flat key/value settings; flags override it")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--model", choices=("signal", "phase"))
    g.add_argument("--w1", type=float, help="reference frequency omega1 (rad/s)")
    g.add_argument("--w2free", type=float, help="VCO free-running frequency (rad/s)")
    g.add_argument("--L", type=float, help="VCO gain")
    g.add_argument("--tau1", type=float)
    g.add_argument("--tau2", type=float)
    g.add_argument("--x0", type=float, help="initial filter state")
    g.add_argument("--theta0", type=float, help="initial phase difference (phase model)")
    g.add_argument("--theta1-0", dest="theta1_0", type=float, help="reference phase (signal model)")
    g.add_argument("--theta2-0", dest="theta2_0", type=float, help="VCO phase (signal model)")
    g.add_argument("--method", choices=(FIXED_RK4, ADAPTIVE_RK45))
    g.add_argument("--dt", type=float)
    g.add_argument("--rtol", type=float)
    g.add_argument("--atol", type=float, help="default 0.1*rtol")
    g.add_argument("--t-end", dest="t_end", type=float)
    g.add_argument("--window", type=float)
    g.add_argument("--freq-tol", dest="freq_tol", type=float)
    g.add_argument("--phase-drift-tol", dest="phase_drift_tol", type=float)
    g.add_argument("--escape-threshold", dest="escape_threshold", type=float)
    g.add_argument("--out")
    g.add_argument("--stride", type=int, help=f"keep every n-th sample (default: at most {MAX_ROWS} rows)")


def _settings(args) -> dict:
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a flat JSON object")
        unknown = set(values) - set(CONFIG_KEYS) - {"preset"}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in CONFIG_KEYS + ("preset",):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return values


def build_config(args) -> ExperimentConfig:
    s = _settings(args)
    preset = PRESETS.get(s["preset"]) if "preset" in s else None
    if "preset" in s and preset is None:
        raise ConfigError(f"unknown preset {s['preset']!r}")
    scenario = preset.scenarios[0] if preset else None

    model = s.get("model", scenario.model if scenario else "phase")
    if model not in ("signal", "phase"):
        raise ConfigError(f"unknown model {model!r}")
    try:
        base = preset.params if preset else None
        lead = base.lead_lag if base else None
        params = PllParams.from_lead_lag(
            s.get("w1", base.omega1 if base else None),
            s.get("w2free", base.omega2_free if base else None),
            s.get("L", base.L if base else None),
            s.get("tau1", lead.tau1 if lead else TAU1),
            s.get("tau2", lead.tau2 if lead else TAU2),
        )
    except TypeError as exc:
        raise ConfigError("w1, w2free and L are required without a preset") from exc
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc

    init = scenario.initial if scenario else None
    if isinstance(init, PhaseState) and model == "signal":
        init = SignalState(init.x, init.theta_delta, 0.0)
    elif isinstance(init, SignalState) and model == "phase":
        init = PhaseState(init.x, init.theta1 - init.theta2)
    x0 = s.get("x0", init.x if init else 0.0)
    try:
        if model == "phase":
            if "theta1_0" in s or "theta2_0" in s:
                raise ConfigError("the phase model takes theta0, not absolute phases")
            initial = PhaseState(x0, s.get("theta0", init.theta_delta if init else 0.0))
        else:
            if "theta0" in s:
                raise ConfigError("the signal model takes absolute phases theta1_0 and theta2_0")
            initial = SignalState(x0, s.get("theta1_0", init.theta1 if init else 0.0),
                                  s.get("theta2_0", init.theta2 if init else 0.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    method = s.get("method", FIXED_RK4 if model == "signal" else ADAPTIVE_RK45)
    rtol = s.get("rtol", 1e-9)
    try:
        integrator = IntegratorConfig(
            method=method,
            dt=s.get("dt", signal_default_dt(params.omega1)),
            rtol=rtol,
            atol=s.get("atol", 0.1 * rtol),
            t_end=s.get("t_end", 5.0),
            max_steps=10**9,
        )
        lock = LockCriteria(**{k: s[k] for k in ("window", "freq_tol", "phase_drift_tol",
                                                 "escape_threshold") if k in s})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    stride = s.get("stride")
    if stride is not None and stride < 1:
        raise ConfigError("stride must be positive")
    return ExperimentConfig(model, params, initial, integrator, lock, s.get("out"), stride)


def write_trajectory_csv(path: str, traj: Trajectory, stride: Optional[int] = None) -> int:
    """Write ``t,x,theta_delta,g``; returns the number of data rows."""
    n = len(traj.times)
    if stride is None:
        # decimate() also keeps the final sample
        stride = 1 if n <= MAX_ROWS else math.ceil((n - 1) / (MAX_ROWS - 2))
    t = traj.decimate(stride)
    data = np.column_stack([t.times, t.x, t.theta_delta, t.g])
    _savetxt(path, data, "t,x,theta_delta,g")
    return len(data)


def _savetxt(path, data, header, fmt="%.17g"):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    np.savetxt(path, data, fmt=fmt, delimiter=",", header=header, comments="", newline="\n")


def cmd_simulate(args) -> int:
    cfg = build_config(args)
    traj = simulate(cfg.model, cfg.params, cfg.initial, cfg.integrator)
    verdict = detect_lock(traj, cfg.lock)
    if cfg.out:
        rows = write_trajectory_csv(cfg.out, traj, cfg.stride)
        print(f"wrote {rows} rows to {cfg.out}")
    print(verdict)
    return EXIT_OK


def _scenario_config(params, scenario, t_end):
    if scenario.model == "phase":
        return tolerance_config(scenario.rtol or 1e-9, t_end)
    return signal_config(params, t_end=t_end)


def cmd_example(args) -> int:
    ex = EXAMPLES[args.n]
    out = args.out or f"example{args.n}"
    os.makedirs(out, exist_ok=True)
    lines, statuses, ok = [], [], True
    for i, sc in enumerate(ex.scenarios):
        cfg = _scenario_config(ex.params, sc, args.t_end)
        traj = simulate(sc.model, ex.params, sc.initial, cfg)
        v = detect_lock(traj)
        statuses.append(v.status.value)
        write_trajectory_csv(os.path.join(out, f"scenario{i + 1}.csv"), traj)
        mark = ""
        if ex.rule == "match":
            hit = v.status.value == sc.expected
            ok &= hit
            mark = f" expected {sc.expected}: {'ok' if hit else 'MISMATCH'}"
        lines.append(f"example {args.n} [{sc.model}] {sc.label}: {v.status.value}{mark}")
    if ex.rule == "flip":
        ok = len(set(statuses)) > 1
        lines.append(f"verdicts {'differ' if ok else 'agree (no flip)'}")
    lines.append("PASS" if ok else "FAIL")
    text = "\n".join(lines) + "\n"
    with open(os.path.join(out, "summary.txt"), "w", newline="\n") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_portrait(args) -> int:
    cfg = build_config(args)
    if cfg.model != "phase":
        raise ConfigError("portraits use the phase model")
    seeds = args.seed or [(cfg.initial.x, cfg.initial.theta_delta)]
    out = cfg.out or "portrait"
    os.makedirs(out, exist_ok=True)
    for i, (x0, th0) in enumerate(seeds):
        traj = simulate("phase", cfg.params, PhaseState(x0, th0), cfg.integrator)
        v = detect_lock(traj, cfg.lock)
        data = np.column_stack([np.mod(traj.theta_delta, 2 * math.pi), traj.x])
        path = os.path.join(out, f"seed{i + 1}.csv")
        _savetxt(path, data, "theta_delta_mod_2pi,x")
        print(f"seed {i + 1} (x0={x0:g}, theta0={th0:g}): {v.status.value} -> {path}")
    orbits = find_periodic_orbits(cfg.params, x_scan_range=tuple(args.x_range))
    rows = np.array([[o.section_x, o.section_theta, o.period, o.multiplier,
                      1.0 if o.stability == "stable" else 0.0] for o in orbits]).reshape(-1, 5)
    _savetxt(os.path.join(out, "orbits.csv"), rows,
             "section_x,section_theta,period,multiplier,stable")
    print(f"{len(orbits)} orbit(s) -> {os.path.join(out, 'orbits.csv')}")
    return EXIT_OK


def _basin_cell(job):
    model, params, integrator, lock, x0, th0 = job
    if model == "phase":
        initial = PhaseState(x0, th0)
    else:
        initial = SignalState(x0, th0, 0.0)
    return detect_lock(simulate(model, params, initial, integrator), lock).status.value


def cmd_basin(args) -> int:
    cfg = build_config(args)
    nx, nt = args.resolution
    if nx < 2 or nt < 2:
        raise ConfigError("resolution must be at least 2 per axis")
    xs = np.linspace(*args.x0_range, nx)
    ths = np.linspace(*args.theta0_range, nt)
    jobs = [(cfg.model, cfg.params, cfg.integrator, cfg.lock, float(x), float(th))
            for x in xs for th in ths]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            verdicts = list(pool.map(_basin_cell, jobs))
    else:
        verdicts = [_basin_cell(j) for j in jobs]
    out = cfg.out or "basin.csv"
    with open(out, "w", newline="\n") as fh:
        fh.write("x0,theta0,verdict\n")
        for (_, _, _, _, x, th), v in zip(jobs, verdicts):
            fh.write(f"{x:.17g},{th:.17g},{v}\n")
    counts = {v: verdicts.count(v) for v in sorted(set(verdicts))}
    print(f"wrote {len(jobs)} cells to {out}: {counts}")
    return EXIT_OK


def cmd_orbits(args) -> int:
    cfg = build_config(args)
    orbits = find_periodic_orbits(cfg.params, x_scan_range=tuple(args.x_range), n_scan=args.n_scan,
                                  section_theta=args.section)
    if not orbits:
        print("no rotation orbits found")
        return EXIT_EMPTY
    print(f"{'section_x':>22} {'period':>12} {'multiplier':>12}  stability")
    for o in orbits:
        print(f"{o.section_x:22.15g} {o.period:12.6g} {o.multiplier:12.6g}  {o.stability}")
    print(f"gap: {orbit_gap(orbits):.6g}")
    return EXIT_OK


def cmd_bifurcate(args) -> int:
    cfg = build_config(args)
    try:
        fold = find_cycle_fold(cfg.params, tuple(args.range), width=args.width)
    except NoSignChange as exc:
        print(exc)
        return EXIT_EMPTY
    print(f"cycle fold at omega_delta = {fold.omega_delta:.6f} rad/s "
          f"(orbit gap {fold.gap:.3g} at {fold.pair_side:.6f})")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pllsim", description="Classical PLL simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one model and export t,x,theta_delta,g")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("example", help="reproduce a reference example")
    p.add_argument("n", type=int, choices=sorted(EXAMPLES))
    p.add_argument("--out", help="output directory (default exampleN)")
    p.add_argument("--t-end", dest="t_end", type=float, default=5.0)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("portrait", help="phase-portrait trajectories plus located orbits")
    _add_common(p)
    p.add_argument("--seed", nargs=2, type=float, action="append", metavar=("X0", "THETA0"))
    p.add_argument("--x-range", nargs=2, type=float, default=(-0.5, 0.5))
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("basin", help="lock verdict over a grid of initial states")
    _add_common(p)
    p.add_argument("--x0-range", nargs=2, type=float, required=True)
    p.add_argument("--theta0-range", nargs=2, type=float, required=True)
    p.add_argument("--resolution", nargs=2, type=int, default=(11, 11), metavar=("NX", "NTHETA"))
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_basin)

    p = sub.add_parser("orbits", help="table of rotation orbits")
    _add_common(p)
    p.add_argument("--x-range", nargs=2, type=float, default=(-0.5, 0.5))
    p.add_argument("--n-scan", type=int, default=200)
    p.add_argument("--section", type=float, default=0.0)
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("bifurcate", help="locate the cycle fold in omega_delta")
    _add_common(p)
    p.add_argument("--range", nargs=2, type=float, default=(150.0, 250.0))
    p.add_argument("--width", type=float, default=1e-3)
    p.set_defaults(func=cmd_bifurcate)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"integrator error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR


if __name__ == "__main__":
    sys.exit(main())
