"""Phase portrait around the coexisting rotations of the fast-VCO example.

Locates both rotation orbits and the equilibria, classifies the stable
rotation (hidden or self-excited) and integrates a few seeds at
theta_delta = 0, writing one CSV per seed plus orbit curves to --out.
"""

import argparse
import math
import os

import numpy as np

from pllsim.analysis import classify_attractor, find_equilibria, find_periodic_orbits, orbit_gap
from pllsim.analysis.lock import detect_lock
from pllsim.analysis.orbits import orbit_curve, returns_from
from pllsim.core import PhaseState
from pllsim.odeint import REFERENCE
from pllsim.presets import rotation_example_params
from pllsim.simulate import simulate_phase


def save(path, traj):
    data = np.column_stack([np.mod(traj.theta_delta, 2 * math.pi), traj.x])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header="theta_delta_mod_2pi,x", comments="")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/portrait")
    ap.add_argument("--t-end", type=float, default=5.0)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    params = rotation_example_params()
    orbits = find_periodic_orbits(params)
    eqs = find_equilibria(params)
    for e in eqs:
        print(f"equilibrium x*={e.x_star:.7f} theta*={e.theta_delta_star:.5f} ({e.stability})")
    for o in orbits:
        print(f"orbit x={o.section_x:.10f} period={o.period:.5f} mu={o.multiplier:.4f} ({o.stability})")
        save(os.path.join(args.out, f"orbit_{o.stability}.csv"), orbit_curve(o, params))
    print(f"gap between the orbits: {orbit_gap(orbits):.3g}")

    stable = next(o for o in orbits if o.stability == "stable")
    unstable = next(o for o in orbits if o.stability == "unstable")
    print(f"stable rotation is {classify_attractor(stable, params, eqs).value}")

    eq = next(e for e in eqs if e.stability == "stable")
    seeds = {
        "outer_0.2206": 0.2206,
        "outer_0.1874": 0.187386698333130,
        "between_orbits": 0.5 * (stable.section_x + unstable.section_x),
        "inner": 0.5 * (eq.x_star + unstable.section_x),
    }
    cfg = REFERENCE.replace(t_end=args.t_end)
    for name, x0 in seeds.items():
        traj = simulate_phase(params, PhaseState(x0, 0.0), cfg)
        xs = returns_from(x0, 0.0, params, 40)
        tail = f"x after {len(xs) - 1} returns: {xs[-1]:.6g}" if len(xs) > 1 else "captured before the first return"
        print(f"seed {name:15s} x0={x0:.6g}: {detect_lock(traj).status.value}; {tail}")
        save(os.path.join(args.out, f"seed_{name}.csv"), traj)


if __name__ == "__main__":
    main()
