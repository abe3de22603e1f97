"""Lock verdict of the slip-through seed against integrator tolerance.

Also compares the coarse run's x-steps across the section with the gap
between the stable and unstable rotations: a step larger than the gap can
carry the trajectory across it.
"""

import argparse

import numpy as np

from pllsim.analysis import find_periodic_orbits, orbit_gap, tolerance_sensitivity
from pllsim.analysis.sensitivity import tolerance_config
from pllsim.core import PhaseState
from pllsim.presets import rotation_example_params
from pllsim.simulate import simulate_phase


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--x0", type=float, default=0.1318)
    ap.add_argument("--theta0", type=float, default=0.0)
    ap.add_argument("--rtol", type=float, nargs="*", default=[1e-3, 3e-4, 1e-4, 1e-5, 1e-6, 1e-7, 1e-9, 1e-11])
    args = ap.parse_args()

    params = rotation_example_params()
    initial = PhaseState(args.x0, args.theta0)
    rep = tolerance_sensitivity(initial, params, args.rtol)
    for rtol, v in rep.verdicts:
        print(f"rtol={rtol:8.1e}  {v.status.value:10s}  final theta_delta={v.final_theta_delta:10.2f}")
    print(f"reference (rtol=1e-9): {rep.reference.status.value}; "
          f"coarsest agreeing rtol: {rep.coarsest_agreeing}")

    gap = orbit_gap(find_periodic_orbits(params))
    coarse = simulate_phase(params, initial, tolerance_config(max(args.rtol)))
    turns = np.floor(-coarse.theta_delta / (2 * np.pi))
    cross = np.nonzero(np.diff(turns) != 0)[0]
    dx = np.abs(np.diff(coarse.x))[cross]
    dt = np.diff(coarse.times)[cross]
    print(f"orbit gap {gap:.3g}; coarse run: {len(cross)} section crossings, "
          f"median |dx| per crossing step {np.median(dx):.3g}, max {np.max(dx):.3g}, "
          f"median step {np.median(dt):.3g} s")


if __name__ == "__main__":
    main()
