"""Orbit gap against detuning and the cycle-fold location (L = 500)."""

import argparse

import numpy as np

from pllsim.analysis import find_periodic_orbits, orbit_gap
from pllsim.analysis.orbits import find_cycle_fold
from pllsim.presets import rotation_example_params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--range", nargs=2, type=float, default=(150.0, 250.0))
    ap.add_argument("--points", type=int, default=11)
    args = ap.parse_args()
    base = rotation_example_params().with_detuning(178.9)
    fold = find_cycle_fold(base, tuple(args.range))
    print(f"cycle fold: omega_delta* = {fold.omega_delta:.4f} rad/s, gap there {fold.gap:.2g}")
    for d in np.geomspace(1e-2, 2.0, args.points):
        orbits = find_periodic_orbits(base.with_detuning(fold.omega_delta + d))
        print(f"omega_delta* + {d:7.4f}: {len(orbits)} orbits, gap {orbit_gap(orbits):.4g}")


if __name__ == "__main__":
    main()
