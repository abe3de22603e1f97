"""Plot CSV files written by the pllsim CLI or the scripts (needs matplotlib).

Trajectory files (t,x,theta_delta,g) get theta_delta(t) and g(t) panels;
portrait files (theta_delta_mod_2pi,x) are drawn together in one plane.
"""

import argparse
import csv

import matplotlib.pyplot as plt
import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("files", nargs="+")
    ap.add_argument("--save", help="write the figure instead of showing it")
    args = ap.parse_args()

    with open(args.files[0]) as fh:
        header = next(csv.reader(fh))
    if header[0] == "t":
        fig, (top, bottom) = plt.subplots(2, 1, sharex=True)
        for f in args.files:
            d = np.loadtxt(f, delimiter=",", skiprows=1)
            top.plot(d[:, 0], d[:, 2], label=f)
            bottom.plot(d[:, 0], d[:, 3])
        top.set_ylabel("theta_delta (rad)")
        bottom.set_ylabel("g")
        bottom.set_xlabel("t (s)")
        top.legend(fontsize="small")
    else:
        fig, ax = plt.subplots()
        for f in args.files:
            d = np.loadtxt(f, delimiter=",", skiprows=1).reshape(-1, 2)
            ax.plot(d[:, 0], d[:, 1], ".", ms=1, label=f)
        ax.set_xlabel("theta_delta mod 2pi")
        ax.set_ylabel("x")
        ax.legend(fontsize="small", markerscale=8)
    if args.save:
        fig.savefig(args.save, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
