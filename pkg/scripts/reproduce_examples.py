"""Run the four reference examples and print their verdict summaries.

Usage: python scripts/reproduce_examples.py [--out results] [--only 1 3]
"""

import argparse
import os
import sys

from pllsim import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--only", nargs="*", type=int, default=[1, 2, 3, 4])
    args = ap.parse_args()
    codes = {}
    for n in args.only:
        print(f"== example {n}")
        codes[n] = cli.main(["example", str(n), "--out", os.path.join(args.out, f"example{n}")])
    print("\n".join(f"example {n}: {'match' if c == 0 else 'mismatch'}" for n, c in codes.items()))
    return 0 if all(c == 0 for c in codes.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
