#!/usr/bin/env python3
"""Survey the invariants of axis-aligned fillings over a range of (n, s).

Prints one block per spec: systoles, the H^q(G; ZG) table, and the
classification flags.
"""

import argparse

import numpy as np

from warpfill.filling_topology import CuspSpec, FillingSpec, classify
from warpfill.model_spaces import LatticeTorus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=5)
    ap.add_argument("--side", type=float, default=7.0)
    args = ap.parse_args()

    for n in range(2, args.n_max + 1):
        for s in range(1, n + 1):
            lat = LatticeTorus(np.eye(n) * args.side)
            coeffs = np.zeros((s, n), dtype=int)
            for i in range(s):
                coeffs[i, i] = 1
            spec = FillingSpec(n, (CuspSpec(lat, coeffs),))
            print(classify(spec).render())
            print()


if __name__ == "__main__":
    main()
