#!/usr/bin/env python3
"""Solver-vs-closed-form benchmark on the hyperbolic plane chart.

Samples random point pairs in R x_{e^r} E^1, solves each geodesic with the
variational solver, and compares against the upper half-plane distance
formula through the chart map (r, x) -> x + i e^{-r}.
"""

import argparse
import time

import numpy as np

from warpfill.model_spaces import halfplane_distance
from warpfill.numerics import ExpShift
from warpfill.warp_engine import WarpedSpace, WPoint, solve_geodesic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=2)
    ap.add_argument("--segments", type=int, default=16)
    ap.add_argument("--refine-tol", type=float, default=5e-5)
    ap.add_argument("--max-distance", type=float, default=5.0)
    args = ap.parse_args()

    space = WarpedSpace(interval=(-6.0, 6.0), euclid_dim=1, warp_g=ExpShift(0.0))
    rng = np.random.default_rng(args.seed)
    errs = []
    t0 = time.time()
    while len(errs) < args.pairs:
        p = WPoint(rng.uniform(-1.5, 1.5), [rng.uniform(-1.5, 1.5)])
        q = WPoint(rng.uniform(-1.5, 1.5), [rng.uniform(-1.5, 1.5)])
        exact = halfplane_distance(
            p.e[0] + 1j * np.exp(-p.r), q.e[0] + 1j * np.exp(-q.r)
        )
        if not 1e-3 < exact <= args.max_distance:
            continue
        res = solve_geodesic(
            space, p, q, n_segments=args.segments, seed=0, refine_tol=args.refine_tol
        )
        errs.append(abs(res.distance - exact))
    errs = np.array(errs)
    dt = time.time() - t0
    print(f"pairs:      {args.pairs}")
    print(f"max error:  {errs.max():.3e}")
    print(f"mean error: {errs.mean():.3e}")
    print(f"time:       {dt:.1f}s ({dt / args.pairs * 1e3:.0f} ms/pair)")


if __name__ == "__main__":
    main()
