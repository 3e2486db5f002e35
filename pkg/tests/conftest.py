import numpy as np
import pytest

from warpfill.model_spaces import LatticeTorus
from warpfill.numerics import Cosh, ExpShift, Sinh
from warpfill.warp_engine import WarpedSpace
from warpfill.warp_functions import build_fg


@pytest.fixture(scope="session")
def fg_pair():
    """The lambda = 1.6, delta0 = 0.2 warping pair (built once per run)."""
    f, g, delta, kappa_floor = build_fg(1.6, 0.2)
    return {"f": f, "g": g, "delta": delta, "kappa_floor": kappa_floor, "lam": 1.6}


@pytest.fixture(scope="session")
def h2_space():
    """R x_{e^r} E^1, an isometric copy of the hyperbolic plane."""
    return WarpedSpace(interval=(-6.0, 6.0), euclid_dim=1, warp_g=ExpShift(0.0))


@pytest.fixture(scope="session")
def singular_model():
    """[0, 3] x_{cosh} E^1 x_{sinh} T^1, torus circumference 7."""
    return WarpedSpace(
        interval=(0.0, 3.0),
        euclid_dim=1,
        warp_g=Cosh(),
        torus=LatticeTorus(np.eye(1) * 7.0),
        warp_f=Sinh(),
    )


@pytest.fixture(scope="session")
def fg_space(fg_pair):
    """Doubly warped space built from the constructed (f, g) pair."""
    return WarpedSpace(
        interval=(0.0, 2.6),
        euclid_dim=1,
        warp_g=fg_pair["g"],
        torus=LatticeTorus(np.eye(1) * 7.0),
        warp_f=fg_pair["f"],
    )


def make_filling(n, dims, side=7.0):
    """FillingSpec on the side-`side` square lattice with axis-aligned
    filling sublattices of the given dimensions."""
    from warpfill.filling_topology import CuspSpec, FillingSpec

    lat = LatticeTorus(np.eye(n) * side)
    cusps = []
    for d in dims:
        coeffs = np.zeros((d, n), dtype=int)
        for i in range(d):
            coeffs[i, i] = 1
        cusps.append(CuspSpec(lat, coeffs))
    return FillingSpec(n, tuple(cusps))
