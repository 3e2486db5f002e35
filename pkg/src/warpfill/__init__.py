"""warpfill: doubly warped product geometry and 2-pi filling invariants."""

__version__ = "0.1.0"

from .warp_functions import SmoothWarpFunction, build_fg  # noqa: F401
from .warp_engine import (  # noqa: F401
    GeodesicResult,
    PolylinePath,
    WarpedSpace,
    WPoint,
    path_length,
    solve_geodesic,
)
from .model_spaces import (  # noqa: F401
    JoinPoint,
    LatticeTorus,
    halfplane_distance,
    spherical_join_distance,
    torus_systole,
)
from .filling_topology import (  # noqa: F401
    INFINITE,
    CohomologyProfile,
    CuspSpec,
    FillingSpec,
    classify,
    group_cohomology,
)
