"""Doubly warped products [r_min, r_max] x_{g} E^k x_{f} T.

Path lengths are exact (adaptive quadrature of the warped integrand along
chart-straight segments); geodesics are found variationally, by minimizing
the discrete energy of a polyline over interior vertex coordinates, with an
outer search over deck shifts of the torus factor and, for singular spaces,
over paths that pass through the collapsed core {f = 0} where the torus
coordinate can jump for free.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import (
    NonpositiveWarpError,
    OutOfDomainError,
    OutOfRangeError,
    SingularPointError,
    SolverFailureError,
    ValidationError,
)
from .model_spaces import LatticeTorus
from .numerics import ANALYTIC_REGISTRY, ScalarC2, adaptive_gauss, as_scalar_c2
from .warp_functions import SmoothWarpFunction

__all__ = [
    "WarpedSpace",
    "WPoint",
    "PolylinePath",
    "GeodesicResult",
    "path_length",
    "solve_geodesic",
    "distance_to_core",
    "direction_at_singular",
    "alexandrov_angle",
    "log_map",
    "path_point_at_arclength",
    "space_from_json_dict",
    "space_to_json_dict",
]

SINGULAR_TOL = 1e-12
GRAD_TOL = 1e-8
REFINE_TOL = 1e-7
MAX_SEGMENTS = 1024


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

def _weval(w, r, order=0):
    """Evaluate a warp handle (ScalarC2 or SmoothWarpFunction)."""
    return w.d(r, order)


@dataclass(frozen=True)
class WarpedSpace:
    interval: tuple
    euclid_dim: int
    warp_g: object
    torus: LatticeTorus | None = None
    warp_f: object | None = None
    singular_at_zero: bool = field(init=False, default=False)

    def __post_init__(self):
        a, b = float(self.interval[0]), float(self.interval[1])
        if not a < b:
            raise ValidationError(f"empty interval {self.interval}")
        object.__setattr__(self, "interval", (a, b))
        if self.euclid_dim < 0:
            raise ValidationError("euclid_dim must be >= 0")
        object.__setattr__(self, "warp_g", as_scalar_c2(self.warp_g))
        if (self.torus is None) != (self.warp_f is None):
            raise ValidationError("torus and warp_f must be supplied together")
        if self.warp_f is not None:
            object.__setattr__(self, "warp_f", as_scalar_c2(self.warp_f))
        rr = np.linspace(a, b, 257)
        if np.min(_weval(self.warp_g, rr)) <= 0:
            raise NonpositiveWarpError("warp_g must be positive on the interval")
        if self.warp_f is not None:
            f0 = float(_weval(self.warp_f, a))
            singular = abs(f0) <= SINGULAR_TOL
            if np.min(_weval(self.warp_f, rr[1:])) <= 0:
                raise NonpositiveWarpError("warp_f must be positive on the open interval")
            if not singular and f0 <= 0:
                raise NonpositiveWarpError("warp_f(r_min) must be 0 or positive")
            object.__setattr__(self, "singular_at_zero", singular)
        if self.singular_at_zero and a < 0:
            raise ValidationError("singular spaces require r_min >= 0")

    @property
    def r_min(self):
        return self.interval[0]

    @property
    def r_max(self):
        return self.interval[1]

    @property
    def torus_dim(self):
        return 0 if self.torus is None else self.torus.dim

    def f(self, r, order=0):
        if self.warp_f is None:
            raise ValidationError("space has no torus factor")
        return _weval(self.warp_f, r, order)

    def g(self, r, order=0):
        return _weval(self.warp_g, r, order)

    def check_point(self, p: "WPoint"):
        if not (self.r_min - 1e-12 <= p.r <= self.r_max + 1e-12):
            raise OutOfDomainError(f"r={p.r} outside {self.interval}")
        if len(p.e) != self.euclid_dim:
            raise OutOfDomainError(f"e has length {len(p.e)}, expected {self.euclid_dim}")
        if len(p.theta) != self.torus_dim:
            raise OutOfDomainError(f"theta has length {len(p.theta)}, expected {self.torus_dim}")

    def points_equal(self, p: "WPoint", q: "WPoint", tol=1e-12) -> bool:
        if abs(p.r - q.r) > tol or np.max(np.abs(p.e - q.e), initial=0.0) > tol:
            return False
        if self.torus is None:
            return True
        # theta is ignored where the fiber collapses
        if self.singular_at_zero and abs(p.r - self.r_min) <= tol:
            return True
        from .model_spaces import torus_distance

        return torus_distance(self.torus, p.theta, q.theta) <= tol


def _as_vec(x, n):
    v = np.zeros(n) if x is None else np.atleast_1d(np.asarray(x, dtype=float))
    if v.shape != (n,):
        raise ValidationError(f"expected vector of length {n}, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class WPoint:
    r: float
    e: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "e", np.atleast_1d(np.asarray(self.e, dtype=float)))
        object.__setattr__(self, "theta", np.atleast_1d(np.asarray(self.theta, dtype=float)))

    @staticmethod
    def make(r, e=None, theta=None, k=0, tdim=0):
        return WPoint(r, _as_vec(e, k), _as_vec(theta, tdim))

    def to_json_dict(self):
        return {"r": self.r, "e": self.e.tolist(), "theta": self.theta.tolist()}


@dataclass(frozen=True)
class PolylinePath:
    vertices: tuple
    deck_shifts: tuple  # per-segment integer coefficient vectors

    def __post_init__(self):
        vs = tuple(self.vertices)
        if len(vs) < 2:
            raise ValidationError("path needs at least two vertices")
        shifts = tuple(np.asarray(s, dtype=int) for s in self.deck_shifts)
        if len(shifts) != len(vs) - 1:
            raise ValidationError("need one deck shift per segment")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "deck_shifts", shifts)

    def to_json_dict(self):
        return {
            "vertices": [v.to_json_dict() for v in self.vertices],
            "deck_shifts": [s.tolist() for s in self.deck_shifts],
        }


@dataclass(frozen=True)
class GeodesicResult:
    distance: float
    path: PolylinePath
    converged: bool
    iterations: int
    residual: float

    def to_json_dict(self):
        return {
            "distance": self.distance,
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
            "path": self.path.to_json_dict(),
        }

    def dumps(self):
        return json.dumps(self.to_json_dict(), indent=2)


# ---------------------------------------------------------------------------
# path length
# ---------------------------------------------------------------------------

def _segment_length(space: WarpedSpace, a: WPoint, b: WPoint, shift) -> float:
    dr = b.r - a.r
    de2 = float(np.dot(b.e - a.e, b.e - a.e))
    if space.torus is not None:
        dtheta = (b.theta + space.torus.shift_vector(shift)) - a.theta
        dth2 = float(np.dot(dtheta, dtheta))
    else:
        dth2 = 0.0
    if de2 == 0.0 and dth2 == 0.0:
        return abs(dr)

    def integrand(t):
        r = a.r + t * dr
        val = dr * dr + de2 * space.g(r) ** 2
        if dth2:
            val = val + dth2 * space.f(r) ** 2
        return np.sqrt(val)

    if dr == 0.0:
        # constant-r segment: integrand is constant in t
        return float(integrand(np.asarray([0.5]))[0])
    return adaptive_gauss(integrand, 0.0, 1.0, rel_tol=1e-10)


def path_length(space: WarpedSpace, path: PolylinePath) -> float:
    for v in path.vertices:
        space.check_point(v)
    total = 0.0
    for a, b, s in zip(path.vertices, path.vertices[1:], path.deck_shifts):
        total += _segment_length(space, a, b, s)
    return total


def path_point_at_arclength(space: WarpedSpace, path: PolylinePath, s: float) -> WPoint:
    """Point at arclength s from the start, by linear chart interpolation
    within the segment that contains s."""
    lengths = [
        _segment_length(space, a, b, sh)
        for a, b, sh in zip(path.vertices, path.vertices[1:], path.deck_shifts)
    ]
    total = sum(lengths)
    if not (-1e-12 <= s <= total + 1e-9):
        raise OutOfRangeError(f"arclength {s} outside [0, {total}]")
    s = min(max(s, 0.0), total)
    acc = 0.0
    for (a, b, sh), li in zip(
        zip(path.vertices, path.vertices[1:], path.deck_shifts), lengths
    ):
        if s <= acc + li:
            t = 0.0 if li == 0 else (s - acc) / li
            theta_b = b.theta
            if space.torus is not None:
                theta_b = b.theta + space.torus.shift_vector(sh)
            return WPoint(
                a.r + t * (b.r - a.r),
                a.e + t * (b.e - a.e),
                a.theta + t * (theta_b - a.theta),
            )
        acc += li
    return path.vertices[-1]


# ---------------------------------------------------------------------------
# discrete energy and its gradient
# ---------------------------------------------------------------------------

class _Discretization:
    """Flattened view of interior vertices for the optimizer.

    Layout per interior vertex: [r, e (k), theta (tdim)] in cover
    coordinates (theta unconstrained; the deck shift is already folded into
    the endpoint).
    """

    def __init__(self, space, p_cover, q_cover, n, clamps=None):
        self.space = space
        self.k = space.euclid_dim
        self.tdim = space.torus_dim
        self.stride = 1 + self.k + self.tdim
        self.n = n
        self.p = p_cover  # (r, e, theta) arrays
        self.q = q_cover
        # clamps: dict vertex_index -> dict of ("r"|"theta") -> value/vector
        self.clamps = clamps or {}

    def initial(self, rng):
        n, st = self.n, self.stride
        x = np.empty((n - 1, st))
        ts = np.arange(1, n)[:, None] / n
        full_p = np.concatenate(([self.p[0]], self.p[1], self.p[2]))
        full_q = np.concatenate(([self.q[0]], self.q[1], self.q[2]))
        x[:] = full_p + ts * (full_q - full_p)
        x += 1e-9 * rng.standard_normal(x.shape)
        self._apply_clamps(x)
        return x.ravel()

    def _apply_clamps(self, x):
        for idx, spec in self.clamps.items():
            if "r" in spec:
                x[idx - 1, 0] = spec["r"]
            if "theta" in spec:
                x[idx - 1, 1 + self.k:] = spec["theta"]

    def bounds(self):
        n, st = self.n, self.stride
        lo = np.full((n - 1, st), -np.inf)
        hi = np.full((n - 1, st), np.inf)
        lo[:, 0] = self.space.r_min
        hi[:, 0] = self.space.r_max
        for idx, spec in self.clamps.items():
            if "r" in spec:
                lo[idx - 1, 0] = hi[idx - 1, 0] = spec["r"]
            if "theta" in spec:
                lo[idx - 1, 1 + self.k:] = hi[idx - 1, 1 + self.k:] = spec["theta"]
        return list(zip(lo.ravel(), hi.ravel()))

    def full_chain(self, xflat):
        n, st = self.n, self.stride
        chain = np.empty((n + 1, st))
        chain[0] = np.concatenate(([self.p[0]], self.p[1], self.p[2]))
        chain[-1] = np.concatenate(([self.q[0]], self.q[1], self.q[2]))
        chain[1:-1] = xflat.reshape(n - 1, st)
        return chain

    def energy_grad(self, xflat):
        sp, k = self.space, self.k
        chain = self.full_chain(xflat)
        r = chain[:, 0]
        e = chain[:, 1:1 + k]
        th = chain[:, 1 + k:]
        dr = np.diff(r)
        de = np.diff(e, axis=0)
        dth = np.diff(th, axis=0)
        de2 = np.einsum("ij,ij->i", de, de)
        dth2 = np.einsum("ij,ij->i", dth, dth)
        m = 0.5 * (r[:-1] + r[1:])
        g = np.asarray(sp.g(m), dtype=float)
        g1 = np.asarray(sp.g(m, 1), dtype=float)
        if self.tdim:
            f = np.asarray(sp.f(m), dtype=float)
            f1 = np.asarray(sp.f(m, 1), dtype=float)
        else:
            f = f1 = np.zeros_like(m)
        cost = dr * dr + g * g * de2 + f * f * dth2
        energy = float(cost.sum())

        grad = np.zeros_like(chain)
        # r-derivative: endpoint difference terms
        grad[:-1, 0] += -2.0 * dr
        grad[1:, 0] += 2.0 * dr
        # r-derivative: midpoint warp terms (d m / d r_i = 1/2 on both ends)
        mid = g * g1 * de2 + f * f1 * dth2
        grad[:-1, 0] += mid
        grad[1:, 0] += mid
        # e and theta derivatives
        ge = (g * g)[:, None] * de
        grad[:-1, 1:1 + k] += -2.0 * ge
        grad[1:, 1:1 + k] += 2.0 * ge
        if self.tdim:
            ft = (f * f)[:, None] * dth
            grad[:-1, 1 + k:] += -2.0 * ft
            grad[1:, 1 + k:] += 2.0 * ft
        return energy, grad[1:-1].ravel()

    def chain_length(self, xflat):
        chain = self.full_chain(xflat)
        r = chain[:, 0]
        k = self.k
        de2 = np.einsum("ij,ij->i", np.diff(chain[:, 1:1 + k], axis=0), np.diff(chain[:, 1:1 + k], axis=0))
        dth2 = np.einsum("ij,ij->i", np.diff(chain[:, 1 + k:], axis=0), np.diff(chain[:, 1 + k:], axis=0))
        m = 0.5 * (r[:-1] + r[1:])
        g = np.asarray(self.space.g(m), dtype=float)
        f = np.asarray(self.space.f(m), dtype=float) if self.tdim else np.zeros_like(m)
        return float(np.sqrt(np.diff(r) ** 2 + g * g * de2 + f * f * dth2).sum())


def _optimize_chain(disc: _Discretization, rng, maxiter=2000, x0=None, polish=False):
    if x0 is None:
        x0 = disc.initial(rng)
    bounds = disc.bounds()
    res = minimize(
        disc.energy_grad,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        options={"maxiter": maxiter, "ftol": 1e-15, "gtol": 1e-9},
    )
    if polish:
        res = minimize(
            disc.energy_grad,
            res.x,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": 500, "ftol": 1e-18, "gtol": 1e-10},
        )
    _, grad = disc.energy_grad(res.x)
    # project out components blocked by active bounds (KKT residual)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    at_lo = res.x <= lo + 1e-12
    at_hi = res.x >= hi - 1e-12
    grad = np.where(at_lo, np.minimum(grad, 0.0), grad)
    grad = np.where(at_hi, np.maximum(grad, 0.0), grad)
    return res.x, float(np.max(np.abs(grad))), int(res.nit)


def _refine(xflat, disc: _Discretization):
    """Insert chart midpoints, doubling the segment count."""
    chain = disc.full_chain(xflat)
    mids = 0.5 * (chain[:-1] + chain[1:])
    new = np.empty((2 * disc.n + 1, disc.stride))
    new[0::2] = chain
    new[1::2] = mids
    clamps = {2 * i: spec for i, spec in disc.clamps.items()}
    d2 = _Discretization(disc.space, disc.p, disc.q, 2 * disc.n, clamps)
    return new[1:-1].ravel(), d2


def _cover_coords(p: WPoint):
    return (p.r, p.e.copy(), p.theta.copy())


def _chain_to_path(space: WarpedSpace, chain: np.ndarray, k: int) -> PolylinePath:
    """Convert a cover-coordinate chain to a PolylinePath with reduced theta
    and per-segment deck shifts."""
    tdim = space.torus_dim
    verts = []
    shifts = []
    if tdim == 0:
        for row in chain:
            verts.append(WPoint(row[0], row[1:1 + k], np.zeros(0)))
        shifts = [np.zeros(0, dtype=int)] * (len(verts) - 1)
        return PolylinePath(tuple(verts), tuple(shifts))
    basis_t = space.torus.basis.T
    reduced = []
    coeffs = []
    for row in chain:
        c = np.linalg.solve(basis_t, row[1 + k:])
        cf = np.floor(c)
        coeffs.append(cf)
        reduced.append((c - cf) @ space.torus.basis)
        verts.append(WPoint(row[0], row[1:1 + k], reduced[-1]))
    for i in range(len(verts) - 1):
        # reduced theta_{i+1} + shift@basis must equal the cover difference
        shifts.append(np.rint(coeffs[i + 1] - coeffs[i]).astype(int))
    return PolylinePath(tuple(verts), tuple(shifts))


def solve_geodesic(
    space: WarpedSpace,
    p: WPoint,
    q: WPoint,
    n_segments: int = 64,
    seed: int = 0,
    refine_tol: float = REFINE_TOL,
    shift_radius: int = 1,
) -> GeodesicResult:
    """Shortest path between p and q by discrete energy minimization.

    Inner loop: L-BFGS-B over interior vertex coordinates of a polyline in
    cover coordinates (r box-constrained to the interval).  Outer loop: deck
    shifts in a coefficient box of radius ``shift_radius`` around the rounded
    chart difference, plus (in singular spaces) candidates passing through
    the core with a free torus jump there.  The winner is refined by segment
    doubling until the distance stabilizes below ``refine_tol``.
    """
    space.check_point(p)
    space.check_point(q)
    if n_segments < 8:
        raise ValidationError("n_segments must be >= 8")
    rng = np.random.default_rng(seed)
    k, tdim = space.euclid_dim, space.torus_dim

    if space.points_equal(p, q):
        path = PolylinePath((p, q), (np.zeros(tdim, dtype=int),))
        return GeodesicResult(0.0, path, True, 0, 0.0)

    candidates = []  # (disc, xflat)
    pc = _cover_coords(p)
    if tdim:
        base = np.rint(np.linalg.solve(space.torus.basis.T, p.theta - q.theta)).astype(int)
        import itertools as _it

        offsets = _it.product(range(-shift_radius, shift_radius + 1), repeat=tdim)
        shift_list = [base + np.asarray(o, dtype=int) for o in offsets]
    else:
        shift_list = [np.zeros(0, dtype=int)]

    for shift in shift_list:
        qt = q.theta + (space.torus.shift_vector(shift) if tdim else 0.0)
        qc = (q.r, q.e.copy(), np.atleast_1d(qt) if tdim else q.theta.copy())
        candidates.append(_Discretization(space, pc, qc, n_segments))

    if space.singular_at_zero and tdim:
        # through-core candidate: clamp the two middle vertices to the core
        # and freeze theta leg-wise; the jump at the core is free (f=0).
        i1 = n_segments // 2
        i2 = i1 + 1
        clamps = {i1: {"r": space.r_min, "theta": p.theta.copy()},
                  i2: {"r": space.r_min, "theta": q.theta.copy()}}
        for i in range(1, i1):
            clamps[i] = {"theta": p.theta.copy()}
        for i in range(i2 + 1, n_segments):
            clamps[i] = {"theta": q.theta.copy()}
        qc = (q.r, q.e.copy(), q.theta.copy())
        candidates.append(_Discretization(space, pc, qc, n_segments, clamps))

    best = None  # (length, disc, xflat, gnorm, iters)
    total_iters = 0
    for disc in candidates:
        x, gnorm, nit = _optimize_chain(disc, rng)
        total_iters += nit
        length = disc.chain_length(x)
        if best is None or length < best[0]:
            best = (length, disc, x, gnorm, nit)

    length, disc, x, gnorm, _ = best
    # refine the winner until the distance stabilizes
    while 2 * disc.n <= MAX_SEGMENTS:
        x0, disc2 = _refine(x, disc)
        x2, gnorm2, nit = _optimize_chain(disc2, rng, x0=x0)
        total_iters += nit
        length2 = disc2.chain_length(x2)
        done = abs(length2 - length) < refine_tol
        disc, x, gnorm, length = disc2, x2, gnorm2, length2
        if done:
            break
    if gnorm > GRAD_TOL:
        x, gnorm, nit = _optimize_chain(disc, rng, x0=x, polish=True)
        total_iters += nit

    path = _chain_to_path(space, disc.full_chain(x), k)
    dist = path_length(space, path)
    # the discrete energy resolves gradients only to ~1e-7 in double
    # precision once the chain is fine; distance accuracy is unaffected
    converged = gnorm < max(GRAD_TOL, 1e-7 * max(1.0, dist))
    if gnorm > 1e-6:
        warnings.warn(f"geodesic solver residual {gnorm:.2e} above tolerance", stacklevel=2)
    return GeodesicResult(dist, path, converged, total_iters, gnorm)


# ---------------------------------------------------------------------------
# derived quantities
# ---------------------------------------------------------------------------

def distance_to_core(space: WarpedSpace, p: WPoint) -> float:
    """Radial distance to {r = r_min}; the radial path is shortest when the
    warp functions are nondecreasing (Lemma-style monotonicity)."""
    space.check_point(p)
    return p.r - space.r_min


def direction_at_singular(space: WarpedSpace, a0, target: WPoint):
    """Direction at the singular point (0, a0, -) toward target = (t1, a1, th1).

    Returns (phi, alpha, theta): tan(phi) = tanh(t1) / sinh(|a1 - a0|), with
    alpha the unit vector from a0 to a1 in E^k (None when a1 = a0).
    """
    if not space.singular_at_zero:
        raise SingularPointError("space has no singular core")
    a0 = _as_vec(a0, space.euclid_dim)
    space.check_point(target)
    t1 = target.r - space.r_min
    da = target.e - a0
    na = float(np.linalg.norm(da))
    if na <= 1e-15:
        return (np.pi / 2.0, None, target.theta.copy())
    phi = float(np.arctan2(np.tanh(t1), np.sinh(na)))
    return (phi, da / na, target.theta.copy())


def alexandrov_angle(
    space: WarpedSpace,
    p: WPoint,
    q1: WPoint,
    q2: WPoint,
    scales=(0.2, 0.1, 0.05, 0.025),
    n_segments: int = 64,
    seed: int = 0,
    refine_tol: float = 1e-6,
    shift_radius: int = 1,
):
    """Upper angle at p between [p,q1] and [p,q2], by Euclidean comparison
    angles at shrinking scales plus one-step Richardson extrapolation.

    The convergence order of the comparison angles is not known a priori;
    the extrapolation assumes first order in the scale and the raw sequence
    is returned alongside so callers can judge the error themselves.
    """
    if space.points_equal(p, q1) or space.points_equal(p, q2):
        raise ValidationError("q1, q2 must differ from p")
    g1 = solve_geodesic(space, p, q1, n_segments, seed, refine_tol=refine_tol, shift_radius=shift_radius)
    g2 = solve_geodesic(space, p, q2, n_segments, seed, refine_tol=refine_tol, shift_radius=shift_radius)
    if max(g1.residual, g2.residual) > 1e-6:
        raise SolverFailureError("leg geodesics did not converge")
    tmax = min(g1.distance, g2.distance)
    angles = []
    used = []
    for t in scales:
        if t > tmax:
            continue
        x1 = path_point_at_arclength(space, g1.path, t)
        x2 = path_point_at_arclength(space, g2.path, t)
        d = solve_geodesic(
            space, x1, x2, n_segments, seed, refine_tol=refine_tol, shift_radius=shift_radius
        ).distance
        cosang = (2.0 * t * t - d * d) / (2.0 * t * t)
        angles.append(float(np.arccos(np.clip(cosang, -1.0, 1.0))))
        used.append(t)
    if len(angles) < 2:
        raise ValidationError("scales too large for these geodesics")
    increasing = any(b > a + 1e-6 for a, b in zip(angles, angles[1:]))
    if increasing:
        warnings.warn("comparison angles not monotone nonincreasing", stacklevel=2)
    # Richardson assuming error ~ C * t on the last halving
    t_a, t_b = used[-2], used[-1]
    ratio = t_a / t_b
    extrap = (ratio * angles[-1] - angles[-2]) / (ratio - 1.0)
    return float(np.clip(extrap, 0.0, np.pi))


def log_map(space: WarpedSpace, p: WPoint, x: WPoint, n_segments: int = 64, seed: int = 0,
            refine_tol: float = REFINE_TOL, shift_radius: int = 1):
    """(radius, direction) of x seen from p.

    At a singular p the direction is the join coordinate (phi, alpha, theta)
    of Lemma-style direction space; at a Riemannian p it is the initial unit
    chart tangent of the solver polyline.
    """
    res = solve_geodesic(space, p, x, n_segments, seed, refine_tol=refine_tol,
                         shift_radius=shift_radius)
    if res.distance <= 1e-14:
        return (0.0, None)
    if space.singular_at_zero and abs(p.r - space.r_min) <= 1e-12:
        return (res.distance, direction_at_singular(space, p.e, x))
    v0, v1 = res.path.vertices[0], res.path.vertices[1]
    th1 = v1.theta
    if space.torus is not None:
        th1 = v1.theta + space.torus.shift_vector(res.path.deck_shifts[0])
    tangent = np.concatenate(([v1.r - v0.r], v1.e - v0.e, th1 - v0.theta))
    g0 = float(space.g(p.r))
    f0 = float(space.f(p.r)) if space.torus is not None else 1.0
    k = space.euclid_dim
    norm2 = tangent[0] ** 2 + g0 ** 2 * np.dot(tangent[1:1 + k], tangent[1:1 + k])
    if space.torus is not None:
        norm2 += f0 ** 2 * np.dot(tangent[1 + k:], tangent[1 + k:])
    return (res.distance, tangent / np.sqrt(norm2))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _warp_to_json(w):
    if isinstance(w, SmoothWarpFunction):
        return w.to_json_dict()
    name = getattr(w, "name", None)
    if name in ANALYTIC_REGISTRY:
        params = {}
        for attr in ("shift", "value", "c"):
            if hasattr(w, attr):
                params[attr] = getattr(w, attr)
        doc = {"analytic": name}
        if params:
            doc["params"] = params
        return doc
    raise ValidationError(f"cannot serialize warp handle {w!r}")


def _warp_from_json(doc):
    if "analytic" in doc:
        cls = ANALYTIC_REGISTRY[doc["analytic"]]
        return cls(**doc.get("params", {}))
    return SmoothWarpFunction.from_json_dict(doc)


def space_to_json_dict(space: WarpedSpace) -> dict:
    return {
        "interval": list(space.interval),
        "euclid_dim": space.euclid_dim,
        "warp_g": _warp_to_json(space.warp_g),
        "torus": space.torus.to_json_dict() if space.torus else None,
        "warp_f": _warp_to_json(space.warp_f) if space.warp_f is not None else None,
    }


def space_from_json_dict(doc: dict) -> WarpedSpace:
    torus = LatticeTorus.from_json_dict(doc["torus"]) if doc.get("torus") else None
    warp_f = _warp_from_json(doc["warp_f"]) if doc.get("warp_f") else None
    return WarpedSpace(
        interval=tuple(doc["interval"]),
        euclid_dim=int(doc["euclid_dim"]),
        warp_g=_warp_from_json(doc["warp_g"]),
        torus=torus,
        warp_f=warp_f,
    )
