"""Shared numerical utilities: scalar C2 function handles, finite differences
with one Richardson level, smooth cutoff functions, and adaptive
Gauss-Legendre quadrature."""

from __future__ import annotations

import numpy as np

FD_STEP = 1e-6


class ScalarC2:
    """A real function of one real variable with derivatives up to order 2.

    Subclasses implement ``d(r, order)`` vectorized over numpy arrays.
    """

    def d(self, r, order=0):
        raise NotImplementedError

    def __call__(self, r):
        return self.d(r, 0)


class Sinh(ScalarC2):
    name = "sinh"

    def d(self, r, order=0):
        return np.sinh(r) if order % 2 == 0 else np.cosh(r)


class Cosh(ScalarC2):
    name = "cosh"

    def d(self, r, order=0):
        return np.cosh(r) if order % 2 == 0 else np.sinh(r)


class ExpShift(ScalarC2):
    """e^(r - shift)."""

    name = "exp_shift"

    def __init__(self, shift=0.0):
        self.shift = float(shift)

    def d(self, r, order=0):
        return np.exp(np.asarray(r, dtype=float) - self.shift)


class LinearR(ScalarC2):
    """f(r) = r."""

    name = "linear_r"

    def d(self, r, order=0):
        r = np.asarray(r, dtype=float)
        if order == 0:
            return r + 0.0
        if order == 1:
            return np.ones_like(r)
        return np.zeros_like(r)


class Const(ScalarC2):
    name = "const"

    def __init__(self, value=1.0):
        self.value = float(value)

    def d(self, r, order=0):
        r = np.asarray(r, dtype=float)
        if order == 0:
            return np.full_like(r, self.value)
        return np.zeros_like(r)


class ScaledExp(ScalarC2):
    """e^(r / c); rescaled hyperbolic warp used in curvature scale tests."""

    name = "scaled_exp"

    def __init__(self, c=1.0):
        self.c = float(c)

    def d(self, r, order=0):
        return np.exp(np.asarray(r, dtype=float) / self.c) / self.c**order


class CallableC2(ScalarC2):
    """Wrap a plain callable; derivatives by central differences."""

    name = "callable"

    def __init__(self, fn):
        self.fn = fn

    def d(self, r, order=0):
        if order == 0:
            return self.fn(np.asarray(r, dtype=float))
        return fd_derivative(self.fn, r, order)


ANALYTIC_REGISTRY = {
    "sinh": Sinh,
    "cosh": Cosh,
    "exp_shift": ExpShift,
    "linear_r": LinearR,
    "const": Const,
    "scaled_exp": ScaledExp,
}


def as_scalar_c2(obj) -> ScalarC2:
    if isinstance(obj, ScalarC2):
        return obj
    if hasattr(obj, "d"):
        return obj
    if callable(obj):
        return CallableC2(obj)
    raise TypeError(f"cannot interpret {obj!r} as a scalar C2 function")


def fd_derivative(fn, r, order, h=FD_STEP, lo=None, hi=None):
    """Central finite difference with one Richardson extrapolation level.

    ``lo``/``hi`` clip the stencil to a validity interval; within 2h of a
    boundary a one-sided stencil of matching order is used instead.
    """
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)

    if order not in (1, 2):
        raise ValueError(f"order {order} not supported")

    def central(rr, h_):
        if order == 1:
            return (fn(rr + h_) - fn(rr - h_)) / (2.0 * h_)
        return (fn(rr + h_) - 2.0 * fn(rr) + fn(rr - h_)) / h_**2

    def one_sided(rr, h_, sign):
        s = sign * h_
        if order == 1:
            return (-3.0 * fn(rr) + 4.0 * fn(rr + s) - fn(rr + 2 * s)) / (2.0 * s)
        return (2.0 * fn(rr) - 5.0 * fn(rr + s) + 4.0 * fn(rr + 2 * s) - fn(rr + 3 * s)) / h_**2

    def richardson(rule, rr, sign=1.0):
        if rule is central:
            d1, d2 = central(rr, h), central(rr, h / 2)
        else:
            d1, d2 = one_sided(rr, h, sign), one_sided(rr, h / 2, sign)
        return (4.0 * d2 - d1) / 3.0

    if lo is None and hi is None:
        out = richardson(central, r)
        return out[0] if scalar else out

    need = 3.2 * h
    out = np.empty_like(r)
    room_left = np.ones_like(r, dtype=bool) if lo is None else (r - lo) >= need
    room_right = np.ones_like(r, dtype=bool) if hi is None else (hi - r) >= need
    both = room_left & room_right
    if both.any():
        out[both] = np.atleast_1d(richardson(central, r[both]))
    from_right = (~both) & room_right
    if from_right.any():
        out[from_right] = np.atleast_1d(richardson(one_sided, r[from_right], 1.0))
    from_left = (~both) & ~room_right
    if from_left.any():
        out[from_left] = np.atleast_1d(richardson(one_sided, r[from_left], -1.0))
    return out[0] if scalar else out


def smoothstep(x):
    """C-infinity step: 0 for x<=0, 1 for x>=1, flat contact at both ends."""
    x = np.asarray(x, dtype=float)
    a = _bump_exp(x)
    b = _bump_exp(1.0 - x)
    return a / (a + b)


def _bump_exp(x):
    out = np.zeros_like(np.asarray(x, dtype=float))
    pos = x > 0
    with np.errstate(over="ignore", divide="ignore"):
        out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_bump(x, a, b):
    """C-infinity bump supported on (a, b), peak value 1 at the midpoint."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > a) & (x < b)
    u = (x[inside] - a) / (b - a)
    out[inside] = np.exp(4.0 - 1.0 / (u * (1.0 - u)))
    return out


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gl_nodes(order):
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (x, w)
    return _GL_CACHE[order]


def adaptive_gauss(fn, a, b, rel_tol=1e-10, abs_floor=1e-14, order=10, max_depth=30):
    """Adaptive Gauss-Legendre quadrature of a smooth scalar integrand.

    ``fn`` must be vectorized.  Error estimated by comparing one panel with
    its bisection; panels recurse until the local estimate passes.
    """
    x1, w1 = gl_nodes(order)
    x2, w2 = gl_nodes(2 * order)

    def panel(lo, hi, nodes, weights):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return half * float(np.dot(weights, fn(mid + half * nodes)))

    total_scale = max(abs(panel(a, b, x2, w2)), abs_floor)

    def recurse(lo, hi, coarse, depth):
        fine = panel(lo, 0.5 * (lo + hi), x1, w1) + panel(0.5 * (lo + hi), hi, x1, w1)
        if abs(fine - coarse) <= rel_tol * max(total_scale, abs(fine)) or depth >= max_depth:
            return fine
        mid = 0.5 * (lo + hi)
        return recurse(lo, mid, panel(lo, mid, x1, w1), depth + 1) + recurse(
            mid, hi, panel(mid, hi, x1, w1), depth + 1
        )

    return recurse(a, b, panel(a, b, x1, w1), 0)
