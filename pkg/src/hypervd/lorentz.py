"""Lorentz (hyperboloid) model calculus.

Points live on the upper sheet {x in R^(n+1) : <x,x>_L = 1/k, x_0 > 0} of the
two-sheeted hyperboloid with constant negative curvature k, embedded in
Minkowski space with signature (-,+,...,+). All functions accept a single
vector or a batch with points along the last axis, operate in float64, and
are pure.

The distance used throughout is arccosh(k <x,y>_L): the intrinsic geodesic
length at k = -1 and a sqrt(-k) multiple of it otherwise. exp_map and log_map
are mutual inverses at k = -1, which is the fixed curvature of the whole
pipeline.
"""

import numpy as np

from . import backend
from .errors import CurvatureError, DimensionError

ZERO_TANGENT_TOL = 1e-12


def check_curvature(k):
    """Validate the curvature constant; returns it as a float."""
    k = float(k)
    if not np.isfinite(k) or k >= 0.0:
        raise CurvatureError(f"lorentz: curvature must be finite and < 0, got {k}")
    return k


def minkowski_inner(x, y):
    """Lorentzian scalar product -x0*y0 + sum_i>=1 xi*yi over the last axis."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[-1] != y.shape[-1]:
        raise DimensionError(
            f"lorentz: ambient lengths differ ({x.shape[-1]} vs {y.shape[-1]})"
        )
    if x.shape[-1] < 2:
        raise DimensionError("lorentz: ambient vectors need length >= 2")
    return np.sum(x[..., 1:] * y[..., 1:], axis=-1) - x[..., 0] * y[..., 0]


def lorentz_norm(z):
    """sqrt(|<z,z>_L|); defined for space-like and time-like vectors alike."""
    z = np.asarray(z, dtype=np.float64)
    return np.sqrt(np.abs(minkowski_inner(z, z)))


def origin(n, k=-1.0):
    """The hyperboloid origin (sqrt(-1/k), 0, ..., 0) in R^(n+1)."""
    k = check_curvature(k)
    if n < 1:
        raise DimensionError(f"lorentz: dimension must be >= 1, got {n}")
    o = np.zeros(n + 1, dtype=np.float64)
    o[0] = np.sqrt(-1.0 / k)
    return o


def manifold_residual(x, k=-1.0):
    """|<x,x>_L - 1/k|, the deviation from the hyperboloid constraint."""
    k = check_curvature(k)
    return np.abs(minkowski_inner(x, x) - 1.0 / k)


def tangent_residual(x, z):
    """|<x,z>_L|, the deviation of z from the tangent space at x."""
    return np.abs(minkowski_inner(x, z))


def exp_map(x, z, k=-1.0):
    """Map tangent vector z at base point x onto the manifold.

    cosh(sqrt(-k)‖z‖_L) x + sinh(sqrt(-k)‖z‖_L) z / (sqrt(-k)‖z‖_L), with the
    removable singularity at ‖z‖_L -> 0 handled by returning x.
    """
    k = check_curvature(k)
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    c = np.sqrt(-k)
    r = lorentz_norm(z)[..., None]
    small = r < ZERO_TANGENT_TOL
    rc = c * np.where(small, 1.0, r)
    factor = np.where(small, 0.0, np.sinh(rc) / rc)
    return np.where(small, x, np.cosh(c * r) * x + factor * z)


def log_map(x, y, k=-1.0):
    """Tangent vector at x pointing to y; inverse of exp_map at k = -1.

    d(x,y) (y - k <x,y>_L x) / ‖y - k <x,y>_L x‖_L, and the zero vector when
    the two points coincide.
    """
    k = check_curvature(k)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d = geodesic_distance(x, y, k)[..., None]
    w = y - (k * minkowski_inner(x, y))[..., None] * x
    wn = lorentz_norm(w)[..., None]
    # coincident points leave only rounding residue in w; the computed d has
    # a sqrt-amplified noise floor, so w is the reliable coincidence signal
    small = (d < ZERO_TANGENT_TOL) | (wn < ZERO_TANGENT_TOL)
    return np.where(small, 0.0, d * w / np.where(small, 1.0, wn))


def geodesic_distance(x, y, k=-1.0):
    """arccosh(k <x,y>_L), clamped at 1 to absorb floating-point dips."""
    k = check_curvature(k)
    u = k * minkowski_inner(x, y)
    return np.arccosh(np.maximum(u, 1.0))


def pairwise_geodesic(points, k=-1.0):
    """T x T matrix of geodesic distances with an exactly-zero diagonal."""
    k = check_curvature(k)
    points = np.asarray(points, dtype=np.float64)
    return backend.pairwise_geodesic_fwd(points, k)


def lift_to_manifold(v, k=-1.0):
    """Lift Euclidean rows v (..., n) to hyperboloid points (..., n+1).

    Forms the tangent vector (0, v) at the origin and applies exp_map; this is
    how fused features enter hyperbolic space.
    """
    k = check_curvature(k)
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 1:
        return backend.lift_fwd(v[None, :], k)[0]
    return backend.lift_fwd(v, k)
