"""Pure-numpy implementations of the hot manifold kernels.

Each kernel is a forward/backward pair so the autodiff layer can treat the
whole fused operation as a single node. The compiled twin in ``_kernels.pyx``
must agree with these to double precision; ``tests/test_kernels.py`` holds
both to that.

Conventions: float64 C-contiguous arrays, curvature ``k`` strictly negative,
point matrices are row-per-point with the time coordinate at column 0.
Kernels raise plain ValueError; callers translate into package errors.
"""

import numpy as np

# Below this tangent norm the exponential map is taken at its removable limit.
ZERO_TANGENT_TOL = 1e-12


def lift_fwd(v, k):
    """Exponential map at the origin applied to each row of spatial vectors.

    v: (T, n) Euclidean rows; returns (T, n+1) points on the hyperboloid.
    """
    v = np.ascontiguousarray(v, dtype=np.float64)
    c = np.sqrt(-k)
    r = np.sqrt(np.sum(v * v, axis=1))
    rc = c * r
    small = r < ZERO_TANGENT_TOL
    safe_rc = np.where(small, 1.0, rc)
    factor = np.where(small, 1.0, np.sinh(safe_rc) / safe_rc)
    out = np.empty((v.shape[0], v.shape[1] + 1), dtype=np.float64)
    out[:, 0] = np.cosh(rc) / c
    out[:, 1:] = factor[:, None] * v
    return out


def lift_bwd(v, k, grad_out):
    """Vector-Jacobian product of lift_fwd with respect to v."""
    v = np.ascontiguousarray(v, dtype=np.float64)
    grad_out = np.ascontiguousarray(grad_out, dtype=np.float64)
    c = np.sqrt(-k)
    r = np.sqrt(np.sum(v * v, axis=1))
    rc = c * r
    small = r < ZERO_TANGENT_TOL
    safe_r = np.where(small, 1.0, r)
    safe_rc = c * safe_r
    factor = np.where(small, 1.0, np.sinh(safe_rc) / safe_rc)
    g0 = grad_out[:, 0]
    gs = grad_out[:, 1:]
    # d out0 / dv = sinh(c r) * v / r; d out_s / dv = f*I + v v^T (cosh - f)/r^2
    coef_time = np.where(small, c * g0, g0 * np.sinh(safe_rc) / safe_r)
    dot = np.sum(gs * v, axis=1)
    coef_rad = np.where(small, 0.0, dot * (np.cosh(safe_rc) - factor) / (safe_r * safe_r))
    return factor[:, None] * gs + (coef_time + coef_rad)[:, None] * v


def pairwise_geodesic_fwd(p, k):
    """Matrix of Lorentzian intrinsic distances arccosh(k <p_i, p_j>_L).

    The diagonal is exactly zero and arccosh arguments are clamped at 1.
    """
    p = np.ascontiguousarray(p, dtype=np.float64)
    pm = p.copy()
    pm[:, 0] = -pm[:, 0]
    u = k * (p @ pm.T)
    np.fill_diagonal(u, 1.0)
    d = np.arccosh(np.maximum(u, 1.0))
    np.fill_diagonal(d, 0.0)
    return d


def pairwise_geodesic_bwd(p, k, grad_out):
    """VJP of pairwise_geodesic_fwd; clamped entries get zero gradient."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    grad_out = np.ascontiguousarray(grad_out, dtype=np.float64)
    pm = p.copy()
    pm[:, 0] = -pm[:, 0]
    u = k * (p @ pm.T)
    np.fill_diagonal(u, 1.0)
    live = u > 1.0
    np.fill_diagonal(live, False)
    denom = np.where(live, np.sqrt(np.where(live, u, 2.0) ** 2 - 1.0), 1.0)
    w = np.where(live, (grad_out + grad_out.T) * (k / denom), 0.0)
    return w @ pm


def timelike_normalize_fwd(s, k):
    """Scale each row onto the hyperboloid: s / (sqrt(-k) * |‖s‖_L|).

    Requires every row to be time-like (<s,s>_L < 0) with positive time
    coordinate; otherwise raises ValueError.
    """
    s = np.ascontiguousarray(s, dtype=np.float64)
    q = np.sum(s[:, 1:] * s[:, 1:], axis=1) - s[:, 0] * s[:, 0]
    if np.any(q >= 0.0):
        raise ValueError("aggregate is not time-like")
    if np.any(s[:, 0] <= 0.0):
        raise ValueError("aggregate has non-positive time coordinate")
    c = np.sqrt(-k)
    n = np.sqrt(-q)
    return s / (c * n)[:, None]


def timelike_normalize_bwd(s, k, grad_out):
    """VJP of timelike_normalize_fwd with respect to s."""
    s = np.ascontiguousarray(s, dtype=np.float64)
    grad_out = np.ascontiguousarray(grad_out, dtype=np.float64)
    q = np.sum(s[:, 1:] * s[:, 1:], axis=1) - s[:, 0] * s[:, 0]
    c = np.sqrt(-k)
    n = np.sqrt(-q)
    ms = s.copy()
    ms[:, 0] = -ms[:, 0]
    dot = np.sum(grad_out * s, axis=1)
    return grad_out / (c * n)[:, None] + (dot / (c * n**3))[:, None] * ms


def masked_row_softmax_fwd(logits, mask):
    """Row softmax restricted to mask==1 entries; masked entries are exactly 0.

    Raises ValueError if any row has no surviving entry.
    """
    logits = np.ascontiguousarray(logits, dtype=np.float64)
    mask = np.ascontiguousarray(mask, dtype=np.float64)
    if not np.all(mask.sum(axis=1) > 0):
        raise ValueError("softmax row with no surviving entries")
    shifted = np.where(mask > 0, logits, -np.inf)
    rowmax = shifted.max(axis=1, keepdims=True)
    e = np.exp(np.where(mask > 0, logits - rowmax, 0.0)) * mask
    return e / e.sum(axis=1, keepdims=True)


def masked_row_softmax_bwd(probs, mask, grad_out):
    """VJP of masked_row_softmax_fwd with respect to the logits."""
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    grad_out = np.ascontiguousarray(grad_out, dtype=np.float64)
    dot = np.sum(grad_out * probs, axis=1, keepdims=True)
    return probs * (grad_out - dot)
