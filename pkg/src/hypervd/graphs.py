"""Snippet-relation graphs: feature-similarity and temporal adjacency.

The similarity graph scores pairs by exp(-d_L(x_i, x_j)), drops weak
relations at a threshold tau, and row-softmaxes the survivors; dropped
entries receive probability exactly zero (a softmax over the raw zeros would
leak weight back to them, defeating the thresholding). The temporal graph is
the raw Toeplitz kernel exp(-|i-j|^gamma), left unnormalized: aggregation
renormalizes onto the manifold anyway.
"""

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigError


def check_tau(tau):
    tau = float(tau)
    if not 0.0 <= tau < 1.0:
        raise ConfigError(f"graphs: tau must be in [0, 1), got {tau}")
    return tau


def check_gamma(gamma):
    gamma = float(gamma)
    if not gamma > 0.0:
        raise ConfigError(f"graphs: gamma must be > 0, got {gamma}")
    return gamma


def hfsg_adjacency_t(points, tau, k=-1.0):
    """Differentiable hyperbolic feature-similarity adjacency (T x T Tensor).

    The survivor mask is treated as a constant: gradients flow through the
    surviving similarities only.
    """
    tau = check_tau(tau)
    points = points if isinstance(points, Tensor) else Tensor(points)
    g = ad.exp(-ad.pairwise_geodesic(points, k))
    mask = (g.data > tau).astype(np.float64)
    return ad.masked_row_softmax(g, mask)


def hfsg_adjacency(points, tau, k=-1.0):
    """Similarity adjacency as a plain array; rows sum to 1."""
    return hfsg_adjacency_t(np.asarray(points, dtype=np.float64), tau, k).data


def htrg_adjacency(t, gamma):
    """Temporal adjacency exp(-|i-j|^gamma): symmetric, unit diagonal."""
    gamma = check_gamma(gamma)
    if t < 1:
        raise ConfigError(f"graphs: need at least one snippet, got T={t}")
    idx = np.arange(t, dtype=np.float64)
    return np.exp(-np.abs(idx[:, None] - idx[None, :]) ** gamma)


def cosine_adjacency(features, tau):
    """Euclidean-baseline similarity: thresholded cosine, row-softmaxed.

    Same masking semantics as the hyperbolic graph, with cosine similarity in
    place of exp(-distance). Zero rows are given unit self-similarity so the
    diagonal always survives.
    """
    tau = check_tau(tau)
    features = features if isinstance(features, Tensor) else Tensor(features)
    norms = ad.sqrt(ad.clamp_min(ad.sum_(features * features, axis=1, keepdims=True), 1e-24))
    unit = features / norms
    sim = ad.matmul(unit, ad.transpose(unit))
    mask = (sim.data > tau).astype(np.float64)
    np.fill_diagonal(mask, 1.0)
    return ad.masked_row_softmax(sim, mask)


def row_normalize(a):
    """Divide each row by its sum; used to make adjacencies row-stochastic."""
    a = np.asarray(a, dtype=np.float64)
    return a / a.sum(axis=1, keepdims=True)
