"""Fully hyperbolic neural building blocks.

The hyperbolic linear layer maps hyperboloid points to hyperboloid points by
computing a gated, normalized spatial image phi and restoring the time
coordinate as sqrt(‖phi‖^2 - 1/k), so outputs satisfy the manifold constraint
by construction. Neighborhood aggregation renormalizes weighted sums of
points back onto the hyperboloid. The classifier applies a Lorentzian inner
product (index 0 time-like) to the concatenated branch embeddings.
"""

import math

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import DegenerateDirectionError, DimensionError


def glorot_uniform(rng, fan_out, fan_in, shape=None):
    """Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out))."""
    a = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=(fan_out, fan_in) if shape is None else shape)


class Linear:
    """Plain affine map y = x W^T + b (per-snippet when x is T x in).

    bias=False gives the bare matrix product used where a formula writes
    only a weight matrix.
    """

    def __init__(self, rng, in_dim, out_dim, bias=True):
        self.weight = Tensor(glorot_uniform(rng, out_dim, in_dim), requires_grad=True)
        self.bias = Tensor(np.zeros(out_dim), requires_grad=True) if bias else None

    def forward(self, x):
        out = ad.matmul(x, ad.transpose(self.weight))
        return out if self.bias is None else out + self.bias

    def parameters(self, prefix):
        params = {f"{prefix}.weight": self.weight}
        if self.bias is not None:
            params[f"{prefix}.bias"] = self.bias
        return params


class HyperbolicLinear:
    """Hyperboloid-to-hyperboloid linear layer with gate, bias and dropout.

    Shapes: input points (T, in_dim+1), output points (T, out_dim+1).
    The scale is learned in log space so it stays strictly positive.
    """

    def __init__(self, rng, in_dim, out_dim, *, dropout_rate=0.0, negative_slope=0.01):
        ambient = in_dim + 1
        self.weight = Tensor(glorot_uniform(rng, out_dim, ambient), requires_grad=True)
        self.velocity = Tensor(
            glorot_uniform(rng, 1, ambient, shape=(ambient,)), requires_grad=True
        )
        self.bias = Tensor(np.zeros(out_dim), requires_grad=True)
        self.gate_bias = Tensor(np.zeros(()), requires_grad=True)
        self.log_scale = Tensor(np.zeros(()), requires_grad=True)
        self.curvature = -1.0
        self.dropout_rate = float(dropout_rate)
        self.negative_slope = float(negative_slope)

    def forward(self, x, *, training=False, rng=None):
        x = x if isinstance(x, Tensor) else Tensor(x)
        if x.shape[-1] != self.weight.shape[1]:
            raise DimensionError(
                f"hyper_nn: layer expects ambient width {self.weight.shape[1]}, "
                f"got {x.shape[-1]}"
            )
        # dropout and activation touch the spatial part only: the time
        # coordinate is determined by it, and a fully dropped row would make
        # W h(x) + b vanish exactly under the zero-initialized bias
        if training and self.dropout_rate > 0.0:
            x = ad.concat(
                [x[:, :1], ad.dropout(x[:, 1:], self.dropout_rate, rng)], axis=1
            )
        hx = ad.concat([x[:, :1], ad.leaky_relu(x[:, 1:], self.negative_slope)], axis=1)
        u = ad.matmul(hx, ad.transpose(self.weight)) + self.bias
        unorm = ad.sqrt(ad.sum_(u * u, axis=1, keepdims=True))
        if np.any(unorm.data == 0.0):
            raise DegenerateDirectionError(
                "hyper_nn: W h(x) + b vanished; direction undefined"
            )
        gate = ad.exp(self.log_scale) * ad.sigmoid(
            ad.matmul(x, self.velocity) + self.gate_bias
        )
        phi = ad.reshape(gate, (-1, 1)) * u / unorm
        time = ad.sqrt(ad.sum_(phi * phi, axis=1, keepdims=True) - 1.0 / self.curvature)
        return ad.concat([time, phi], axis=1)

    def parameters(self, prefix):
        return {
            f"{prefix}.weight": self.weight,
            f"{prefix}.velocity": self.velocity,
            f"{prefix}.bias": self.bias,
            f"{prefix}.gate_bias": self.gate_bias,
            f"{prefix}.log_scale": self.log_scale,
        }


def aggregate(weights, points, k):
    """Neighborhood aggregation: rows of (weights @ points) scaled onto
    the hyperboloid by sqrt(-k) |‖.‖_L|.

    weights: (T, m) or (m,); points: (m, n+1).
    """
    weights = weights if isinstance(weights, Tensor) else Tensor(weights)
    points = points if isinstance(points, Tensor) else Tensor(points)
    if weights.shape[-1] != points.shape[0]:
        raise DimensionError(
            f"hyper_nn: {weights.shape[-1]} weights for {points.shape[0]} points"
        )
    single = len(weights.shape) == 1
    if single:
        weights = ad.reshape(weights, (1, -1))
    out = ad.timelike_normalize(ad.matmul(weights, points), k)
    return out[0] if single else out


class HyperbolicClassifier:
    """Sigmoid score from the Lorentzian form of the concatenated embedding.

    score = sigmoid(eps + eps * <concat, W>_L + b), with index 0 treated as
    the single time-like coordinate of the concatenated vector.
    """

    def __init__(self, rng, in_dim, eps=2.0):
        self.weight = Tensor(
            glorot_uniform(rng, 1, in_dim, shape=(in_dim,)), requires_grad=True
        )
        self.bias = Tensor(np.zeros(()), requires_grad=True)
        self.eps = float(eps)
        self._sign = np.ones(in_dim)
        self._sign[0] = -1.0

    def forward(self, concat):
        concat = concat if isinstance(concat, Tensor) else Tensor(concat)
        if concat.shape[-1] != self.weight.shape[0]:
            raise DimensionError(
                f"hyper_nn: classifier expects width {self.weight.shape[0]}, "
                f"got {concat.shape[-1]}"
            )
        signed = concat * Tensor(self._sign)
        if len(concat.shape) == 1:
            inner = ad.sum_(signed * self.weight)
        else:
            inner = ad.matmul(signed, self.weight)
        return ad.sigmoid(self.eps + self.eps * inner + self.bias)

    def parameters(self, prefix):
        return {f"{prefix}.weight": self.weight, f"{prefix}.bias": self.bias}


def count_parameters(params):
    """Total number of learnable scalars in a parameter dict."""
    return sum(t.data.size for t in params.values())
