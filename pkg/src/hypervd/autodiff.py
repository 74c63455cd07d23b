"""Minimal reverse-mode automatic differentiation over numpy float64 arrays.

Just enough engine to differentiate the whole pipeline: elementwise
arithmetic with broadcasting, matmul, reductions, indexing, and the fused
hyperbolic kernels from :mod:`hypervd.backend` registered as single graph
nodes with hand-written vector-Jacobian products.

Gradient accumulation follows one fixed topological order, so backward passes
are bit-reproducible.
"""

import numpy as np

from . import backend
from .errors import AggregationError, DimensionError


class Tensor:
    """A float64 array plus the bookkeeping needed for backpropagation."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp")

    # keep numpy from absorbing us in mixed ndarray/Tensor arithmetic
    __array_ufunc__ = None

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._vjp = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self):
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def detach(self):
        return Tensor(self.data.copy())

    def backward(self, seed=None):
        """Accumulate d(self)/d(leaf) into every reachable leaf's .grad."""
        if seed is None:
            if self.data.size != 1:
                raise ValueError("backward() without seed needs a scalar output")
            seed = np.ones_like(self.data)
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in seen:
                continue
            if expanded:
                seen.add(id(node))
                order.append(node)
                continue
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        grads = {id(self): np.asarray(seed, dtype=np.float64)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad:
                node.grad = g.copy() if node.grad is None else node.grad + g
            if node._vjp is None:
                continue
            for parent, pg in zip(node._parents, node._vjp(g)):
                if pg is None:
                    continue
                acc = grads.get(id(parent))
                grads[id(parent)] = pg if acc is None else acc + pg

    # Operator sugar ------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={self.requires_grad})"


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, vjp):
    out = Tensor(data)
    if any(p.requires_grad or p._vjp is not None for p in parents):
        out._parents = tuple(parents)
        out._vjp = vjp
    return out


def _unbroadcast(g, shape):
    """Sum a broadcasted gradient back down to the original shape."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# Elementwise arithmetic --------------------------------------------------


def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    return _make(
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)),
    )


def sub(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    return _make(
        a.data - b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)),
    )


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    return _make(
        a.data * b.data,
        (a, b),
        lambda g: (
            _unbroadcast(g * b.data, a.data.shape),
            _unbroadcast(g * a.data, b.data.shape),
        ),
    )


def div(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    return _make(
        a.data / b.data,
        (a, b),
        lambda g: (
            _unbroadcast(g / b.data, a.data.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape),
        ),
    )


def exp(a):
    a = _as_tensor(a)
    out_data = np.exp(a.data)
    return _make(out_data, (a,), lambda g: (g * out_data,))


def log(a):
    a = _as_tensor(a)
    return _make(np.log(a.data), (a,), lambda g: (g / a.data,))


def sqrt(a):
    a = _as_tensor(a)
    out_data = np.sqrt(a.data)
    return _make(out_data, (a,), lambda g: (g / (2.0 * out_data),))


def sigmoid(a):
    a = _as_tensor(a)
    x = a.data
    out_data = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    return _make(out_data, (a,), lambda g: (g * out_data * (1.0 - out_data),))


def leaky_relu(a, negative_slope=0.01):
    a = _as_tensor(a)
    factor = np.where(a.data > 0.0, 1.0, negative_slope)
    return _make(a.data * factor, (a,), lambda g: (g * factor,))


def clamp_min(a, floor):
    """max(a, floor); gradient passes only where a was not clamped."""
    a = _as_tensor(a)
    keep = a.data > floor
    return _make(np.maximum(a.data, floor), (a,), lambda g: (g * keep,))


# Linear algebra and structure -------------------------------------------


def matmul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim == 1 and b.data.ndim == 1:
        raise DimensionError("autodiff: use sum(mul(...)) for 1-D dot products")

    def vjp(g):
        if b.data.ndim == 1:  # (m,n) @ (n,) -> (m,)
            return np.outer(g, b.data), a.data.T @ g
        if a.data.ndim == 1:  # (n,) @ (n,m) -> (m,)
            return b.data @ g, np.outer(a.data, g)
        return g @ b.data.T, a.data.T @ g

    return _make(a.data @ b.data, (a, b), vjp)


def transpose(a):
    a = _as_tensor(a)
    return _make(a.data.T, (a,), lambda g: (g.T,))


def sum_(a, axis=None, keepdims=False):
    a = _as_tensor(a)

    def vjp(g):
        if axis is None:
            return (np.broadcast_to(g, a.data.shape).copy(),)
        gg = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(gg, a.data.shape).copy(),)

    return _make(a.data.sum(axis=axis, keepdims=keepdims), (a,), vjp)


def mean(a, axis=None, keepdims=False):
    a = _as_tensor(a)
    count = a.data.size if axis is None else a.data.shape[axis]
    return mul(sum_(a, axis=axis, keepdims=keepdims), 1.0 / count)


def concat(tensors, axis=0):
    tensors = [_as_tensor(t) for t in tensors]
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.ascontiguousarray(p) for p in np.split(g, splits, axis=axis))

    return _make(np.concatenate([t.data for t in tensors], axis=axis), tensors, vjp)


def stack1d(tensors):
    """Stack scalar tensors into a 1-D vector."""
    tensors = [_as_tensor(t) for t in tensors]

    def vjp(g):
        return tuple(g[i].reshape(t.data.shape) for i, t in enumerate(tensors))

    return _make(np.array([float(t.data) for t in tensors]), tensors, vjp)


def reshape(a, shape):
    a = _as_tensor(a)
    return _make(a.data.reshape(shape), (a,), lambda g: (g.reshape(a.data.shape),))


def getitem(a, idx):
    a = _as_tensor(a)

    def vjp(g):
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        return (full,)

    return _make(a.data[idx], (a,), vjp)


def take(a, indices):
    """Gather elements along axis 0 with duplicate-safe backward."""
    a = _as_tensor(a)
    indices = np.asarray(indices)

    def vjp(g):
        full = np.zeros_like(a.data)
        np.add.at(full, indices, g)
        return (full,)

    return _make(a.data[indices], (a,), vjp)


def dropout(a, rate, rng):
    """Inverted dropout; identity when rate == 0."""
    a = _as_tensor(a)
    if rate == 0.0:
        return a
    keep = (rng.random(a.data.shape) >= rate) / (1.0 - rate)
    return mul(a, Tensor(keep))


# Fused hyperbolic kernels (backend-backed graph nodes) --------------------


def lorentz_lift(v, k):
    """Rows of Euclidean features onto the hyperboloid: (T,n) -> (T,n+1)."""
    v = _as_tensor(v)
    return _make(
        backend.lift_fwd(v.data, k),
        (v,),
        lambda g: (backend.lift_bwd(v.data, k, g),),
    )


def pairwise_geodesic(p, k):
    """T x T Lorentzian distance matrix as one differentiable node."""
    p = _as_tensor(p)
    return _make(
        backend.pairwise_geodesic_fwd(p.data, k),
        (p,),
        lambda g: (backend.pairwise_geodesic_bwd(p.data, k, g),),
    )


def timelike_normalize(s, k):
    """Rows s -> s / (sqrt(-k) |‖s‖_L|); the Eq-style manifold re-projection."""
    s = _as_tensor(s)
    try:
        out_data = backend.timelike_normalize_fwd(s.data, k)
    except ValueError as e:
        raise AggregationError(f"hyper_nn: {e}") from None
    return _make(
        out_data,
        (s,),
        lambda g: (backend.timelike_normalize_bwd(s.data, k, g),),
    )


def masked_row_softmax(logits, mask):
    """Row softmax over mask==1 entries; masked entries are exactly zero."""
    logits = _as_tensor(logits)
    mask = np.ascontiguousarray(mask, dtype=np.float64)
    if logits.data.shape != mask.shape:
        raise DimensionError("autodiff: logits and mask shapes differ")
    probs = backend.masked_row_softmax_fwd(logits.data, mask)
    return _make(
        probs,
        (logits,),
        lambda g: (backend.masked_row_softmax_bwd(probs, mask, g),),
    )
