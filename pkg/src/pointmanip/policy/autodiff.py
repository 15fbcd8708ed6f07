"""Minimal array-valued reverse-mode automatic differentiation.

Just enough ops for the point-policy networks: affine layers, relu, max
pooling over the point axis, concatenation, softmax attention, and mean
squared error. Values are numpy arrays; gradients accumulate on leaves
created with `leaf`.
"""

import numpy as np


class Tensor:
    __slots__ = ("value", "grad", "parents", "backward_fn")

    def __init__(self, value, parents=(), backward_fn=None):
        self.value = value
        self.grad = None
        self.parents = parents
        self.backward_fn = backward_fn

    @property
    def shape(self):
        return self.value.shape


def leaf(value) -> Tensor:
    return Tensor(np.asarray(value, dtype=np.float64))


def _accum(t: Tensor, g: np.ndarray):
    t.grad = g if t.grad is None else t.grad + g


def backward(out: Tensor):
    """Reverse-mode accumulation from a scalar output."""
    if out.value.size != 1:
        raise ValueError("backward expects a scalar output")
    topo, seen = [], set()

    def visit(t):
        if id(t) in seen:
            return
        seen.add(id(t))
        for p in t.parents:
            visit(p)
        topo.append(t)

    visit(out)
    out.grad = np.ones_like(out.value)
    for t in reversed(topo):
        if t.backward_fn is not None:
            t.backward_fn(t.grad)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, g @ b.value.T)
        _accum(b, a.value.T @ g)

    return Tensor(a.value @ b.value, (a, b), bwd)


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    """x (..., D) + b (D,) with broadcast."""

    def bwd(g):
        _accum(x, g)
        _accum(b, g.reshape(-1, g.shape[-1]).sum(axis=0))

    return Tensor(x.value + b.value, (x, b), bwd)


def add(a: Tensor, b: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, g)
        _accum(b, g)

    return Tensor(a.value + b.value, (a, b), bwd)


def relu(x: Tensor) -> Tensor:
    mask = x.value > 0

    def bwd(g):
        _accum(x, g * mask)

    return Tensor(x.value * mask, (x,), bwd)


def max_over_axis(x: Tensor, axis: int) -> Tensor:
    """Max pooling; gradient routes to the first maximal element (ties go to
    the lowest index, matching argmax)."""
    idx = np.argmax(x.value, axis=axis)
    out = np.take_along_axis(x.value, np.expand_dims(idx, axis), axis=axis).squeeze(axis)

    def bwd(g):
        full = np.zeros_like(x.value)
        np.put_along_axis(full, np.expand_dims(idx, axis), np.expand_dims(g, axis), axis=axis)
        _accum(x, full)

    return Tensor(out, (x,), bwd)


def concat(tensors: list, axis: int) -> Tensor:
    sizes = [t.value.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bwd(g):
        for t, s0, s1 in zip(tensors, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(s0, s1)
            _accum(t, g[tuple(sl)])

    return Tensor(np.concatenate([t.value for t in tensors], axis=axis), tuple(tensors), bwd)


def reshape(x: Tensor, shape) -> Tensor:
    old = x.value.shape

    def bwd(g):
        _accum(x, g.reshape(old))

    return Tensor(x.value.reshape(shape), (x,), bwd)


def scale(x: Tensor, s: float) -> Tensor:
    def bwd(g):
        _accum(x, g * s)

    return Tensor(x.value * s, (x,), bwd)


def slice_axis1(x: Tensor, start: int, stop: int) -> Tensor:
    def bwd(g):
        full = np.zeros_like(x.value)
        full[:, start:stop] = g
        _accum(x, full)

    return Tensor(x.value[:, start:stop], (x,), bwd)


def grouped_max_concat(x: Tensor, sizes) -> Tensor:
    """Per-group max pooling over axis 1 of (B, sum(sizes), D), concatenated
    to (B, len(sizes)*D). One fused backward allocation for all groups."""
    offsets = np.cumsum([0] + list(sizes))
    vals, idxs = [], []
    for s0, s1 in zip(offsets[:-1], offsets[1:]):
        seg = x.value[:, s0:s1]
        idx = np.argmax(seg, axis=1)
        vals.append(np.take_along_axis(seg, idx[:, None, :], axis=1).squeeze(1))
        idxs.append(idx)
    d = x.value.shape[2]

    def bwd(g):
        full = np.zeros_like(x.value)
        for gi, (s0, s1) in enumerate(zip(offsets[:-1], offsets[1:])):
            np.put_along_axis(
                full[:, s0:s1], idxs[gi][:, None, :], g[:, gi * d : (gi + 1) * d][:, None, :], axis=1
            )
        _accum(x, full)

    return Tensor(np.concatenate(vals, axis=1), (x,), bwd)


def bmm(a: Tensor, b: Tensor) -> Tensor:
    """Batched matmul of (B, N, K) @ (B, K, M)."""

    def bwd(g):
        _accum(a, g @ np.swapaxes(b.value, -1, -2))
        _accum(b, np.swapaxes(a.value, -1, -2) @ g)

    return Tensor(a.value @ b.value, (a, b), bwd)


def bmm3(x: Tensor, w: Tensor) -> Tensor:
    """(B, N, K) @ (K, M) shared weight."""

    def bwd(g):
        _accum(x, g @ w.value.T)
        _accum(w, np.einsum("bnk,bnm->km", x.value, g))

    return Tensor(x.value @ w.value, (x, w), bwd)


def transpose_last(x: Tensor) -> Tensor:
    def bwd(g):
        _accum(x, np.swapaxes(g, -1, -2))

    return Tensor(np.swapaxes(x.value, -1, -2), (x,), bwd)


def mean_over_axis(x: Tensor, axis: int) -> Tensor:
    n = x.value.shape[axis]

    def bwd(g):
        _accum(x, np.repeat(np.expand_dims(g / n, axis), n, axis=axis))

    return Tensor(x.value.mean(axis=axis), (x,), bwd)


def rmsnorm_last(x: Tensor, eps: float = 1e-6) -> Tensor:
    """Parameter-free RMS normalization over the last axis."""
    n = x.value.shape[-1]
    r = np.sqrt((x.value**2).mean(axis=-1, keepdims=True) + eps)
    out = x.value / r

    def bwd(g):
        dot = (g * x.value).sum(axis=-1, keepdims=True)
        _accum(x, g / r - x.value * (dot / (n * r**3)))

    return Tensor(out, (x,), bwd)


def softmax_last(x: Tensor) -> Tensor:
    shifted = x.value - x.value.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    sm = e / e.sum(axis=-1, keepdims=True)

    def bwd(g):
        dot = (g * sm).sum(axis=-1, keepdims=True)
        _accum(x, sm * (g - dot))

    return Tensor(sm, (x,), bwd)


def mse(pred: Tensor, target: np.ndarray) -> Tensor:
    diff = pred.value - target
    n = diff.size

    def bwd(g):
        _accum(pred, (2.0 / n) * diff * g)

    return Tensor(np.array((diff**2).mean()), (pred,), bwd)
