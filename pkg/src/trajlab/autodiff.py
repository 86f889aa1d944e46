"""Dense float64 tensors with reverse-mode differentiation.

Just enough ops for a small encoder network: 2-d matmul, elementwise
add/multiply, last-axis concat/softmax/layer-norm, relu, reshape, basic
slicing, row padding, transpose, and a mean-squared-error loss.  No
broadcasting except adding a length-w bias row to an (n, w) matrix.
Everything is double precision and deterministic.
"""

from __future__ import annotations

import math
from contextlib import contextmanager

import numpy as np


class ShapeError(ValueError):
    def __init__(self, op: str, *shapes):
        super().__init__(f"{op}: incompatible shapes {' and '.join(str(tuple(s)) for s in shapes)}")
        self.op = op


_grad_enabled = True


@contextmanager
def no_grad():
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "_op")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()
        self._backward = None
        self._op = ""

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, op={self._op or 'leaf'}, requires_grad={self.requires_grad})"

    def __getitem__(self, key):
        return slice_(self, key)

    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return multiply(self, other)

    def backward(self):
        """Populate .grad on every requires_grad ancestor of a scalar root."""
        if self.data.size != 1:
            raise ShapeError("backward", self.data.shape)
        # iterative topological order; training graphs overflow recursion limits
        topo, visited, stack = [], set(), [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)


def _accumulate(t: Tensor, g: np.ndarray):
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _make(data, op: str, parents, backward):
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
        out._op = op
    return out


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ShapeError("matmul", a.data.shape, b.data.shape)

    def backward(g):
        if a.requires_grad:
            _accumulate(a, g @ b.data.T)
        if b.requires_grad:
            _accumulate(b, a.data.T @ g)

    return _make(a.data @ b.data, "matmul", (a, b), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    bias_row = a.data.ndim == 2 and b.data.ndim == 1 and b.data.shape[0] == a.data.shape[1]
    if not bias_row and a.data.shape != b.data.shape:
        raise ShapeError("add", a.data.shape, b.data.shape)

    def backward(g):
        if a.requires_grad:
            _accumulate(a, g)
        if b.requires_grad:
            _accumulate(b, g.sum(axis=0) if bias_row else g)

    return _make(a.data + b.data, "add", (a, b), backward)


def multiply(a: Tensor, b) -> Tensor:
    a = _as_tensor(a)
    if isinstance(b, (int, float)):
        s = float(b)

        def backward_scalar(g):
            if a.requires_grad:
                _accumulate(a, g * s)

        return _make(a.data * s, "multiply", (a,), backward_scalar)

    b = _as_tensor(b)
    if a.data.shape != b.data.shape:
        raise ShapeError("multiply", a.data.shape, b.data.shape)

    def backward(g):
        if a.requires_grad:
            _accumulate(a, g * b.data)
        if b.requires_grad:
            _accumulate(b, g * a.data)

    return _make(a.data * b.data, "multiply", (a, b), backward)


def concat(tensors, axis: int = -1) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise ValueError("concat of nothing")
    nd = tensors[0].data.ndim
    if axis not in (-1, nd - 1):
        raise ShapeError("concat", *(t.data.shape for t in tensors))
    lead = tensors[0].data.shape[:-1]
    if any(t.data.ndim != nd or t.data.shape[:-1] != lead for t in tensors):
        raise ShapeError("concat", *(t.data.shape for t in tensors))
    widths = [t.data.shape[-1] for t in tensors]

    def backward(g):
        offset = 0
        for t, w in zip(tensors, widths):
            if t.requires_grad:
                _accumulate(t, g[..., offset : offset + w])
            offset += w

    return _make(np.concatenate([t.data for t in tensors], axis=-1), "concat", tensors, backward)


def relu(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    mask = x.data > 0

    def backward(g):
        if x.requires_grad:
            _accumulate(x, g * mask)

    return _make(np.where(mask, x.data, 0.0), "relu", (x,), backward)


def softmax(x: Tensor) -> Tensor:
    """Softmax over the last axis, shift-stabilized."""
    x = _as_tensor(x)
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        if x.requires_grad:
            inner = (g * y).sum(axis=-1, keepdims=True)
            _accumulate(x, y * (g - inner))

    return _make(y, "softmax", (x,), backward)


def layer_norm(x: Tensor, gain: Tensor | None = None, bias: Tensor | None = None, eps: float = 1e-5) -> Tensor:
    """Normalize each row of a 2-d tensor to zero mean / unit variance.

    Optional per-column gain and bias (length-w vectors) are applied after
    normalization; their gradients are handled inside this op so no
    broadcasting multiply is needed elsewhere.
    """
    x = _as_tensor(x)
    if x.data.ndim != 2:
        raise ShapeError("layer_norm", x.data.shape)
    w = x.data.shape[1]
    parents = [x]
    if gain is not None:
        gain = _as_tensor(gain)
        if gain.data.shape != (w,):
            raise ShapeError("layer_norm", x.data.shape, gain.data.shape)
        parents.append(gain)
    if bias is not None:
        bias = _as_tensor(bias)
        if bias.data.shape != (w,):
            raise ShapeError("layer_norm", x.data.shape, bias.data.shape)
        parents.append(bias)

    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    y = xhat if gain is None else xhat * gain.data
    if bias is not None:
        y = y + bias.data

    def backward(g):
        if bias is not None and bias.requires_grad:
            _accumulate(bias, g.sum(axis=0))
        if gain is not None and gain.requires_grad:
            _accumulate(gain, (g * xhat).sum(axis=0))
        if x.requires_grad:
            dxhat = g if gain is None else g * gain.data
            term = dxhat - dxhat.mean(axis=-1, keepdims=True) - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
            _accumulate(x, term * inv)

    return _make(y, "layer_norm", parents, backward)


def mean_squared_error(pred: Tensor, target: Tensor) -> Tensor:
    pred, target = _as_tensor(pred), _as_tensor(target)
    if pred.data.shape != target.data.shape:
        raise ShapeError("mean_squared_error", pred.data.shape, target.data.shape)
    diff = pred.data - target.data
    n = diff.size

    def backward(g):
        scale = float(g) * 2.0 / n
        if pred.requires_grad:
            _accumulate(pred, scale * diff)
        if target.requires_grad:
            _accumulate(target, -scale * diff)

    return _make(np.mean(diff * diff), "mean_squared_error", (pred, target), backward)


def reshape(x: Tensor, shape) -> Tensor:
    x = _as_tensor(x)
    if int(np.prod(shape)) != x.data.size:
        raise ShapeError("reshape", x.data.shape, shape)

    def backward(g):
        if x.requires_grad:
            _accumulate(x, g.reshape(x.data.shape))

    return _make(x.data.reshape(shape), "reshape", (x,), backward)


def transpose(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    if x.data.ndim != 2:
        raise ShapeError("transpose", x.data.shape)

    def backward(g):
        if x.requires_grad:
            _accumulate(x, g.T)

    return _make(x.data.T.copy(), "transpose", (x,), backward)


def slice_(x: Tensor, key) -> Tensor:
    """Basic (non-fancy) slicing; gradient scatters back into the source."""
    x = _as_tensor(x)

    def backward(g):
        if x.requires_grad:
            full = np.zeros_like(x.data)
            full[key] += g
            _accumulate(x, full)

    return _make(x.data[key].copy(), "slice", (x,), backward)


def pad_rows(x: Tensor, total_rows: int) -> Tensor:
    """Zero-pad a 2-d tensor to ``total_rows`` rows."""
    x = _as_tensor(x)
    if x.data.ndim != 2 or x.data.shape[0] > total_rows:
        raise ShapeError("pad_rows", x.data.shape, (total_rows,))
    n = x.data.shape[0]
    out = np.zeros((total_rows, x.data.shape[1]), dtype=np.float64)
    out[:n] = x.data

    def backward(g):
        if x.requires_grad:
            _accumulate(x, g[:n])

    return _make(out, "pad_rows", (x,), backward)


def xavier_uniform(shape, rng: np.random.Generator) -> np.ndarray:
    fan_in, fan_out = shape[0], shape[1] if len(shape) > 1 else shape[0]
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def grad_check(f, x: Tensor, eps: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``f`` must be a deterministic scalar-valued function of ``x``.  The
    relative error denominator is max(|analytic|, |numeric|, 1e-8).
    """
    x.requires_grad = True
    x.zero_grad()
    out = f(x)
    if out.data.size != 1:
        raise ShapeError("grad_check", out.data.shape)
    out.backward()
    analytic = np.zeros_like(x.data) if x.grad is None else x.grad.copy()

    numeric = np.zeros_like(x.data)
    for idx in np.ndindex(x.data.shape):
        orig = x.data[idx]
        x.data[idx] = orig + eps
        with no_grad():
            hi = float(f(x).data)
        x.data[idx] = orig - eps
        with no_grad():
            lo = float(f(x).data)
        x.data[idx] = orig
        numeric[idx] = (hi - lo) / (2.0 * eps)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))
