"""Dense f64 tensors with reverse-mode automatic differentiation.

Define-by-run: every op records its parents and a gradient closure on the
produced tensor; ``backward(loss)`` traces a topologically ordered Tape
from the scalar loss and walks it in reverse.  Broadcasting is
deliberately restricted: two gradient-carrying tensors combine only when
their shapes are equal or one shape is a trailing suffix of the other
(leading-batch broadcast).  Constants (plain numpy arrays) may use any
numpy broadcast that does not grow the gradient-carrying operand.
"""

from __future__ import annotations

import math

import numpy as np

from ..kernels import (conv1d_backward, conv1d_forward, conv2d_backward,
                       conv2d_forward)


class DimensionError(ValueError):
    """Raised when operand shapes are incompatible."""


class UsageError(RuntimeError):
    """Raised when the autodiff API is misused (e.g. non-scalar loss)."""


_GELU_C = math.sqrt(2.0 / math.pi)
_GELU_A = 0.044715


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_grad_fn")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple = ()
        self._grad_fn = None

    # -- construction ------------------------------------------------------

    @staticmethod
    def _from_op(data: np.ndarray, parents: tuple, grad_fn) -> "Tensor":
        out = Tensor.__new__(Tensor)
        out.data = data
        out.grad = None
        if any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._grad_fn = grad_fn
        else:
            out.requires_grad = False
            out._parents = ()
            out._grad_fn = None
        return out

    # -- basic introspection ----------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- operator sugar ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Tensor):
            return add(self, other)
        return add_const(self, other)

    def __radd__(self, other):
        return add_const(self, other)

    def __sub__(self, other):
        if isinstance(other, Tensor):
            return sub(self, other)
        return add_const(self, -np.asarray(other, dtype=np.float64))

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return mul_const(self, other)

    def __rmul__(self, other):
        return mul_const(self, other)

    def __neg__(self):
        return mul_const(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 else shape[0])

    def transpose(self, axes):
        return transpose(self, axes)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)

    def backward(self):
        backward(self)


class Tape:
    """Topologically ordered record of every op reaching a root tensor.

    Every parent precedes its consumer; backward walks the list reversed.
    """

    def __init__(self, nodes: list[Tensor]):
        self.nodes = nodes

    @classmethod
    def trace(cls, root: Tensor) -> "Tape":
        nodes: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                nodes.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        return cls(nodes)

    def __len__(self) -> int:
        return len(self.nodes)


def backward(loss: Tensor) -> None:
    """Accumulate dLoss/dp into every reachable parameter's ``.grad``."""
    if loss.size != 1:
        raise UsageError(f"backward requires a scalar loss, got shape {loss.shape}")
    tape = Tape.trace(loss)
    loss.grad = np.ones_like(loss.data)
    for node in reversed(tape.nodes):
        if node._grad_fn is None or node.grad is None:
            continue
        grads = node._grad_fn(node.grad)
        for parent, g in zip(node._parents, grads):
            if parent.requires_grad and g is not None:
                parent.grad = g if parent.grad is None else parent.grad + g


# ---------------------------------------------------------------------------
# shape rules


def _suffix_mode(a_shape: tuple, b_shape: tuple, opname: str) -> int:
    """0: equal shapes, 1: b is a trailing suffix of a, 2: a of b."""
    if a_shape == b_shape:
        return 0
    if len(b_shape) < len(a_shape) and a_shape[len(a_shape) - len(b_shape):] == b_shape:
        return 1
    if len(a_shape) < len(b_shape) and b_shape[len(b_shape) - len(a_shape):] == a_shape:
        return 2
    raise DimensionError(f"{opname}: incompatible shapes {a_shape} and {b_shape}")


def _reduce_to(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum the leading broadcast axes away so g matches the suffix shape."""
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    return g


# ---------------------------------------------------------------------------
# elementwise ops


def add(a: Tensor, b: Tensor) -> Tensor:
    mode = _suffix_mode(a.shape, b.shape, "add")
    out = a.data + b.data

    def grad_fn(gy):
        ga = gy if mode != 2 else _reduce_to(gy, a.shape)
        gb = gy if mode != 1 else _reduce_to(gy, b.shape)
        return ga, gb

    return Tensor._from_op(out, (a, b), grad_fn)


def sub(a: Tensor, b: Tensor) -> Tensor:
    mode = _suffix_mode(a.shape, b.shape, "sub")
    out = a.data - b.data

    def grad_fn(gy):
        ga = gy if mode != 2 else _reduce_to(gy, a.shape)
        gb = -gy if mode != 1 else -_reduce_to(gy, b.shape)
        return ga, gb

    return Tensor._from_op(out, (a, b), grad_fn)


def mul(a: Tensor, b: Tensor) -> Tensor:
    mode = _suffix_mode(a.shape, b.shape, "mul")
    out = a.data * b.data

    def grad_fn(gy):
        ga = gy * b.data
        gb = gy * a.data
        if mode == 2:
            ga = _reduce_to(ga, a.shape)
        if mode == 1:
            gb = _reduce_to(gb, b.shape)
        return ga, gb

    return Tensor._from_op(out, (a, b), grad_fn)


def add_const(a: Tensor, c) -> Tensor:
    c = np.asarray(c, dtype=np.float64)
    out = a.data + c
    if out.shape != a.shape:
        raise DimensionError(f"add_const: constant {c.shape} grows operand {a.shape}")
    return Tensor._from_op(out, (a,), lambda gy: (gy,))


def mul_const(a: Tensor, c) -> Tensor:
    c = np.asarray(c, dtype=np.float64)
    out = a.data * c
    if out.shape != a.shape:
        raise DimensionError(f"mul_const: constant {c.shape} grows operand {a.shape}")
    return Tensor._from_op(out, (a,), lambda gy: (gy * c,))


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    return Tensor._from_op(y, (a,), lambda gy: (gy * (1.0 - y * y),))


def gelu(a: Tensor) -> Tensor:
    """tanh-approximated GELU."""
    x = a.data
    u = _GELU_C * (x + _GELU_A * x ** 3)
    t = np.tanh(u)
    y = 0.5 * x * (1.0 + t)

    def grad_fn(gy):
        du = _GELU_C * (1.0 + 3.0 * _GELU_A * x ** 2)
        dy = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du
        return (gy * dy,)

    return Tensor._from_op(y, (a,), grad_fn)


def sqrt(a: Tensor) -> Tensor:
    y = np.sqrt(a.data)

    def grad_fn(gy):
        return (gy * 0.5 / y,)

    return Tensor._from_op(y, (a,), grad_fn)


# ---------------------------------------------------------------------------
# shape ops


def reshape(a: Tensor, shape) -> Tensor:
    out = a.data.reshape(shape)
    return Tensor._from_op(out, (a,), lambda gy: (gy.reshape(a.shape),))


def transpose(a: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    inv = tuple(np.argsort(axes))
    out = np.ascontiguousarray(np.transpose(a.data, axes))
    return Tensor._from_op(out, (a,), lambda gy: (np.transpose(gy, inv),))


def concat(tensors: list[Tensor], axis: int) -> Tensor:
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def grad_fn(gy):
        return tuple(np.split(gy, bounds, axis=axis))

    return Tensor._from_op(out, tuple(tensors), grad_fn)


def narrow(a: Tensor, axis: int, start: int, length: int) -> Tensor:
    index = [slice(None)] * a.ndim
    index[axis] = slice(start, start + length)
    index = tuple(index)
    out = np.ascontiguousarray(a.data[index])

    def grad_fn(gy):
        g = np.zeros_like(a.data)
        g[index] = gy
        return (g,)

    return Tensor._from_op(out, (a,), grad_fn)


def gather(a: Tensor, idx, axis: int = 0) -> Tensor:
    """Select rows (axis 0 only) by an integer index array."""
    if axis != 0:
        raise UsageError("gather supports axis=0 only")
    idx = np.asarray(idx, dtype=np.int64)
    out = a.data[idx]

    def grad_fn(gy):
        g = np.zeros_like(a.data)
        np.add.at(g, idx, gy)
        return (g,)

    return Tensor._from_op(out, (a,), grad_fn)


def select_columns(a: Tensor, idx) -> Tensor:
    """out[b] = a[b, idx[b]] for a 2-D tensor."""
    if a.ndim != 2:
        raise DimensionError(f"select_columns expects 2-D input, got {a.shape}")
    idx = np.asarray(idx, dtype=np.int64)
    rows = np.arange(a.shape[0])
    out = a.data[rows, idx]

    def grad_fn(gy):
        g = np.zeros_like(a.data)
        g[rows, idx] = gy
        return (g,)

    return Tensor._from_op(out, (a,), grad_fn)


# ---------------------------------------------------------------------------
# contractions and convolutions


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError(f"matmul needs >=2-D operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul: inner dims differ for {a.shape} and {b.shape}")
    if a.ndim != b.ndim and min(a.ndim, b.ndim) != 2:
        raise DimensionError(f"matmul: leading dims must match for {a.shape} and {b.shape}")
    if a.ndim == b.ndim and a.shape[:-2] != b.shape[:-2]:
        raise DimensionError(f"matmul: leading dims must match for {a.shape} and {b.shape}")
    out = a.data @ b.data

    def grad_fn(gy):
        ga = gy @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ gy
        if ga.ndim > a.ndim:
            ga = ga.sum(axis=tuple(range(ga.ndim - a.ndim)))
        if gb.ndim > b.ndim:
            gb = gb.sum(axis=tuple(range(gb.ndim - b.ndim)))
        return ga, gb

    return Tensor._from_op(out, (a, b), grad_fn)


def conv1d(x: Tensor, w: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """x: (B, C_in, L), w: (C_out, C_in, K) -> (B, C_out, L_out)."""
    if x.ndim != 3 or w.ndim != 3 or x.shape[1] != w.shape[1]:
        raise DimensionError(f"conv1d: incompatible shapes {x.shape} and {w.shape}")
    if x.shape[2] + 2 * padding < w.shape[2]:
        raise DimensionError(f"conv1d: input {x.shape} shorter than kernel {w.shape}")
    xd = np.ascontiguousarray(x.data)
    wd = np.ascontiguousarray(w.data)
    out = conv1d_forward(xd, wd, stride, padding)

    def grad_fn(gy):
        gx, gw = conv1d_backward(xd, wd, np.ascontiguousarray(gy), stride, padding)
        return gx, gw

    return Tensor._from_op(np.asarray(out), (x, w), grad_fn)


def conv2d(x: Tensor, w: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """x: (B, C_in, H, W), w: (C_out, C_in, Kh, Kw) -> (B, C_out, Ho, Wo)."""
    if x.ndim != 4 or w.ndim != 4 or x.shape[1] != w.shape[1]:
        raise DimensionError(f"conv2d: incompatible shapes {x.shape} and {w.shape}")
    xd = np.ascontiguousarray(x.data)
    wd = np.ascontiguousarray(w.data)
    out = conv2d_forward(xd, wd, stride, padding)

    def grad_fn(gy):
        gx, gw = conv2d_backward(xd, wd, np.ascontiguousarray(gy), stride, padding)
        return gx, gw

    return Tensor._from_op(np.asarray(out), (x, w), grad_fn)


def upsample_nearest1d(x: Tensor, factor: int) -> Tensor:
    """(B, C, L) -> (B, C, L*factor) by repetition."""
    out = np.repeat(x.data, factor, axis=-1)

    def grad_fn(gy):
        b, c, lf = gy.shape
        return (gy.reshape(b, c, lf // factor, factor).sum(axis=-1),)

    return Tensor._from_op(out, (x,), grad_fn)


def upsample_nearest2d(x: Tensor, factor: int) -> Tensor:
    """(B, C, H, W) -> (B, C, H*factor, W*factor) by repetition."""
    out = np.repeat(np.repeat(x.data, factor, axis=-2), factor, axis=-1)

    def grad_fn(gy):
        b, c, hf, wf = gy.shape
        g = gy.reshape(b, c, hf // factor, factor, wf // factor, factor)
        return (g.sum(axis=(3, 5)),)

    return Tensor._from_op(out, (x,), grad_fn)


# ---------------------------------------------------------------------------
# normalization and activations over rows


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis; gain/bias shaped (last_dim,)."""
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise DimensionError(
            f"layer_norm: gain {gain.shape} / bias {bias.shape} must be ({d},)")
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = xhat * gain.data + bias.data

    def grad_fn(gy):
        ghat = gy * gain.data
        gx = inv * (ghat - ghat.mean(axis=-1, keepdims=True)
                    - xhat * (ghat * xhat).mean(axis=-1, keepdims=True))
        axes = tuple(range(gy.ndim - 1))
        ggain = (gy * xhat).sum(axis=axes)
        gbias = gy.sum(axis=axes)
        return gx, ggain, gbias

    return Tensor._from_op(out, (x, gain, bias), grad_fn)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)

    def grad_fn(gy):
        dot = (gy * y).sum(axis=axis, keepdims=True)
        return (y * (gy - dot),)

    return Tensor._from_op(y, (x,), grad_fn)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    z = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=axis, keepdims=True))
    out = z - lse

    def grad_fn(gy):
        return (gy - np.exp(out) * gy.sum(axis=axis, keepdims=True),)

    return Tensor._from_op(out, (x,), grad_fn)


# ---------------------------------------------------------------------------
# reductions


def _norm_axis(axis, ndim):
    if axis is None:
        return None
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(ax % ndim for ax in axis)


def tsum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axis = _norm_axis(axis, x.ndim)
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def grad_fn(gy):
        g = gy
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis=axis)
        elif axis is None and not keepdims:
            g = np.asarray(g)
        return (np.broadcast_to(g, x.shape).copy(),)

    return Tensor._from_op(np.asarray(out), (x,), grad_fn)


def tmean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axis = _norm_axis(axis, x.ndim)
    out = x.data.mean(axis=axis, keepdims=keepdims)
    if axis is None:
        count = x.size
    else:
        count = int(np.prod([x.shape[ax] for ax in axis]))

    def grad_fn(gy):
        g = gy
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis=axis)
        return (np.broadcast_to(g, x.shape).copy() / count,)

    return Tensor._from_op(np.asarray(out), (x,), grad_fn)


def mse(pred: Tensor, target: Tensor) -> Tensor:
    """Mean squared error over all elements; scalar output."""
    if pred.shape != target.shape:
        raise DimensionError(f"mse: shapes differ, {pred.shape} vs {target.shape}")
    diff = pred.data - target.data
    out = np.asarray((diff * diff).mean())
    n = pred.size

    def grad_fn(gy):
        g = gy * 2.0 * diff / n
        return g, -g

    return Tensor._from_op(out, (pred, target), grad_fn)
