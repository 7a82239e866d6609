"""Reverse-mode automatic differentiation on numpy arrays.

A :class:`Tensor` wraps a float64 ``np.ndarray`` and records the operation
that produced it. Calling :func:`backward` on a scalar loss walks the graph
once in reverse topological order and accumulates ``dloss/dnode`` into the
``grad`` field of every node with ``requires_grad=True``.

Design notes:

* define-by-run: the graph is rebuilt on every forward pass, so Python
  control flow (loops over diffusion steps, per-head slicing, ...) just works.
* deterministic: node ids come from a global counter and the topological
  order is a fixed DFS, so two identical forward passes backprop in exactly
  the same floating-point order.
* nodes whose inputs all have ``requires_grad=False`` skip closure creation
  entirely, which keeps pure-inference subgraphs cheap.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Sequence

import numpy as np

from ..errors import ShapeError

_NODE_COUNTER = itertools.count()

Array = np.ndarray


def _as_array(value) -> Array:
    return np.asarray(value, dtype=np.float64)


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    # Remove leading axes that broadcasting added.
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    # Sum over axes that were size 1 before broadcasting.
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """A node in the autodiff graph."""

    __slots__ = ("data", "grad", "requires_grad", "node_id", "_parents", "_backward")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        _parents: tuple["Tensor", ...] = (),
        _backward: Callable[[Array], None] | None = None,
    ):
        self.data = _as_array(data)
        self.grad: Array | None = None
        self.requires_grad = bool(requires_grad)
        self.node_id = next(_NODE_COUNTER)
        self._parents = _parents
        self._backward = _backward

    # -- introspection -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        tag = "param" if self.requires_grad else "const"
        return f"Tensor(shape={self.shape}, {tag}, id={self.node_id})"

    def detach(self) -> "Tensor":
        """A constant view of this tensor's current value."""
        return Tensor(self.data)

    def accumulate(self, grad: Array) -> None:
        if self.grad is None:
            self.grad = grad.copy()
        else:
            self.grad = self.grad + grad

    # -- graph construction helpers -------------------------------------

    @staticmethod
    def _lift(value) -> "Tensor":
        return value if isinstance(value, Tensor) else Tensor(value)

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other) -> "Tensor":
        return add(self, self._lift(other))

    __radd__ = __add__

    def __sub__(self, other) -> "Tensor":
        return add(self, mul(self._lift(other), Tensor(-1.0)))

    def __rsub__(self, other) -> "Tensor":
        return add(self._lift(other), mul(self, Tensor(-1.0)))

    def __mul__(self, other) -> "Tensor":
        return mul(self, self._lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        other = self._lift(other)
        return mul(self, power(other, -1.0))

    def __rtruediv__(self, other) -> "Tensor":
        return mul(self._lift(other), power(self, -1.0))

    def __neg__(self) -> "Tensor":
        return mul(self, Tensor(-1.0))

    def __matmul__(self, other) -> "Tensor":
        return matmul(self, self._lift(other))

    def __pow__(self, exponent: float) -> "Tensor":
        return power(self, exponent)

    def __getitem__(self, key) -> "Tensor":
        return narrow(self, key)

    # -- reductions / shaping (method sugar) ------------------------------

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return reduce_sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        return reduce_mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, axes: Sequence[int]) -> "Tensor":
        return transpose(self, axes)

    def backward(self) -> None:
        backward(self)


def _make(data: Array, parents: tuple[Tensor, ...], bw: Callable[[Array], None]) -> Tensor:
    """Create a result node; skip the closure if no parent needs grads."""
    if any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, _parents=parents, _backward=bw)
    return Tensor(data)


# -- primitive operations ---------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data + b.data

    def bw(g: Array) -> None:
        if a.requires_grad:
            a.accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(g, b.shape))

    return _make(out_data, (a, b), bw)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data * b.data

    def bw(g: Array) -> None:
        if a.requires_grad:
            a.accumulate(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(g * a.data, b.shape))

    return _make(out_data, (a, b), bw)


def power(a: Tensor, exponent: float) -> Tensor:
    exponent = float(exponent)
    out_data = a.data**exponent

    def bw(g: Array) -> None:
        if a.requires_grad:
            a.accumulate(g * exponent * a.data ** (exponent - 1.0))

    return _make(out_data, (a,), bw)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product with numpy batch broadcasting (operands >= 2-D)."""
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs >=2-D operands, got {a.shape} @ {b.shape}")
    out_data = np.matmul(a.data, b.data)

    def bw(g: Array) -> None:
        if a.requires_grad:
            ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
            a.accumulate(_unbroadcast(ga, a.shape))
        if b.requires_grad:
            gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
            b.accumulate(_unbroadcast(gb, b.shape))

    return _make(out_data, (a, b), bw)


def tanh(a: Tensor) -> Tensor:
    out_data = np.tanh(a.data)

    def bw(g: Array) -> None:
        if a.requires_grad:
            a.accumulate(g * (1.0 - out_data * out_data))

    return _make(out_data, (a,), bw)


def relu(a: Tensor) -> Tensor:
    out_data = np.maximum(a.data, 0.0)

    def bw(g: Array) -> None:
        if a.requires_grad:
            a.accumulate(g * (a.data > 0.0))

    return _make(out_data, (a,), bw)


def exp(a: Tensor) -> Tensor:
    out_data = np.exp(a.data)

    def bw(g: Array) -> None:
        if a.requires_grad:
            a.accumulate(g * out_data)

    return _make(out_data, (a,), bw)


def log(a: Tensor) -> Tensor:
    out_data = np.log(a.data)

    def bw(g: Array) -> None:
        if a.requires_grad:
            a.accumulate(g / a.data)

    return _make(out_data, (a,), bw)


def sqrt(a: Tensor) -> Tensor:
    return power(a, 0.5)


def minimum(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise min; on ties the gradient routes to ``a``."""
    take_a = a.data <= b.data
    out_data = np.where(take_a, a.data, b.data)

    def bw(g: Array) -> None:
        if a.requires_grad:
            a.accumulate(_unbroadcast(g * take_a, a.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(g * (~take_a), b.shape))

    return _make(out_data, (a, b), bw)


def reduce_sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out_data = a.data.sum(axis=axis, keepdims=keepdims)

    def bw(g: Array) -> None:
        if not a.requires_grad:
            return
        if axis is None:
            a.accumulate(np.broadcast_to(g, a.shape).astype(np.float64))
            return
        g_exp = g if keepdims else np.expand_dims(g, axis)
        a.accumulate(np.broadcast_to(g_exp, a.shape).astype(np.float64))

    return _make(out_data, (a,), bw)


def reduce_mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    # forward must be np.mean itself so graph and graph-free paths agree
    # bitwise even when the element count is not a power of two
    out_data = a.data.mean(axis=axis, keepdims=keepdims)
    if axis is None:
        count = a.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([a.shape[ax] for ax in axes]))

    def bw(g: Array) -> None:
        if not a.requires_grad:
            return
        if axis is None:
            a.accumulate(np.broadcast_to(g, a.shape).astype(np.float64) / count)
            return
        g_exp = g if keepdims else np.expand_dims(g, axis)
        a.accumulate(np.broadcast_to(g_exp, a.shape).astype(np.float64) / count)

    return _make(out_data, (a,), bw)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def bw(g: Array) -> None:
        if a.requires_grad:
            inner = (g * out_data).sum(axis=axis, keepdims=True)
            a.accumulate(out_data * (g - inner))

    return _make(out_data, (a,), bw)


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    out_data = a.data.reshape(shape)

    def bw(g: Array) -> None:
        if a.requires_grad:
            a.accumulate(g.reshape(a.shape))

    return _make(out_data, (a,), bw)


def transpose(a: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    out_data = np.transpose(a.data, axes)

    def bw(g: Array) -> None:
        if a.requires_grad:
            a.accumulate(np.transpose(g, inverse))

    return _make(out_data, (a,), bw)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = tuple(tensors)
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bw(g: Array) -> None:
        index: list = [slice(None)] * g.ndim
        for t, start, stop in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                index[axis] = slice(int(start), int(stop))
                t.accumulate(g[tuple(index)])

    return _make(out_data, tensors, bw)


def narrow(a: Tensor, key) -> Tensor:
    """Basic (slice/int) indexing. Use gather/take_rows for index arrays."""
    out_data = a.data[key]

    def bw(g: Array) -> None:
        if a.requires_grad:
            full = np.zeros_like(a.data)
            full[key] = g
            a.accumulate(full)

    return _make(out_data, (a,), bw)


def gather(a: Tensor, index: Array) -> Tensor:
    """Pick one column per row: ``out[i] = a[i, index[i]]`` for 2-D ``a``."""
    if a.ndim != 2:
        raise ShapeError(f"gather expects a 2-D tensor, got shape {a.shape}")
    index = np.asarray(index, dtype=np.int64)
    rows = np.arange(a.shape[0])
    out_data = a.data[rows, index]

    def bw(g: Array) -> None:
        if a.requires_grad:
            full = np.zeros_like(a.data)
            np.add.at(full, (rows, index), g)
            a.accumulate(full)

    return _make(out_data, (a,), bw)


def take_rows(a: Tensor, index: Array) -> Tensor:
    """Row lookup ``out[i] = a[index[i]]`` (embedding-table read)."""
    index = np.asarray(index, dtype=np.int64)
    out_data = a.data[index]

    def bw(g: Array) -> None:
        if a.requires_grad:
            full = np.zeros_like(a.data)
            np.add.at(full, index, g)
            a.accumulate(full)

    return _make(out_data, (a,), bw)


# -- backward pass -----------------------------------------------------------


def topo_order(root: Tensor) -> list[Tensor]:
    """Parents-before-children order via iterative DFS (deterministic)."""
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if node.node_id in seen:
            continue
        seen.add(node.node_id)
        stack.append((node, True))
        for parent in node._parents:
            if parent.node_id not in seen:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Accumulate ``dloss/dnode`` into ``grad`` across the graph.

    ``loss`` must be scalar. Gradients accumulate (+=) into any existing
    ``grad`` arrays; call :func:`zero_grads` on parameters beforehand.
    """
    if loss.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    loss.accumulate(np.ones_like(loss.data))
    for node in reversed(topo_order(loss)):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


def zero_grads(params: Iterable[Tensor]) -> None:
    for p in params:
        p.grad = None


def grads_or_zeros(params: dict[str, Tensor]) -> dict[str, Array]:
    """Gradient arrays by name; parameters the loss never touched get zeros."""
    return {
        name: (p.grad if p.grad is not None else np.zeros_like(p.data))
        for name, p in params.items()
    }
