"""Minimal reverse-mode automatic differentiation over float64 numpy arrays.

A Tensor wraps an ndarray plus an optional backward closure; ops build a
DAG and ``backward()`` on a scalar walks it in reverse topological order.
The op set is exactly what the model needs: linear maps, embeddings, row
slicing, layer norm, fused multi-head attention, gelu, log-softmax, and a
few scalar reductions.  Attention and layer norm dispatch to the active
kernel backend (numba or numpy).
"""

from __future__ import annotations

import numpy as np

from . import backend

_GRAD_ENABLED = True


class no_grad:
    """Context manager that disables graph construction (fast inference path)."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._backward = None
        self._parents: tuple[Tensor, ...] = ()

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def backward(self):
        """Backpropagate from a scalar; accumulates into ``.grad`` of every
        reachable tensor with ``requires_grad``."""
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar output")
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in visited:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is None or node.grad is None:
                continue
            for parent, g in zip(node._parents, node._backward(node.grad)):
                if g is None or not parent.requires_grad:
                    continue
                parent.grad = g if parent.grad is None else parent.grad + g


def parameter(data) -> Tensor:
    return Tensor(data, requires_grad=True)


def constant(data) -> Tensor:
    return Tensor(data)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(data, parents: tuple[Tensor, ...], backward_fn) -> Tensor:
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward_fn
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data + b.data
    return _node(out, (a, b), lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)))


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data * b.data
    return _node(out, (a, b), lambda g: (_unbroadcast(g * b.data, a.data.shape),
                                         _unbroadcast(g * a.data, b.data.shape)))


def scale(x: Tensor, c: float) -> Tensor:
    return _node(x.data * c, (x,), lambda g: (g * c,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data @ b.data
    return _node(out, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x @ w + b for x (n, d_in), w (d_in, d_out), b (d_out,)."""
    out = x.data @ w.data + b.data
    return _node(out, (x, w, b), lambda g: (g @ w.data.T, x.data.T @ g, g.sum(axis=0)))


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    ids = np.asarray(ids, dtype=np.int64)
    out = table.data[ids]

    def backward(g):
        dt = np.zeros_like(table.data)
        np.add.at(dt, ids, g)
        return (dt,)

    return _node(out, (table,), backward)


def rows(x: Tensor, start: int, stop: int) -> Tensor:
    """Contiguous row slice x[start:stop]."""
    out = x.data[start:stop]

    def backward(g):
        dx = np.zeros_like(x.data)
        dx[start:stop] = g
        return (dx,)

    return _node(out, (x,), backward)


def gelu(x: Tensor) -> Tensor:
    # tanh approximation; smooth everywhere, which keeps finite differences honest
    c = np.sqrt(2.0 / np.pi)
    x2 = x.data * x.data
    t = np.tanh(c * (x.data + 0.044715 * x.data * x2))
    out = 0.5 * x.data * (1.0 + t)

    def backward(g):
        du = c * (1.0 + 3 * 0.044715 * x2)
        return (g * (0.5 * (1.0 + t) + 0.5 * x.data * (1.0 - t * t) * du),)

    return _node(out, (x,), backward)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    kern = backend.kernels()
    y, mean, rstd = kern.layer_norm_forward(x.data, gamma.data, beta.data, eps)

    def backward(g):
        return kern.layer_norm_backward(g, x.data, gamma.data, mean, rstd)

    return _node(y, (x, gamma, beta), backward)


def mha(q: Tensor, k: Tensor, v: Tensor, n_heads: int) -> tuple[Tensor, np.ndarray]:
    """Fused multi-head scaled dot-product attention core.

    Inputs are already projected, shape (rows, n_heads * head_dim); key and
    value row counts must match.  Returns the context tensor and the raw
    attention weights (n_heads, n_q, n_k) for inspection.
    """
    if k.data.shape[0] != v.data.shape[0]:
        raise ValueError("key and value row counts differ")
    if k.data.shape[0] == 0:
        raise ValueError("attention over an empty key set")
    if q.data.shape[1] % n_heads != 0:
        raise ValueError(f"width {q.data.shape[1]} not divisible by n_heads={n_heads}")
    kern = backend.kernels()
    ctx, attn = kern.mha_forward(q.data, k.data, v.data, n_heads)

    def backward(g):
        return kern.mha_backward(np.ascontiguousarray(g), q.data, k.data, v.data, attn, n_heads)

    return _node(ctx, (q, k, v), backward), attn


def log_softmax(x: Tensor) -> Tensor:
    """Log of softmax over the last axis, numerically stable."""
    m = x.data.max(axis=-1, keepdims=True)
    s = x.data - m
    lse = np.log(np.exp(s).sum(axis=-1, keepdims=True))
    out = s - lse
    soft = np.exp(out)

    def backward(g):
        return (g - soft * g.sum(axis=-1, keepdims=True),)

    return _node(out, (x,), backward)


def weighted_sum(x: Tensor, weights: np.ndarray) -> Tensor:
    """Scalar sum(x * weights) for a constant weight array."""
    w = np.asarray(weights, dtype=np.float64)
    out = float((x.data * w).sum())
    return _node(out, (x,), lambda g: (g * w,))


def mean_of(tensors: list[Tensor]) -> Tensor:
    """Mean of scalar tensors (batch reduction with fixed summation order)."""
    total = tensors[0]
    for t in tensors[1:]:
        total = add(total, t)
    return scale(total, 1.0 / len(tensors))
