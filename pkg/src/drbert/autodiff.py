"""Dense-tensor reverse-mode autodiff engine.

Every forward op builds a graph node holding its output, its parents and a
backward closure.  Calling ``backward()`` on a scalar node accumulates
gradients into every reachable node that requires them; gradients add up
across calls until ``zero_grad()``.

All data is float64.  Shapes follow numpy conventions; ``add``/``mul``
broadcast and their backward passes sum the gradient back down to each
operand's shape.
"""

from __future__ import annotations

import numpy as np

# Large finite stand-in for -inf in masking: exp(x - NEG_MASK) underflows to
# exactly 0.0 without ever producing NaN in the graph.
NEG_MASK = 1e9
POOL_MASK = 1e30


class ShapeError(ValueError):
    """Operand shapes do not conform for the named op."""

    def __init__(self, op, *shapes):
        self.op = op
        self.shapes = shapes
        super().__init__(f"{op}: incompatible shapes {' vs '.join(str(s) for s in shapes)}")


class GraphError(RuntimeError):
    """Malformed graph use: non-scalar backward root, NaN gradient, ..."""


class Tensor:
    """A float64 ndarray plus its position in the differentiation graph."""

    __slots__ = ("data", "grad", "requires_grad", "op", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, op="leaf", parents=(), backward=None, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self.op = op
        self.name = name
        self._parents = tuple(parents)
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        tag = self.name or self.op
        return f"Tensor({tag}, shape={self.data.shape})"

    def zero_grad(self):
        self.grad = None

    def item(self):
        return float(self.data)

    def backward(self):
        """Reverse-mode sweep from this scalar node.

        Accumulates into ``.grad`` of every node on a requires_grad path, so
        repeated calls without zeroing sum their contributions.
        """
        if self.data.size != 1:
            raise GraphError(f"backward root must be scalar, got shape {self.data.shape}")
        order = _toposort(self)
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad = self.grad + np.ones_like(self.data)
        # Local seed map: contributions of *this* sweep only, so repeated
        # backward calls accumulate rather than compound.
        seed = {id(self): np.ones_like(self.data)}
        for node in order:
            g = seed.pop(id(node), None)
            if g is None:
                continue
            if node is not self:
                node.grad = g if node.grad is None else node.grad + g
            if node._backward is None:
                continue
            for parent, contrib in node._backward(g):
                if not parent.requires_grad:
                    continue
                if not np.all(np.isfinite(contrib)):
                    raise GraphError(f"non-finite gradient produced by op '{node.op}'")
                if id(parent) in seed:
                    seed[id(parent)] = seed[id(parent)] + contrib
                else:
                    seed[id(parent)] = contrib

    # operator sugar; everything routes through the module-level ops
    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    def __rmul__(self, other):
        return mul(_as_tensor(other), self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __sub__(self, other):
        return add(self, scale(_as_tensor(other), -1.0))

    def __rsub__(self, other):
        return add(_as_tensor(other), scale(self, -1.0))


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _toposort(root):
    """Nodes in reverse-topological order (root first), iteratively."""
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        if node.requires_grad:
            for p in node._parents:
                if id(p) not in visited and p.requires_grad:
                    stack.append((p, False))
    order.reverse()
    return order


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _node(data, op, parents, backward):
    req = any(p.requires_grad for p in parents)
    return Tensor(data, requires_grad=req, op=op, parents=parents, backward=backward if req else None)


# ---------------------------------------------------------------------------
# primitive ops


def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out = a.data + b.data
    except ValueError:
        raise ShapeError("add", a.shape, b.shape) from None

    def bwd(g):
        return ((a, _unbroadcast(g, a.data.shape)), (b, _unbroadcast(g, b.data.shape)))

    return _node(out, "add", (a, b), bwd)


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out = a.data * b.data
    except ValueError:
        raise ShapeError("mul", a.shape, b.shape) from None

    def bwd(g):
        return ((a, _unbroadcast(g * b.data, a.data.shape)),
                (b, _unbroadcast(g * a.data, b.data.shape)))

    return _node(out, "mul", (a, b), bwd)


def scale(a, c):
    a = _as_tensor(a)
    c = float(c)

    def bwd(g):
        return ((a, g * c),)

    return _node(a.data * c, "scale", (a,), bwd)


def matmul(a, b):
    """numpy ``@`` semantics, including stacked (batched) operands.

    1-D operands are lifted to matrices internally so the backward pass only
    deals with the >=2-D case.
    """
    a, b = _as_tensor(a), _as_tensor(b)
    a2 = a.data[None, :] if a.data.ndim == 1 else a.data
    b2 = b.data[:, None] if b.data.ndim == 1 else b.data
    if a2.shape[-1] != b2.shape[-2]:
        raise ShapeError("matmul", a.shape, b.shape)
    try:
        out = a2 @ b2
    except ValueError:
        raise ShapeError("matmul", a.shape, b.shape) from None
    if a.data.ndim == 1:
        out = out[..., 0, :]
    if b.data.ndim == 1:
        out = out[..., 0] if a.data.ndim == 1 else out[..., :, 0]

    def bwd(g):
        g2 = g
        if a.data.ndim == 1 and b.data.ndim == 1:
            g2 = g.reshape(g.shape + (1, 1))
        elif a.data.ndim == 1:
            g2 = g[..., None, :]
        elif b.data.ndim == 1:
            g2 = g[..., :, None]
        ga = g2 @ np.swapaxes(b2, -1, -2)
        gb = np.swapaxes(a2, -1, -2) @ g2
        if a.data.ndim == 1:
            ga = ga[..., 0, :]
        if b.data.ndim == 1:
            gb = gb[..., :, 0]
        return ((a, _unbroadcast(ga, a.data.shape)), (b, _unbroadcast(gb, b.data.shape)))

    return _node(out, "matmul", (a, b), bwd)


def tanh(a):
    a = _as_tensor(a)
    out = np.tanh(a.data)

    def bwd(g):
        return ((a, g * (1.0 - out * out)),)

    return _node(out, "tanh", (a,), bwd)


def sigmoid(a):
    a = _as_tensor(a)
    x = a.data
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)

    def bwd(g):
        return ((a, g * out * (1.0 - out)),)

    return _node(out, "sigmoid", (a,), bwd)


def relu(a):
    a = _as_tensor(a)
    out = np.maximum(a.data, 0.0)

    def bwd(g):
        return ((a, g * (a.data > 0)),)

    return _node(out, "relu", (a,), bwd)


def log(a, floor=1e-12):
    """Natural log with the argument clamped at ``floor`` (keeps CE finite)."""
    a = _as_tensor(a)
    clamped = np.maximum(a.data, floor)
    out = np.log(clamped)

    def bwd(g):
        return ((a, g * (a.data > floor) / clamped),)

    return _node(out, "log", (a,), bwd)


def rsqrt(a):
    a = _as_tensor(a)
    out = 1.0 / np.sqrt(a.data)

    def bwd(g):
        return ((a, g * (-0.5) * out / a.data),)

    return _node(out, "rsqrt", (a,), bwd)


def softmax(a, axis=-1):
    a = _as_tensor(a)
    if a.data.shape[axis] < 1:
        raise ShapeError("softmax", a.shape)
    shifted = a.data - np.max(a.data, axis=axis, keepdims=True)
    ex = np.exp(shifted)
    out = ex / np.sum(ex, axis=axis, keepdims=True)

    def bwd(g):
        dot = np.sum(g * out, axis=axis, keepdims=True)
        return ((a, out * (g - dot)),)

    return _node(out, "softmax", (a,), bwd)


def max_over_axis(a, axis):
    """Maximum along ``axis``; gradient routes to the lowest-index maximizer."""
    a = _as_tensor(a)
    idx = np.argmax(a.data, axis=axis)
    out = np.max(a.data, axis=axis)

    def bwd(g):
        ga = np.zeros_like(a.data)
        np.put_along_axis(ga, np.expand_dims(idx, axis), np.expand_dims(g, axis), axis)
        return ((a, ga),)

    node = _node(out, "max", (a,), bwd)
    node.name = "max(argmax recorded)"
    return node, idx


def mean_over_axis(a, axis, keepdims=False):
    a = _as_tensor(a)
    n = a.data.shape[axis]
    out = np.mean(a.data, axis=axis, keepdims=keepdims)

    def bwd(g):
        if not keepdims:
            g = np.expand_dims(g, axis)
        return ((a, np.broadcast_to(g, a.data.shape) / n),)

    return _node(out, "mean", (a,), bwd)


def sum_over_axis(a, axis=None, keepdims=False):
    a = _as_tensor(a)
    out = np.sum(a.data, axis=axis, keepdims=keepdims)

    def bwd(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return ((a, np.broadcast_to(g, a.data.shape).copy()),)

    return _node(out, "sum", (a,), bwd)


def concat(tensors, axis):
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat", ())
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        return tuple(zip(tensors, np.split(g, splits, axis=axis)))

    return _node(out, "concat", tuple(tensors), bwd)


def reshape(a, shape):
    a = _as_tensor(a)
    out = a.data.reshape(shape)

    def bwd(g):
        return ((a, g.reshape(a.data.shape)),)

    return _node(out, "reshape", (a,), bwd)


def transpose(a, axes):
    a = _as_tensor(a)
    out = np.transpose(a.data, axes)
    inv = np.argsort(axes)

    def bwd(g):
        return ((a, np.transpose(g, inv)),)

    return _node(out, "transpose", (a,), bwd)


def embedding_lookup(table, ids):
    """Gather rows of ``table``; backward scatter-adds onto exactly those rows."""
    table = _as_tensor(table)
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= table.data.shape[0]):
        raise ShapeError("embedding_lookup", table.shape, f"ids in [{ids.min()},{ids.max()}]")
    out = table.data[ids]

    def bwd(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, ids.reshape(-1), g.reshape(-1, table.data.shape[1]))
        return ((table, gt),)

    return _node(out, "embedding_lookup", (table,), bwd)
