"""Seeded, splittable randomness and parameter initialization.

Streams are counter-based (Philox keyed by ``(seed, stream)``), so any
(seed, stream, call sequence) triple reproduces bit-identically across runs.
"""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor


class Rng:
    """One deterministic stream; ``split(k)`` derives an independent one."""

    def __init__(self, seed, stream=0):
        self.seed = int(seed)
        self.stream = int(stream)
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def split(self, stream):
        return Rng(self.seed, stream)

    def uniform(self, low, high, shape):
        return self._gen.uniform(low, high, size=shape)

    def permutation(self, n):
        return self._gen.permutation(n)

    def integers(self, low, high, shape=None):
        return self._gen.integers(low, high, size=shape)

    def bernoulli(self, p, shape):
        return (self._gen.random(size=shape) < p).astype(np.float64)


def seeded_init(shape, scheme, rng, requires_grad=True, name=None):
    """Build a parameter tensor.

    ``uniform``: entries drawn from [-1/sqrt(fan_in), +1/sqrt(fan_in)] with
    fan_in = first dimension.  ``zeros``: all zero (biases, and weights that
    should start inert, like the selection head).
    """
    shape = tuple(int(s) for s in shape)
    if len(shape) == 0 or any(s <= 0 for s in shape):
        raise ValueError(f"seeded_init: invalid shape {shape}")
    if scheme == "zeros":
        data = np.zeros(shape)
    elif scheme == "uniform":
        bound = 1.0 / np.sqrt(shape[0])
        data = rng.uniform(-bound, bound, shape)
    else:
        raise ValueError(f"seeded_init: unknown scheme {scheme!r}")
    return Tensor(data, requires_grad=requires_grad, name=name)
