"""Central-difference verification of analytic gradients."""

from __future__ import annotations

import numpy as np


def finite_difference_check(f, params, eps=1e-5):
    """Max relative error between backward() gradients and central differences.

    ``f`` is a zero-argument callable returning a scalar loss Tensor built
    from the Tensors in ``params`` (dict name -> Tensor or plain iterable).
    For every entry of every parameter the error is
    ``|analytic - numeric| / (|analytic| + 1e-8)``.
    """
    if eps <= 0:
        raise ValueError(f"finite_difference_check: eps must be > 0, got {eps}")
    tensors = list(params.values()) if isinstance(params, dict) else list(params)
    for p in tensors:
        p.zero_grad()
    loss = f()
    if not np.isfinite(loss.data).all():
        raise ValueError("finite_difference_check: f returned a non-finite value")
    loss.backward()
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in tensors]

    worst = 0.0
    for p, a in zip(tensors, analytic):
        flat = p.data.reshape(-1)
        aflat = a.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = float(f().data)
            flat[i] = orig - eps
            lo = float(f().data)
            flat[i] = orig
            if not (np.isfinite(hi) and np.isfinite(lo)):
                raise ValueError("finite_difference_check: f returned a non-finite value")
            numeric = (hi - lo) / (2.0 * eps)
            err = abs(aflat[i] - numeric) / (abs(aflat[i]) + 1e-8)
            if err > worst:
                worst = err
    return worst
