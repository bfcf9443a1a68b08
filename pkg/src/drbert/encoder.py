"""One encoder layer: multi-head self-attention, position-wise FFN, masked
max-pooling, with post-norm residual arrangement.

Inputs are (B, L, d_model) stacks or single (L, d_model) sentences; masks are
0/1 floats over positions.  Attention uses the padding mask; pooling may use
a stricter mask (sentence words only) supplied by the caller.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import NEG_MASK, POOL_MASK, Tensor
from .rng import seeded_init


class EncoderLayerParams:
    def __init__(self, d_model, n_heads, d_ff, rng, prefix="enc"):
        if d_model % n_heads != 0:
            raise ValueError(f"d_model {d_model} not divisible by n_heads {n_heads}")
        self.d_model = d_model
        self.n_heads = n_heads
        self.d_ff = d_ff
        u = lambda shape, name: seeded_init(shape, "uniform", rng, name=f"{prefix}.{name}")
        z = lambda shape, name: seeded_init(shape, "zeros", rng, name=f"{prefix}.{name}")
        self.wq = u((d_model, d_model), "wq")
        self.wk = u((d_model, d_model), "wk")
        self.wv = u((d_model, d_model), "wv")
        self.wo = u((d_model, d_model), "wo")
        self.w1 = u((d_model, d_ff), "w1")
        self.b1 = z((d_ff,), "b1")
        self.w2 = u((d_ff, d_model), "w2")
        self.b2 = z((d_model,), "b2")
        self.ln1_g = Tensor(np.ones(d_model), requires_grad=True, name=f"{prefix}.ln1_g")
        self.ln1_b = z((d_model,), "ln1_b")
        self.ln2_g = Tensor(np.ones(d_model), requires_grad=True, name=f"{prefix}.ln2_g")
        self.ln2_b = z((d_model,), "ln2_b")

    def parameters(self):
        names = ["wq", "wk", "wv", "wo", "w1", "b1", "w2", "b2",
                 "ln1_g", "ln1_b", "ln2_g", "ln2_b"]
        return {n: getattr(self, n) for n in names}


def _lift(x):
    """(L, d) -> (1, L, d); returns (tensor, was_2d)."""
    if x.ndim == 2:
        return ad.reshape(x, (1,) + tuple(x.shape)), True
    return x, False


def _lift_mask(mask, B, L):
    if mask is None:
        return np.ones((B, L))
    m = np.asarray(mask, dtype=np.float64)
    if m.ndim == 1:
        m = m[None, :]
    if m.shape != (B, L):
        raise ad.ShapeError("mask", (B, L), m.shape)
    if np.any(m.sum(axis=-1) == 0):
        raise ValueError("all positions masked in at least one sequence")
    return m


def layer_norm(x, gain, bias, eps=1e-5):
    mu = ad.mean_over_axis(x, axis=-1, keepdims=True)
    centered = x - mu
    var = ad.mean_over_axis(ad.mul(centered, centered), axis=-1, keepdims=True)
    inv = ad.rsqrt(var + Tensor(eps))
    return ad.mul(centered, inv) * gain + bias


def apply_dropout(x, rate, rng):
    """Inverted dropout; identity when rate is 0 or no rng (eval mode)."""
    if rate <= 0.0 or rng is None:
        return x
    keep = rng.bernoulli(1.0 - rate, x.shape) / (1.0 - rate)
    return ad.mul(x, Tensor(keep))


def multi_head_self_attention(x, mask, params):
    """Scaled dot-product attention over all heads; padded keys get -inf
    logits so every attention row is a distribution over unmasked positions.

    Returns (output (..., L, d_model), attention weights (B, H, L, L)).
    """
    x3, was_2d = _lift(x)
    B, L, d = x3.shape
    H = params.n_heads
    dh = d // H
    m = _lift_mask(mask, B, L)

    def split_heads(t):
        return ad.transpose(ad.reshape(t, (B, L, H, dh)), (0, 2, 1, 3))

    q = split_heads(ad.matmul(x3, params.wq))
    k = split_heads(ad.matmul(x3, params.wk))
    v = split_heads(ad.matmul(x3, params.wv))
    scores = ad.scale(ad.matmul(q, ad.transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(dh))
    neg = Tensor(((m - 1.0) * NEG_MASK)[:, None, None, :])
    attn = ad.softmax(scores + neg, axis=-1)
    ctx = ad.reshape(ad.transpose(ad.matmul(attn, v), (0, 2, 1, 3)), (B, L, d))
    out = ad.matmul(ctx, params.wo)
    if was_2d:
        out = ad.reshape(out, (L, d))
    return out, attn


def position_wise_ffn(x, params):
    """relu(x W1 + b1) W2 + b2 applied identically at every position."""
    h = ad.relu(ad.matmul(x, params.w1) + params.b1)
    return ad.matmul(h, params.w2) + params.b2


def max_pool_sentence(f, mask=None):
    """Per-dimension max over unmasked positions -> (..., d_model).

    Ties route gradient to the lowest-index maximizer (argmax convention).
    """
    f3, was_2d = _lift(f)
    B, L, d = f3.shape
    m = _lift_mask(mask, B, L)
    neg = Tensor(((m - 1.0) * POOL_MASK)[:, :, None])
    pooled, _ = ad.max_over_axis(f3 + neg, axis=-2)
    if was_2d:
        pooled = ad.reshape(pooled, (d,))
    return pooled


def encoder_layer(x, attn_mask, params, pool_mask=None, dropout=0.0, rng=None):
    """Post-norm block: u = LN(x + MHSA(x)); f = LN(u + FFN(u)); plus the
    masked max-pooled sentence vector h_s of f."""
    att, _ = multi_head_self_attention(x, attn_mask, params)
    u = layer_norm(x + apply_dropout(att, dropout, rng), params.ln1_g, params.ln1_b)
    f = layer_norm(u + apply_dropout(position_wise_ffn(u, params), dropout, rng),
                   params.ln2_g, params.ln2_b)
    h_s = max_pool_sentence(f, attn_mask if pool_mask is None else pool_mask)
    return f, h_s
