"""Dynamic re-weighting adapter.

For each of T steps: score every sentence word against (previous hidden
state, aspect vector), softly pick one word with a sharpened softmax, and
fold it into a GRU state.  The sharpening constant lambda is a fixed
hyperparameter; with large lambda the soft pick approaches the argmax word
while staying differentiable end to end.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import NEG_MASK, Tensor
from .rng import seeded_init


class DraParams:
    """Scoring, selection and GRU weights for one adapter.

    Linear maps are stored (in_dim, out_dim) and applied as ``x @ W``.  The
    selection head ``omega`` starts at zero so the first selections are
    uniform and the scorer trains through a soft phase before lambda
    sharpens them.
    """

    def __init__(self, d_model, d_gru, d_attn, reweight_len, sharpen_lambda, rng, prefix="dra"):
        if reweight_len < 1:
            raise ValueError(f"reweight_len must be >= 1, got {reweight_len}")
        if sharpen_lambda <= 0:
            raise ValueError(f"sharpen_lambda must be > 0, got {sharpen_lambda}")
        self.d_model = d_model
        self.d_gru = d_gru
        self.d_attn = d_attn
        self.reweight_len = reweight_len
        self.sharpen_lambda = sharpen_lambda
        u = lambda shape, name: seeded_init(shape, "uniform", rng, name=f"{prefix}.{name}")
        self.ws = u((d_model, d_attn), "ws")
        self.wd = u((d_gru, d_attn), "wd")
        self.wa = u((d_model, d_attn), "wa")
        self.omega = seeded_init((d_attn,), "zeros", rng, name=f"{prefix}.omega")
        self.w_h0 = u((d_model, d_gru), "w_h0")
        self.wz = u((d_gru + d_model, d_gru), "wz")
        self.wr = u((d_gru + d_model, d_gru), "wr")
        self.wh = u((d_gru + d_model, d_gru), "wh")

    def parameters(self):
        names = ["ws", "wd", "wa", "omega", "w_h0", "wz", "wr", "wh"]
        return {n: getattr(self, n) for n in names}


class DraTrace:
    """Per-step selection record: alphas (T, B, L), chosen (T, B), hidden (T, B, d_gru)."""

    def __init__(self, alphas, chosen, hidden):
        self.alphas = alphas
        self.chosen = chosen
        self.hidden = hidden

    @property
    def steps(self):
        return self.alphas.shape[0]


def _lift3(x):
    if x.ndim == 2:
        return ad.reshape(x, (1,) + tuple(x.shape)), True
    return x, False


def _lift2(x):
    if x.ndim == 1:
        return ad.reshape(x, (1,) + tuple(x.shape)), True
    return x, False


def reweight_logits(S, h_prev, a, params, mask=None):
    """Score each word of S against the (state, aspect) query.

    The query vector W_d h_prev + W_a a is broadcast across all token
    positions (the rank-one outer product with the all-ones row), added to
    W_s S, squashed by tanh and projected to one logit per word.  Masked
    positions get a -inf-scale offset so they cannot be selected.
    """
    S3, was_2d = _lift3(S)
    h2, _ = _lift2(h_prev)
    a2, _ = _lift2(a)
    B, L, _ = S3.shape
    if L < 1:
        raise ad.ShapeError("reweight_logits", S.shape)
    q = ad.matmul(h2, params.wd) + ad.matmul(a2, params.wa)
    M = ad.matmul(S3, params.ws) + ad.reshape(q, (B, 1, params.d_attn))
    m = ad.matmul(ad.tanh(M), params.omega)
    if mask is not None:
        mk = np.asarray(mask, dtype=np.float64)
        if mk.ndim == 1:
            mk = mk[None, :]
        m = m + Tensor((mk - 1.0) * NEG_MASK)
    if was_2d:
        m = ad.reshape(m, (L,))
    return m


def soft_select(S, m, sharpen_lambda):
    """Sharpened-softmax mixture of the rows of S.

    Returns (a_t, alpha) where alpha = softmax(lambda * m).  The argmax of
    alpha equals the argmax of m for every lambda > 0; large lambda drives
    the top weight toward 1 while keeping the op differentiable.
    """
    if sharpen_lambda <= 0:
        raise ValueError(f"sharpen_lambda must be > 0, got {sharpen_lambda}")
    S3, was_2d = _lift3(S)
    m2, _ = _lift2(m)
    B, L, d = S3.shape
    alpha = ad.softmax(ad.scale(m2, sharpen_lambda), axis=-1)
    a_t = ad.reshape(ad.matmul(ad.reshape(alpha, (B, 1, L)), S3), (B, d))
    if was_2d:
        a_t = ad.reshape(a_t, (d,))
        alpha = ad.reshape(alpha, (L,))
    return a_t, alpha


def gru_step(a_t, h_prev, params):
    """Gated update folding the selected word into the hidden state."""
    a2, was_1d = _lift2(a_t)
    h2, _ = _lift2(h_prev)
    cat = ad.concat([h2, a2], axis=-1)
    z = ad.sigmoid(ad.matmul(cat, params.wz))
    r = ad.sigmoid(ad.matmul(cat, params.wr))
    h_tilde = ad.tanh(ad.matmul(ad.concat([ad.mul(r, h2), a2], axis=-1), params.wh))
    h_t = (Tensor(1.0) - z) * h2 + z * h_tilde
    if was_1d:
        h_t = ad.reshape(h_t, (params.d_gru,))
    return h_t


def dra_rollout(S, h_s, a, params, mask=None):
    """T selection steps starting from the projected sentence vector.

    Returns (h_T, DraTrace).  Deterministic given parameters and inputs;
    nothing on the value path uses a hard argmax.
    """
    S3, was_2d = _lift3(S)
    h = ad.matmul(h_s if h_s.ndim == 2 else ad.reshape(h_s, (1,) + tuple(h_s.shape)), params.w_h0)
    alphas, chosen, hidden = [], [], []
    for _ in range(params.reweight_len):
        m = reweight_logits(S3, h, a, params, mask=mask)
        a_t, alpha = soft_select(S3, m, params.sharpen_lambda)
        h = gru_step(a_t, h, params)
        alphas.append(alpha.data.copy())
        chosen.append(np.argmax(alpha.data, axis=-1))
        hidden.append(h.data.copy())
    trace = DraTrace(np.stack(alphas), np.stack(chosen), np.stack(hidden))
    if was_2d:
        h = ad.reshape(h, (params.d_gru,))
    return h, trace
