"""Full model: stacked encoder layers, a re-weighting adapter per layer,
per-layer fusion, MLP head, loss, and checkpoint serialization."""

from __future__ import annotations

import dataclasses
import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data import Batch, encode_batch
from .dra import DraParams, dra_rollout
from .encoder import EncoderLayerParams, apply_dropout, encoder_layer, max_pool_sentence
from .rng import Rng, seeded_init
from .text import EmbeddingTable, Vocab, embed_sentence

CHECKPOINT_MAGIC = b"DRBERT01"
CHECKPOINT_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class ModelConfig:
    """Architecture hyperparameters.

    Desk-scale defaults; the reference scale in the source family is 12
    layers x 768 wide with d_gru 256.  ``dra_layers`` lists the layer
    indices carrying an adapter (None = all); ``chain_fused`` feeds each
    fused output e^n to the next layer (the alternative chains on f^n).
    """

    n_layers: int = 2
    d_model: int = 32
    n_heads: int = 4
    d_ff: int = 64
    d_gru: int = 32
    d_attn: int = 32
    reweight_len: int = 7
    sharpen_lambda: float = 100.0
    mlp_depth: int = 3
    mlp_hidden: int = 0  # 0 -> d_model
    n_classes: int = 3
    dropout: float = 0.2
    freeze_encoder: bool = False
    share_dra: bool = False
    max_len: int = 64
    vocab_size: int = 0
    dra_layers: list = field(default=None)
    chain_fused: bool = True

    def validate(self):
        pos = {"n_layers": self.n_layers, "d_model": self.d_model, "n_heads": self.n_heads,
               "d_ff": self.d_ff, "d_gru": self.d_gru, "d_attn": self.d_attn,
               "reweight_len": self.reweight_len, "max_len": self.max_len}
        for name, val in pos.items():
            if val < 1:
                raise ConfigError(f"{name} must be >= 1, got {val}")
        if self.n_classes != 3:
            raise ConfigError(f"n_classes must be 3, got {self.n_classes}")
        if self.d_model % self.n_heads != 0:
            raise ConfigError(f"d_model {self.d_model} not divisible by n_heads {self.n_heads}")
        if self.sharpen_lambda <= 0:
            raise ConfigError(f"sharpen_lambda must be > 0, got {self.sharpen_lambda}")
        if self.mlp_depth < 0:
            raise ConfigError(f"mlp_depth must be >= 0, got {self.mlp_depth}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.dra_layers is not None:
            bad = [i for i in self.dra_layers if not 0 <= i < self.n_layers]
            if bad:
                raise ConfigError(f"dra_layers {bad} out of range for {self.n_layers} layers")
        return self

    def active_dra_layers(self):
        if self.dra_layers is None:
            return list(range(self.n_layers))
        return sorted(set(self.dra_layers))

    def resolved_mlp_hidden(self):
        return self.mlp_hidden if self.mlp_hidden > 0 else self.d_model

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown model config fields: {sorted(unknown)}")
        return cls(**d).validate()


class FuseParams:
    """Affine fusion e_i = f_i W_e + h_T U_e + b_e (h_T broadcast over i)."""

    def __init__(self, d_model, d_gru, rng, prefix="fuse"):
        self.we = seeded_init((d_model, d_model), "uniform", rng, name=f"{prefix}.we")
        self.ue = seeded_init((d_gru, d_model), "uniform", rng, name=f"{prefix}.ue")
        self.be = seeded_init((d_model,), "zeros", rng, name=f"{prefix}.be")

    def parameters(self):
        return {"we": self.we, "ue": self.ue, "be": self.be}


def fuse_layer_output(f, h_t, params):
    """Broadcast the adapter state across positions; ``h_t=None`` drops the
    adapter term (the ablation with re-weighting disabled)."""
    e = ad.matmul(f, params.we)
    if h_t is not None:
        u = ad.matmul(h_t, params.ue)
        if f.ndim == 3:
            u = ad.reshape(u, (u.shape[0], 1, u.shape[-1]))
        e = e + u
    return e + params.be


@dataclass
class ForwardResult:
    yhat: Tensor
    logits: Tensor
    traces: list  # [(layer_index, DraTrace)]


def one_hot(labels, n_classes):
    labels = np.asarray(labels)
    out = np.zeros((labels.shape[0], n_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


class DrBert:
    """The assembled classifier; owns all parameter tensors."""

    def __init__(self, config: ModelConfig, rng: Rng):
        config.validate()
        if config.vocab_size < 5:
            raise ConfigError(f"vocab_size must cover the reserved ids, got {config.vocab_size}")
        self.config = config
        c = config
        self.embed = EmbeddingTable(c.vocab_size, c.d_model, c.max_len, rng.split(10))
        self.enc_layers = [EncoderLayerParams(c.d_model, c.n_heads, c.d_ff, rng.split(20 + i),
                                              prefix=f"enc.{i}")
                           for i in range(c.n_layers)]
        active = c.active_dra_layers()
        if c.share_dra:
            shared = DraParams(c.d_model, c.d_gru, c.d_attn, c.reweight_len, c.sharpen_lambda,
                               rng.split(40), prefix="dra.shared")
            self.dra_layers = {i: shared for i in active}
        else:
            self.dra_layers = {i: DraParams(c.d_model, c.d_gru, c.d_attn, c.reweight_len,
                                            c.sharpen_lambda, rng.split(40 + i),
                                            prefix=f"dra.{i}")
                               for i in active}
        self.fuse_layers = [FuseParams(c.d_model, c.d_gru, rng.split(60 + i), prefix=f"fuse.{i}")
                            for i in range(c.n_layers)]
        width = c.resolved_mlp_hidden()
        self.mlp = []
        in_dim = c.d_model
        mlp_rng = rng.split(80)
        for j in range(c.mlp_depth):
            w = seeded_init((in_dim, width), "uniform", mlp_rng, name=f"mlp.{j}.w")
            b = seeded_init((width,), "zeros", mlp_rng, name=f"mlp.{j}.b")
            self.mlp.append((w, b))
            in_dim = width
        self.head_w = seeded_init((in_dim, c.n_classes), "uniform", rng.split(90), name="head.w")
        self.head_b = seeded_init((c.n_classes,), "zeros", rng.split(90), name="head.b")
        if c.freeze_encoder:
            for p in self.embed.parameters().values():
                p.requires_grad = False
            for layer in self.enc_layers:
                for p in layer.parameters().values():
                    p.requires_grad = False

    # -- parameter plumbing -------------------------------------------------

    def parameters(self):
        out = {}
        out.update({f"embed.{k.split('.')[-1]}": v for k, v in self.embed.parameters().items()})
        for i, layer in enumerate(self.enc_layers):
            out.update({f"enc.{i}.{n}": p for n, p in layer.parameters().items()})
        if self.config.share_dra and self.dra_layers:
            first = next(iter(self.dra_layers.values()))
            out.update({f"dra.shared.{n}": p for n, p in first.parameters().items()})
        else:
            for i in sorted(self.dra_layers):
                out.update({f"dra.{i}.{n}": p for n, p in self.dra_layers[i].parameters().items()})
        for i, fuse in enumerate(self.fuse_layers):
            out.update({f"fuse.{i}.{n}": p for n, p in fuse.parameters().items()})
        for j, (w, b) in enumerate(self.mlp):
            out[f"mlp.{j}.w"] = w
            out[f"mlp.{j}.b"] = b
        out["head.w"] = self.head_w
        out["head.b"] = self.head_b
        return out

    def trainable_parameters(self):
        """Adapter/fusion/head only when the encoder is frozen."""
        params = self.parameters()
        if not self.config.freeze_encoder:
            return params
        return {n: p for n, p in params.items()
                if not (n.startswith("embed.") or n.startswith("enc."))}

    def zero_grads(self):
        for p in self.parameters().values():
            p.zero_grad()

    # -- forward ------------------------------------------------------------

    def forward(self, batch: Batch, train=False, rng=None) -> ForwardResult:
        c = self.config
        drop = c.dropout if train else 0.0
        drop_rng = rng if train else None
        x = embed_sentence(batch.ids, self.embed)
        s0 = x  # the fixed selection pool shared by every adapter
        aspect = ad.reshape(ad.matmul(Tensor(batch.aspect_sel), s0),
                            (batch.size, c.d_model))
        traces = []
        e = None
        for i in range(c.n_layers):
            f, h_s = encoder_layer(x, batch.attn_mask, self.enc_layers[i],
                                   pool_mask=batch.sent_mask, dropout=drop, rng=drop_rng)
            if i in self.dra_layers:
                h_t, trace = dra_rollout(s0, h_s, aspect, self.dra_layers[i],
                                         mask=batch.sent_mask)
                traces.append((i, trace))
            else:
                h_t = None
            e = fuse_layer_output(f, h_t, self.fuse_layers[i])
            x = e if c.chain_fused else f
        pooled = max_pool_sentence(e, batch.sent_mask)
        r = pooled
        for w, b in self.mlp:
            r = ad.relu(ad.matmul(r, w) + b)
            r = apply_dropout(r, drop, drop_rng)
        logits = ad.matmul(r, self.head_w) + self.head_b
        yhat = ad.softmax(logits, axis=-1)
        return ForwardResult(yhat=yhat, logits=logits, traces=traces)

    def loss(self, yhat, labels, beta=0.0):
        """Summed cross-entropy plus beta * sum of squared trainable entries."""
        if beta < 0:
            raise ConfigError(f"beta must be >= 0, got {beta}")
        onehot = one_hot(labels, self.config.n_classes)
        ce = ad.scale(ad.sum_over_axis(ad.mul(Tensor(onehot), ad.log(yhat))), -1.0)
        if beta == 0.0:
            return ce
        reg = None
        for p in self.trainable_parameters().values():
            sq = ad.sum_over_axis(ad.mul(p, p))
            reg = sq if reg is None else reg + sq
        return ce + ad.scale(reg, beta)

    def predict(self, records, vocab, batch_size=64):
        """Label ids for a record list, batched, in eval mode."""
        preds = []
        for lo in range(0, len(records), batch_size):
            batch = encode_batch(records[lo:lo + batch_size], vocab, self.config.max_len)
            res = self.forward(batch, train=False)
            preds.extend(np.argmax(res.yhat.data, axis=-1).tolist())
        return preds


# ---------------------------------------------------------------------------
# checkpoint I/O
#
# Layout: 8-byte magic, u32 LE header length, UTF-8 JSON header (version,
# config, vocab, ordered tensor manifest, optional optimizer metadata), raw
# little-endian float64 payloads, u32 LE CRC32 of the payload region.


class CheckpointError(Exception):
    pass


class NotACheckpointError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class CheckpointShapeError(CheckpointError):
    pass


class CheckpointCorruptError(CheckpointError):
    pass


def _checkpoint_bytes(model, vocab, optimizer=None):
    tensors = []
    blobs = []
    offset = 0

    def push(name, arr):
        nonlocal offset
        raw = np.ascontiguousarray(arr, dtype="<f8").tobytes()
        tensors.append({"name": name, "shape": list(arr.shape), "dtype": "<f8",
                        "offset": offset})
        blobs.append(raw)
        offset += len(raw)

    params = model.parameters()
    for name, p in params.items():
        push(name, p.data)
    opt_meta = None
    if optimizer is not None:
        st = optimizer.state
        opt_meta = {"t": st.t, "lr": st.lr, "beta1": st.beta1, "beta2": st.beta2, "eps": st.eps}
        for name in params:
            if name in st.m:
                push(f"adam.m.{name}", st.m[name])
                push(f"adam.v.{name}", st.v[name])
    header = {"format_version": CHECKPOINT_VERSION, "config": model.config.to_dict(),
              "vocab": vocab.tokens(), "tensors": tensors, "optimizer": opt_meta}
    hjson = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = b"".join(blobs)
    return (CHECKPOINT_MAGIC + struct.pack("<I", len(hjson)) + hjson + payload
            + struct.pack("<I", zlib.crc32(payload)))


def save_checkpoint(model, vocab, path, optimizer=None):
    with open(path, "wb") as fh:
        fh.write(_checkpoint_bytes(model, vocab, optimizer))


def load_checkpoint(path):
    """Rebuild (model, vocab, optimizer_meta) from a checkpoint file.

    ``optimizer_meta`` is None or (AdamState-compatible dict, moments dict)
    left for the caller to wire into a fresh optimizer.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(CHECKPOINT_MAGIC) or raw[:len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise NotACheckpointError(f"{path}: not a checkpoint (bad magic)")
    pos = len(CHECKPOINT_MAGIC)
    if len(raw) < pos + 4:
        raise CheckpointTruncatedError(f"{path}: truncated before header length")
    (hlen,) = struct.unpack_from("<I", raw, pos)
    pos += 4
    if len(raw) < pos + hlen + 4:
        raise CheckpointTruncatedError(f"{path}: truncated header or payload")
    try:
        header = json.loads(raw[pos:pos + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointCorruptError(f"{path}: unreadable header ({e})") from None
    pos += hlen
    if header.get("format_version") != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"{path}: format version {header.get('format_version')} "
            f"(expected {CHECKPOINT_VERSION})")
    payload = raw[pos:-4]
    (crc,) = struct.unpack_from("<I", raw, len(raw) - 4)
    if zlib.crc32(payload) != crc:
        raise CheckpointCorruptError(f"{path}: payload CRC mismatch")

    config = ModelConfig.from_dict(header["config"])
    vocab = Vocab(header["vocab"])
    if len(vocab) != config.vocab_size:
        raise CheckpointShapeError(
            f"{path}: vocab has {len(vocab)} entries but config says {config.vocab_size}")
    model = DrBert(config, Rng(0))
    params = model.parameters()

    stored = {}
    for t in header["tensors"]:
        shape = tuple(t["shape"])
        nbytes = int(np.prod(shape)) * 8 if shape else 8
        if t["offset"] + nbytes > len(payload):
            raise CheckpointTruncatedError(f"{path}: tensor {t['name']} exceeds payload")
        arr = np.frombuffer(payload, dtype="<f8", count=int(np.prod(shape)),
                            offset=t["offset"]).reshape(shape)
        stored[t["name"]] = arr.astype(np.float64)

    model_names = [n for n in stored if not n.startswith("adam.")]
    if set(model_names) != set(params):
        missing = sorted(set(params) - set(model_names))
        extra = sorted(set(model_names) - set(params))
        raise CheckpointShapeError(
            f"{path}: parameter manifest does not match config "
            f"(missing {missing[:4]}, unexpected {extra[:4]})")
    for name, p in params.items():
        if stored[name].shape != p.data.shape:
            raise CheckpointShapeError(
                f"{path}: tensor {name} has shape {stored[name].shape}, "
                f"config implies {p.data.shape}")
        p.data = stored[name].copy()

    opt_meta = None
    if header.get("optimizer") is not None:
        moments = {"m": {}, "v": {}}
        for name, arr in stored.items():
            if name.startswith("adam.m."):
                moments["m"][name[len("adam.m."):]] = arr.copy()
            elif name.startswith("adam.v."):
                moments["v"][name[len("adam.v."):]] = arr.copy()
        opt_meta = (header["optimizer"], moments)
    return model, vocab, opt_meta
