"""Seeded training loop with dev-based early stopping."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .data import DataError, encode_batch
from .metrics import evaluate
from .model import DrBert, ModelConfig
from .optim import Adam
from .rng import Rng
from .text import Vocab


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    """Optimization settings.

    lr 1e-3 suits from-scratch training (the low end of the usual grid is
    for pretrained weights); batch sizes 16..128 are the tested range but
    any positive value is accepted.  The weight penalty beta defaults to 0:
    the reference setting (0.8) belongs with pretrained-scale learning
    rates and collapses from-scratch desk-scale runs.
    """

    seed: int = 0
    lr: float = 1e-3
    batch_size: int = 32
    epochs: int = 60
    patience: int = 10
    dev_fraction: float = 0.1
    beta: float = 0.0

    def validate(self):
        if self.lr <= 0 or self.batch_size < 1 or self.epochs < 1 or self.patience < 1:
            raise DataError("train config: lr/batch_size/epochs/patience must be positive")
        if not 0.0 < self.dev_fraction < 1.0:
            raise DataError(f"dev_fraction must be in (0,1), got {self.dev_fraction}")
        if self.beta < 0:
            raise DataError(f"beta must be >= 0, got {self.beta}")
        return self

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise DataError(f"unknown train config fields: {sorted(unknown)}")
        return cls(**d).validate()


@dataclass
class TrainResult:
    model: DrBert
    vocab: Vocab
    optimizer: Adam
    log: list  # one dict per epoch
    best_epoch: int


def _snapshot(model):
    return {n: p.data.copy() for n, p in model.parameters().items()}


def _restore(model, snap):
    for n, p in model.parameters().items():
        p.data = snap[n].copy()


def train(model_config: ModelConfig, train_config: TrainConfig, train_records,
          dev_records=None, log_fn=None) -> TrainResult:
    """Train on ``train_records``; early-stop on dev accuracy.

    When no dev set is given, ``dev_fraction`` of the training records is
    split off (seeded).  Deterministic: identical (seed, config, data) give
    identical logs and parameters.
    """
    train_config.validate()
    if not train_records:
        raise DataError("train: empty training set")
    if dev_records is None:
        rng_split = Rng(train_config.seed, stream=3)
        order = rng_split.permutation(len(train_records))
        n_dev = max(1, int(round(train_config.dev_fraction * len(train_records))))
        if n_dev >= len(train_records):
            raise DataError("train: dev split would consume the whole training set")
        dev_records = [train_records[i] for i in order[:n_dev]]
        train_records = [train_records[i] for i in order[n_dev:]]

    vocab = Vocab.build(train_records)
    config = dataclasses.replace(model_config, vocab_size=len(vocab)).validate()
    model = DrBert(config, Rng(train_config.seed, stream=0))
    optimizer = Adam(model.trainable_parameters(), lr=train_config.lr)
    rng_shuffle = Rng(train_config.seed, stream=1)
    rng_dropout = Rng(train_config.seed, stream=2)

    log = []
    best_acc, best_epoch, best_snap = -1.0, -1, None
    stale = 0
    for epoch in range(train_config.epochs):
        order = rng_shuffle.permutation(len(train_records))
        losses = []
        for lo in range(0, len(order), train_config.batch_size):
            chunk = [train_records[i] for i in order[lo:lo + train_config.batch_size]]
            batch = encode_batch(chunk, vocab, config.max_len)
            res = model.forward(batch, train=True, rng=rng_dropout)
            loss = model.loss(res.yhat, batch.labels, beta=train_config.beta)
            val = float(loss.data)
            if not np.isfinite(val):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {lo // train_config.batch_size} "
                    f"(last finite losses: {[round(x, 4) for x in losses[-3:]]})")
            model.zero_grads()
            loss.backward()
            optimizer.step()
            losses.append(val)
        dev = evaluate(model, vocab, dev_records) if dev_records else None
        entry = {"epoch": epoch, "train_loss": float(np.mean(losses)),
                 "dev_accuracy": dev.accuracy if dev else None,
                 "dev_macro_f1": dev.macro_f1 if dev else None}
        log.append(entry)
        if log_fn:
            log_fn(entry)
        if dev is None:
            best_epoch, best_snap = epoch, _snapshot(model)
            continue
        if dev.accuracy > best_acc:
            best_acc, best_epoch, best_snap = dev.accuracy, epoch, _snapshot(model)
            stale = 0
        else:
            stale += 1
            if stale >= train_config.patience:
                break
    _restore(model, best_snap)
    return TrainResult(model=model, vocab=vocab, optimizer=optimizer, log=log,
                       best_epoch=best_epoch)
