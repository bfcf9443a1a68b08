"""Vocabulary, tokenization and the embedding tables.

The input convention is ``[CLS] sentence [SEP]`` followed by padding; the
attention mask is 0 exactly on pad positions.  Sentence words and the aspect
span live in sentence coordinates (0 = first real word); ``CLS_OFFSET``
converts to padded-sequence coordinates.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .rng import seeded_init

PAD_ID, UNK_ID, CLS_ID, SEP_ID = 0, 1, 2, 3
RESERVED = ("[PAD]", "[UNK]", "[CLS]", "[SEP]")
CLS_OFFSET = 1
DEFAULT_MAX_LEN = 64


class TokenizeError(ValueError):
    pass


class Vocab:
    """token -> dense id map with four fixed reserved ids."""

    def __init__(self, tokens):
        self._itos = list(RESERVED)
        self._stoi = {t: i for i, t in enumerate(self._itos)}
        for tok in tokens:
            tok = tok.lower()
            if tok in self._stoi:
                continue
            self._stoi[tok] = len(self._itos)
            self._itos.append(tok)

    @classmethod
    def build(cls, records):
        """Deterministic vocabulary from dataset records (sorted unique tokens)."""
        seen = sorted({t.lower() for r in records for t in r.tokens})
        return cls(seen)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            tokens = [line.rstrip("\n") for line in fh if line.rstrip("\n")]
        return cls(tokens)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for tok in self._itos[len(RESERVED):]:
                fh.write(tok + "\n")

    def id(self, token):
        hit = self._stoi.get(token)
        return hit if hit is not None else self._stoi.get(token.lower(), UNK_ID)

    def token(self, idx):
        return self._itos[idx]

    def tokens(self):
        """Non-reserved tokens in id order (the vocabulary-file contents)."""
        return list(self._itos[len(RESERVED):])

    def __len__(self):
        return len(self._itos)

    def __eq__(self, other):
        return isinstance(other, Vocab) and self._itos == other._itos


class TokenSequence:
    """ids + attention mask for one ``[CLS] w1..wn [SEP] pad..`` sequence."""

    def __init__(self, ids, mask):
        self.ids = list(ids)
        self.mask = list(mask)

    def __len__(self):
        return len(self.ids)


def tokenize(tokens, vocab, pad_to=None, max_len=DEFAULT_MAX_LEN):
    """Lowercase, map through the vocab and wrap with [CLS]/[SEP].

    Sequences longer than ``max_len`` (including the two specials) are
    rejected rather than truncated.
    """
    if not tokens:
        raise TokenizeError("tokenize: empty token list")
    ids = [CLS_ID] + [vocab.id(t) for t in tokens] + [SEP_ID]
    if len(ids) > max_len:
        raise TokenizeError(f"tokenize: sequence length {len(ids)} exceeds max {max_len}")
    if pad_to is not None:
        if pad_to < len(ids):
            raise TokenizeError(f"tokenize: pad_to {pad_to} shorter than sequence {len(ids)}")
        ids = ids + [PAD_ID] * (pad_to - len(ids))
    mask = [0 if i == PAD_ID else 1 for i in ids]
    return TokenSequence(ids, mask)


class EmbeddingTable:
    """Token embeddings plus a learned additive positional table."""

    def __init__(self, vocab_size, d_model, max_len, rng):
        self.d_model = d_model
        self.max_len = max_len
        self.tok = seeded_init((vocab_size, d_model), "uniform", rng, name="embed.tok")
        self.pos = seeded_init((max_len, d_model), "uniform", rng, name="embed.pos")

    def parameters(self):
        return {"embed.tok": self.tok, "embed.pos": self.pos}


def embed_sentence(ids, table):
    """ids (B, L) or (L,) int array -> embeddings (..., L, d_model).

    Row i is token_emb[ids[i]] + pos_emb[i]; pad positions are embedded too
    and must be masked downstream.
    """
    ids = np.asarray(ids)
    L = ids.shape[-1]
    if L > table.max_len:
        raise TokenizeError(f"embed_sentence: length {L} exceeds positional table {table.max_len}")
    tok = ad.embedding_lookup(table.tok, ids)
    pos = ad.embedding_lookup(table.pos, np.arange(L))
    return ad.add(tok, pos)


def aspect_embedding(rows):
    """Mean of the aspect-word embedding rows; identity for a single word."""
    rows = rows if isinstance(rows, Tensor) else Tensor(rows)
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise TokenizeError(f"aspect_embedding: need (l_a, d) rows with l_a >= 1, got {rows.shape}")
    return ad.mean_over_axis(rows, axis=0)


def aspect_selector(aspect_start, aspect_len, seq_len):
    """Constant (1, L) row that mean-pools the aspect span out of an embedded
    sentence via matmul (span given in sentence coordinates)."""
    if aspect_len < 1:
        raise TokenizeError("aspect_selector: empty aspect")
    sel = np.zeros((1, seq_len))
    lo = aspect_start + CLS_OFFSET
    sel[0, lo:lo + aspect_len] = 1.0 / aspect_len
    return sel
