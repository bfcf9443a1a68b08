"""Dataset records and ingestion: canonical JSONL, SemEval-2014 XML
conversion, and the synthetic paired-aspect generator."""

from __future__ import annotations

import json
import os
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

from .rng import Rng
from .text import CLS_OFFSET, PAD_ID, CLS_ID, SEP_ID, tokenize

LABELS = ("negative", "neutral", "positive")
LABEL_TO_ID = {lab: i for i, lab in enumerate(LABELS)}


class DataError(ValueError):
    pass


@dataclass
class DatasetRecord:
    tokens: list
    aspect_start: int
    aspect_len: int
    label: str

    def validate(self, context=""):
        where = f"{context}: " if context else ""
        if not self.tokens:
            raise DataError(f"{where}tokens must be non-empty")
        if not all(isinstance(t, str) and t for t in self.tokens):
            raise DataError(f"{where}tokens must be non-empty strings")
        if self.aspect_len < 1:
            raise DataError(f"{where}aspect_len must be >= 1, got {self.aspect_len}")
        if self.aspect_start < 0 or self.aspect_start + self.aspect_len > len(self.tokens):
            raise DataError(
                f"{where}aspect span [{self.aspect_start}, "
                f"{self.aspect_start + self.aspect_len}) out of bounds for "
                f"{len(self.tokens)} tokens")
        if self.label not in LABELS:
            raise DataError(f"{where}unknown label {self.label!r} (expected one of {LABELS})")
        return self

    def to_json(self):
        return json.dumps({"tokens": self.tokens, "aspect_start": self.aspect_start,
                           "aspect_len": self.aspect_len, "label": self.label})


def load_jsonl(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}: line {lineno}: malformed JSON ({e.msg})") from None
            if not isinstance(obj, dict):
                raise DataError(f"{path}: line {lineno}: expected a JSON object")
            try:
                rec = DatasetRecord(tokens=obj["tokens"], aspect_start=int(obj["aspect_start"]),
                                    aspect_len=int(obj["aspect_len"]), label=obj["label"])
            except KeyError as e:
                raise DataError(f"{path}: line {lineno}: missing key {e.args[0]!r}") from None
            rec.validate(context=f"{path}: line {lineno}")
            records.append(rec)
    return records


def write_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


# ---------------------------------------------------------------------------
# SemEval-2014 XML conversion


def convert_semeval_xml(xml_path, out_path=None):
    """Convert aspectTerm annotations to JSONL records.

    Sentences are whitespace-tokenized; character offsets that do not land on
    token boundaries skip the term with a diagnostic rather than mangling it.
    Conflict-labeled terms are dropped and counted.

    Returns (records, report) where report counts conversions and skips.
    """
    try:
        tree = ET.parse(xml_path)
    except ET.ParseError as e:
        raise DataError(f"{xml_path}: malformed XML ({e})") from None
    records = []
    report = {"converted": 0, "skipped_conflict": 0, "skipped_misaligned": 0, "diagnostics": []}
    for sent in tree.getroot().iter("sentence"):
        text_el = sent.find("text")
        if text_el is None or not (text_el.text or "").strip():
            continue
        text = text_el.text
        spans = [(m.start(), m.end()) for m in re.finditer(r"\S+", text)]
        tokens = [text[a:b] for a, b in spans]
        starts = {a: i for i, (a, b) in enumerate(spans)}
        ends = {b: i for i, (a, b) in enumerate(spans)}
        terms = sent.find("aspectTerms")
        if terms is None:
            continue
        for term in terms.iter("aspectTerm"):
            polarity = term.get("polarity", "")
            if polarity == "conflict":
                report["skipped_conflict"] += 1
                continue
            if polarity not in LABELS:
                raise DataError(f"{xml_path}: unknown polarity {polarity!r} "
                                f"on term {term.get('term')!r}")
            frm, to = int(term.get("from")), int(term.get("to"))
            if frm not in starts or to not in ends or ends[to] < starts[frm]:
                report["skipped_misaligned"] += 1
                report["diagnostics"].append(
                    f"term {term.get('term')!r} offsets {frm}:{to} not on token boundaries")
                continue
            i, j = starts[frm], ends[to]
            rec = DatasetRecord(tokens=tokens, aspect_start=i, aspect_len=j - i + 1,
                                label=polarity).validate(context=xml_path)
            records.append(rec)
            report["converted"] += 1
    if out_path is not None:
        write_jsonl(records, out_path)
    return records, report


# ---------------------------------------------------------------------------
# synthetic paired-aspect corpus

_ASPECTS = [
    ("battery",), ("screen",), ("keyboard",), ("camera",), ("price",),
    ("service",), ("design",), ("memory",),
    ("battery", "life"), ("system", "memory"),
]

_WORDS = {
    "positive": ["great", "excellent", "fantastic", "superb"],
    "negative": ["terrible", "awful", "horrible", "poor"],
    "neutral": ["okay", "average", "ordinary", "plain"],
}

# segments between the four slots A1 W1 A2 W2; fillers are polarity-neutral
_TEMPLATES = [
    (["the"], ["is"], ["but", "the"], ["is"], ["."]),
    ([], ["seems"], ["while", "the"], ["feels"], ["overall", "."]),
    (["honestly", "the"], ["looks"], ["and", "the"], ["looks"], ["today", "."]),
    (["we", "think", "the"], ["was"], ["though", "the"], ["was"], ["."]),
]

# cycle of ordered distinct label pairs -> exact 1/3 marginals per full cycle
_PAIR_CYCLE = [
    ("positive", "negative"), ("negative", "positive"),
    ("neutral", "positive"), ("positive", "neutral"),
    ("negative", "neutral"), ("neutral", "negative"),
]


def _build_sentence(template, a1, w1, a2, w2):
    pre, mid1, mid2, mid3, post = template
    tokens = list(pre)
    span1 = (len(tokens), len(a1))
    tokens += list(a1) + list(mid1) + [w1] + list(mid2)
    span2 = (len(tokens), len(a2))
    tokens += list(a2) + list(mid3) + [w2] + list(post)
    return tokens, span1, span2


def synth_dataset(seed, n_pairs, out_dir=None):
    """Two-aspect sentences where the paired records share tokens but differ
    in aspect span and label — the probe for aspect-aware behavior.

    Returns {"train": [...], "dev": [...], "test": [...]}; with ``out_dir``
    also writes train/dev/test .jsonl files.  Deterministic in ``seed``.
    """
    if n_pairs < 1:
        raise DataError(f"n_pairs must be >= 1, got {n_pairs}")
    rng = Rng(seed, stream=7)
    pairs = []
    for i in range(n_pairs):
        lab1, lab2 = _PAIR_CYCLE[i % len(_PAIR_CYCLE)]
        template = _TEMPLATES[int(rng.integers(0, len(_TEMPLATES)))]
        ai, aj = rng.permutation(len(_ASPECTS))[:2]
        w1 = _WORDS[lab1][int(rng.integers(0, len(_WORDS[lab1])))]
        w2 = _WORDS[lab2][int(rng.integers(0, len(_WORDS[lab2])))]
        tokens, (s1, l1), (s2, l2) = _build_sentence(template, _ASPECTS[ai], w1, _ASPECTS[aj], w2)
        pairs.append((
            DatasetRecord(tokens, s1, l1, lab1).validate(),
            DatasetRecord(tokens, s2, l2, lab2).validate(),
        ))

    order = rng.permutation(n_pairs)
    n_dev = n_pairs // 10
    n_test = n_pairs // 10
    n_train = n_pairs - n_dev - n_test
    splits = {"train": [], "dev": [], "test": []}
    for rank, idx in enumerate(order):
        if rank < n_train:
            key = "train"
        elif rank < n_train + n_dev:
            key = "dev"
        else:
            key = "test"
        splits[key].extend(pairs[idx])

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for key, recs in splits.items():
            write_jsonl(recs, os.path.join(out_dir, f"{key}.jsonl"))
    return splits


# ---------------------------------------------------------------------------
# batching


class Batch:
    """Numeric view of a record list: padded ids plus masks and selectors.

    ``sent_mask`` is 1 only on sentence words (no [CLS]/[SEP]/pad); it gates
    both the re-weighting selection pool and the pooling reductions.
    """

    def __init__(self, ids, attn_mask, sent_mask, aspect_sel, labels):
        self.ids = ids
        self.attn_mask = attn_mask
        self.sent_mask = sent_mask
        self.aspect_sel = aspect_sel
        self.labels = labels

    @property
    def size(self):
        return self.ids.shape[0]


def encode_batch(records, vocab, max_len):
    """Tokenize + pad a record list into one Batch. Validates spans/lengths."""
    if not records:
        raise DataError("encode_batch: empty record list")
    for i, rec in enumerate(records):
        rec.validate(context=f"record {i}")
    seq_len = max(len(r.tokens) for r in records) + 2
    ids, attn, sent, sel, labels = [], [], [], [], []
    for rec in records:
        ts = tokenize(rec.tokens, vocab, pad_to=seq_len, max_len=max_len)
        ids.append(ts.ids)
        attn.append(ts.mask)
        sent.append([1.0 if t not in (PAD_ID, CLS_ID, SEP_ID) else 0.0 for t in ts.ids])
        row = np.zeros(seq_len)
        lo = rec.aspect_start + CLS_OFFSET
        row[lo:lo + rec.aspect_len] = 1.0 / rec.aspect_len
        sel.append(row)
        labels.append(LABEL_TO_ID[rec.label])
    return Batch(np.asarray(ids, dtype=np.int64),
                 np.asarray(attn, dtype=np.float64),
                 np.asarray(sent, dtype=np.float64),
                 np.asarray(sel, dtype=np.float64)[:, None, :],
                 np.asarray(labels, dtype=np.int64))
