"""Export of per-step re-weighting traces as versioned JSON."""

from __future__ import annotations

import json

from .data import DataError, LABELS, encode_batch
from .text import CLS_OFFSET

TRACE_SCHEMA = "drbert-trace/1"


def collect_traces(model, vocab, records, batch_size=64):
    """One trace dict per (record, adapter layer).

    Alpha vectors are restricted to the sentence words (the masked softmax
    puts exactly zero weight on [CLS]/[SEP]/pad), so each has length l_s and
    the chosen index is in sentence coordinates.
    """
    if model.config.vocab_size != len(vocab):
        raise DataError(
            f"vocab/checkpoint mismatch: model built for {model.config.vocab_size} "
            f"tokens, vocabulary has {len(vocab)}")
    out = []
    for lo in range(0, len(records), batch_size):
        chunk = records[lo:lo + batch_size]
        batch = encode_batch(chunk, vocab, model.config.max_len)
        res = model.forward(batch, train=False)
        preds = res.yhat.data.argmax(axis=-1)
        for layer, trace in res.traces:
            for b, rec in enumerate(chunk):
                ls = len(rec.tokens)
                steps = []
                for t in range(trace.steps):
                    alpha = trace.alphas[t, b, CLS_OFFSET:CLS_OFFSET + ls]
                    chosen = int(trace.chosen[t, b]) - CLS_OFFSET
                    steps.append({
                        "alpha": [float(x) for x in alpha],
                        "chosen_index": chosen,
                        "chosen_token": vocab.token(int(batch.ids[b, chosen + CLS_OFFSET])),
                    })
                out.append({
                    "record_id": lo + b,
                    "layer": layer,
                    "tokens": list(rec.tokens),
                    "aspect_start": rec.aspect_start,
                    "aspect_len": rec.aspect_len,
                    "gold": rec.label,
                    "predicted": LABELS[int(preds[b])],
                    "steps": steps,
                })
    return out


def emit_trace(model, vocab, records, out_path, batch_size=64):
    doc = {"schema": TRACE_SCHEMA,
           "reweight_len": model.config.reweight_len,
           "records": collect_traces(model, vocab, records, batch_size=batch_size)}
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return doc
