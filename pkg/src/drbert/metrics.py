"""Accuracy and macro-F1 from a 3x3 confusion matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LABELS, LABEL_TO_ID, DataError


@dataclass
class Metrics:
    accuracy: float
    macro_f1: float
    precision: list
    recall: list
    f1: list
    support: list
    confusion: list  # rows = gold, cols = predicted

    def to_dict(self):
        return {"accuracy": self.accuracy, "macro_f1": self.macro_f1,
                "per_class": {LABELS[i]: {"precision": self.precision[i],
                                          "recall": self.recall[i],
                                          "f1": self.f1[i],
                                          "support": self.support[i]}
                              for i in range(len(LABELS))},
                "confusion": self.confusion}


def confusion_matrix(golds, preds, n_classes=3):
    conf = np.zeros((n_classes, n_classes), dtype=np.int64)
    for g, p in zip(golds, preds):
        conf[g, p] += 1
    return conf


def metrics_from_confusion(conf):
    """Per-class precision/recall/F1 with 0/0 defined as 0; macro-F1 is the
    unweighted mean over classes."""
    conf = np.asarray(conf, dtype=np.int64)
    total = conf.sum()
    if total == 0:
        raise DataError("metrics_from_confusion: empty confusion matrix")
    tp = np.diag(conf).astype(np.float64)
    pred_tot = conf.sum(axis=0).astype(np.float64)
    gold_tot = conf.sum(axis=1).astype(np.float64)
    prec = np.divide(tp, pred_tot, out=np.zeros_like(tp), where=pred_tot > 0)
    rec = np.divide(tp, gold_tot, out=np.zeros_like(tp), where=gold_tot > 0)
    denom = prec + rec
    f1 = np.divide(2 * prec * rec, denom, out=np.zeros_like(tp), where=denom > 0)
    return Metrics(accuracy=float(tp.sum() / total), macro_f1=float(f1.mean()),
                   precision=prec.tolist(), recall=rec.tolist(), f1=f1.tolist(),
                   support=gold_tot.astype(int).tolist(), confusion=conf.tolist())


def evaluate(model, vocab, records, batch_size=64):
    """Run the model over a dataset and reduce to Metrics."""
    if not records:
        raise DataError("evaluate: empty dataset")
    preds = model.predict(records, vocab, batch_size=batch_size)
    golds = [LABEL_TO_ID[r.label] for r in records]
    return metrics_from_confusion(confusion_matrix(golds, preds))
