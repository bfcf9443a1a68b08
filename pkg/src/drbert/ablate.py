"""Ablation experiments: re-weighting length sweep and component on/off."""

from __future__ import annotations

import dataclasses

from .data import DataError
from .metrics import evaluate
from .train import train

SWEEP_CSV_HEADER = "T,accuracy,macro_f1"
COMPONENTS_CSV_HEADER = "variant,accuracy,macro_f1"


def ablate_reweight_len(model_config, train_config, train_records, test_records,
                        t_values, dev_records=None, log_fn=None):
    """Train one independent seeded model per T and evaluate on the test split.

    Returns [(T, accuracy, macro_f1)] in the given T order.
    """
    if not t_values:
        raise DataError("ablate_reweight_len: need at least one T value")
    rows = []
    for t in t_values:
        cfg = dataclasses.replace(model_config, reweight_len=int(t))
        result = train(cfg, train_config, train_records, dev_records=dev_records)
        m = evaluate(result.model, result.vocab, test_records)
        rows.append((int(t), m.accuracy, m.macro_f1))
        if log_fn:
            log_fn(rows[-1])
    return rows


def sweep_rows_to_csv(rows):
    lines = [SWEEP_CSV_HEADER]
    lines += [f"{t},{acc:.6f},{f1:.6f}" for t, acc, f1 in rows]
    return "\n".join(lines) + "\n"


def component_variants(model_config, top_ks=()):
    """The ablation ladder: bare encoder, +MLP, +adapters, adapters on the
    top-k layers only, and the full model.

    Disabling the adapters drops the h_T term from the fusion; the bare and
    +adapters variants shrink the MLP to a single linear layer.
    """
    n = model_config.n_layers
    for k in top_ks:
        if k > n:
            raise DataError(f"top-{k} adapters impossible with {n} layers")
        if k < 1:
            raise DataError(f"top-k must be >= 1, got {k}")
    variants = [
        ("base", dataclasses.replace(model_config, dra_layers=[], mlp_depth=0)),
        ("+mlp", dataclasses.replace(model_config, dra_layers=[])),
        ("+dra", dataclasses.replace(model_config, dra_layers=None, mlp_depth=0)),
    ]
    for k in top_ks:
        variants.append((f"+dra_top_{k}",
                         dataclasses.replace(model_config, dra_layers=list(range(n - k, n)))))
    variants.append(("full", dataclasses.replace(model_config, dra_layers=None)))
    return variants


def ablate_components(model_config, train_config, train_records, test_records,
                      top_ks=(), dev_records=None, log_fn=None):
    """Train and evaluate every component variant.

    Returns [(variant_name, Metrics)].
    """
    rows = []
    for name, cfg in component_variants(model_config, top_ks):
        result = train(cfg, train_config, train_records, dev_records=dev_records)
        m = evaluate(result.model, result.vocab, test_records)
        rows.append((name, m))
        if log_fn:
            log_fn((name, m.accuracy, m.macro_f1))
    return rows


def components_rows_to_csv(rows):
    lines = [COMPONENTS_CSV_HEADER]
    lines += [f"{name},{m.accuracy:.6f},{m.macro_f1:.6f}" for name, m in rows]
    return "\n".join(lines) + "\n"
