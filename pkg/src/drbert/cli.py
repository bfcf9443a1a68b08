"""Command-line interface.

Exit codes: 0 success, 2 validation error (bad inputs, config, checkpoint),
3 runtime error (divergence, internal numeric failure).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .ablate import (ablate_components, ablate_reweight_len, components_rows_to_csv,
                     sweep_rows_to_csv)
from .autodiff import GraphError, ShapeError
from .data import DataError, convert_semeval_xml, load_jsonl, synth_dataset
from .metrics import evaluate
from .model import CheckpointError, ConfigError, ModelConfig, load_checkpoint, save_checkpoint
from .text import TokenizeError
from .trace_io import emit_trace
from .train import TrainConfig, TrainingDivergedError, train

VALIDATION_ERRORS = (DataError, ConfigError, TokenizeError, CheckpointError,
                     ShapeError, FileNotFoundError, IsADirectoryError)


def _load_config(path):
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: malformed JSON ({e.msg})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object with 'model'/'train' sections")
    model_cfg = ModelConfig.from_dict(raw.get("model", {}))
    train_cfg = TrainConfig.from_dict(raw.get("train", {}))
    return model_cfg, train_cfg


def _load_split_dir(data_dir):
    paths = {k: os.path.join(data_dir, f"{k}.jsonl") for k in ("train", "dev", "test")}
    if not os.path.exists(paths["train"]):
        raise DataError(f"{data_dir}: no train.jsonl found")
    splits = {"train": load_jsonl(paths["train"])}
    for k in ("dev", "test"):
        splits[k] = load_jsonl(paths[k]) if os.path.exists(paths[k]) else None
    return splits


def _parse_t_values(spec):
    values = []
    for part in spec.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            values.extend(range(int(lo), int(hi) + 1))
        elif part:
            values.append(int(part))
    if not values:
        raise DataError(f"no T values in {spec!r}")
    return values


def cmd_synth(args):
    synth_dataset(args.seed, args.pairs, out_dir=args.out)
    print(f"wrote train/dev/test JSONL to {args.out}")
    return 0


def cmd_train(args):
    model_cfg, train_cfg = _load_config(args.config)
    splits = _load_split_dir(args.data)
    result = train(model_cfg, train_cfg, splits["train"], dev_records=splits["dev"],
                   log_fn=lambda e: print(json.dumps(e)))
    save_checkpoint(result.model, result.vocab, args.out, optimizer=result.optimizer)
    print(f"best epoch {result.best_epoch}; checkpoint written to {args.out}")
    return 0


def cmd_eval(args):
    model, vocab, _ = load_checkpoint(args.ckpt)
    records = load_jsonl(args.data)
    metrics = evaluate(model, vocab, records)
    if args.json:
        print(json.dumps(metrics.to_dict(), sort_keys=True))
    else:
        print(f"accuracy {metrics.accuracy:.4f}  macro_f1 {metrics.macro_f1:.4f}")
        for lab, row in metrics.to_dict()["per_class"].items():
            print(f"  {lab:8s} p={row['precision']:.4f} r={row['recall']:.4f} "
                  f"f1={row['f1']:.4f} n={row['support']}")
    return 0


def cmd_trace(args):
    model, vocab, _ = load_checkpoint(args.ckpt)
    records = load_jsonl(args.data)
    doc = emit_trace(model, vocab, records, args.out)
    print(f"wrote {len(doc['records'])} trace records to {args.out}")
    return 0


def cmd_ablate_t(args):
    model_cfg, train_cfg = _load_config(args.config)
    splits = _load_split_dir(args.data)
    if splits["test"] is None:
        raise DataError(f"{args.data}: ablation needs a test.jsonl")
    rows = ablate_reweight_len(model_cfg, train_cfg, splits["train"], splits["test"],
                               _parse_t_values(args.t), dev_records=splits["dev"],
                               log_fn=lambda r: print(f"T={r[0]} acc={r[1]:.4f} f1={r[2]:.4f}"))
    csv = sweep_rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        print(csv, end="")
    return 0


def cmd_ablate_components(args):
    model_cfg, train_cfg = _load_config(args.config)
    splits = _load_split_dir(args.data)
    if splits["test"] is None:
        raise DataError(f"{args.data}: ablation needs a test.jsonl")
    top_ks = [int(k) for k in args.top_k.split(",") if k.strip()] if args.top_k else []
    rows = ablate_components(model_cfg, train_cfg, splits["train"], splits["test"],
                             top_ks=top_ks, dev_records=splits["dev"],
                             log_fn=lambda r: print(f"{r[0]} acc={r[1]:.4f} f1={r[2]:.4f}"))
    csv = components_rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        print(csv, end="")
    return 0


def cmd_convert(args):
    _, report = convert_semeval_xml(args.xml, out_path=args.out)
    print(f"converted {report['converted']} records to {args.out} "
          f"(skipped {report['skipped_conflict']} conflict, "
          f"{report['skipped_misaligned']} misaligned)")
    for diag in report["diagnostics"]:
        print(f"  skipped: {diag}", file=sys.stderr)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="drbert",
                                description="Dynamic re-weighting sentiment classifier")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate the synthetic paired-aspect corpus")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--pairs", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_synth)

    s = sub.add_parser("train", help="train a model on a data directory")
    s.add_argument("--config", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_train)

    s = sub.add_parser("eval", help="evaluate a checkpoint on a JSONL file")
    s.add_argument("--ckpt", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(fn=cmd_eval)

    s = sub.add_parser("trace", help="export per-step re-weighting traces")
    s.add_argument("--ckpt", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_trace)

    s = sub.add_parser("ablate-t", help="sweep the re-weighting length")
    s.add_argument("--t", required=True, help="e.g. 2..10 or 2,5,7")
    s.add_argument("--config", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(fn=cmd_ablate_t)

    s = sub.add_parser("ablate-components", help="component on/off ablation ladder")
    s.add_argument("--config", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--top-k", default="", help="comma list of top-k adapter variants")
    s.add_argument("--out", default=None)
    s.set_defaults(fn=cmd_ablate_components)

    s = sub.add_parser("convert", help="convert SemEval-2014 aspectTerm XML to JSONL")
    s.add_argument("--xml", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_convert)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except VALIDATION_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (TrainingDivergedError, GraphError) as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
