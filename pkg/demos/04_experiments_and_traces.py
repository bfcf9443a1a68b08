#!/usr/bin/env python3
"""The experiment tooling: re-weighting length sweep, the component ladder,
and trace export. Writes its artifacts to demos/out/.

Uses a deliberately small profile so the whole script runs in well under a
minute; the numbers demonstrate the tooling, not tuned performance.

Run: python3 demos/04_experiments_and_traces.py
"""

import json
import pathlib

from drbert.ablate import (ablate_components, ablate_reweight_len, components_rows_to_csv,
                           sweep_rows_to_csv)
from drbert.data import synth_dataset
from drbert.model import ModelConfig
from drbert.trace_io import emit_trace
from drbert.train import TrainConfig, train

out_dir = pathlib.Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

splits = synth_dataset(seed=1, n_pairs=40)
model_cfg = ModelConfig(n_layers=2, d_model=16, n_heads=2, d_ff=32, d_gru=16, d_attn=16,
                        reweight_len=3, mlp_depth=1, dropout=0.0, max_len=32,
                        freeze_encoder=True, chain_fused=False)
train_cfg = TrainConfig(seed=0, lr=2e-3, batch_size=16, epochs=4, patience=10, beta=0.0)

print("== sweep over the re-weighting length ==")
rows = ablate_reweight_len(model_cfg, train_cfg, splits["train"], splits["test"],
                           t_values=[2, 4, 7, 10], dev_records=splits["dev"],
                           log_fn=lambda r: print(f"  T={r[0]:>2}: acc={r[1]:.3f} f1={r[2]:.3f}"))
sweep_csv = out_dir / "t_sweep.csv"
sweep_csv.write_text(sweep_rows_to_csv(rows))
print("wrote", sweep_csv)

print("\n== component ladder ==")
ladder = ablate_components(model_cfg, train_cfg, splits["train"], splits["test"],
                           top_ks=[1], dev_records=splits["dev"],
                           log_fn=lambda r: print(f"  {r[0]:>11}: acc={r[1]:.3f}"))
comp_csv = out_dir / "components.csv"
comp_csv.write_text(components_rows_to_csv(ladder))
print("wrote", comp_csv)

print("\n== traces: what the adapter reads, step by step ==")
result = train(model_cfg, train_cfg, splits["train"], dev_records=splits["dev"])
trace_path = out_dir / "traces.json"
doc = emit_trace(result.model, result.vocab, splits["test"][:6], str(trace_path))
rec = doc["records"][0]
print(f"record 0, layer {rec['layer']}: {' '.join(rec['tokens'])}")
for i, step in enumerate(rec["steps"], start=1):
    print(f"  step {i}: chose {step['chosen_token']!r} "
          f"(weight {max(step['alpha']):.3f})")
print("wrote", trace_path, f"({len(doc['records'])} trace records)")
print("\nrender these with the traceplots package:")
print("  node traceplots/dist/cli.js heatmap --trace demos/out/traces.json "
      "--record 0 --layer 0 --out heatmap.png")
print("  node traceplots/dist/cli.js sweep --csv demos/out/t_sweep.csv --out sweep.png")
