import importlib

import numpy as np
import pytest

train_mod = importlib.import_module("drbert.train")
from drbert.ablate import (SWEEP_CSV_HEADER, ablate_components, ablate_reweight_len,
                           component_variants, components_rows_to_csv, sweep_rows_to_csv)
from drbert.autodiff import Tensor
from drbert.data import DataError, DatasetRecord, synth_dataset
from drbert.metrics import evaluate
from drbert.model import DrBert, ModelConfig, save_checkpoint
from drbert.trace_io import collect_traces, emit_trace
from drbert.train import TrainConfig, TrainingDivergedError, TrainResult, train

SMALL = dict(n_layers=2, d_model=16, n_heads=2, d_ff=32, d_gru=16, d_attn=16,
             reweight_len=3, mlp_depth=2, dropout=0.0, max_len=32,
             freeze_encoder=True, chain_fused=False)


def small_cfgs(epochs=2, **overrides):
    return (ModelConfig(**{**SMALL, **overrides}),
            TrainConfig(seed=0, lr=2e-3, batch_size=16, epochs=epochs, patience=10, beta=0.0))


@pytest.fixture(scope="module")
def tiny_splits():
    return synth_dataset(seed=9, n_pairs=24)


class TestTrainLoop:
    def test_smoke_one_epoch_two_records(self):
        recs = [DatasetRecord(["the", "food", "is", "great"], 1, 1, "positive"),
                DatasetRecord(["the", "food", "is", "great"], 3, 1, "negative")]
        mcfg, tcfg = small_cfgs(epochs=1)
        result = train(mcfg, tcfg, recs, dev_records=recs)
        assert len(result.log) == 1
        assert "train_loss" in result.log[0]
        assert np.isfinite(result.log[0]["train_loss"])

    def test_same_seed_identical_loss_sequences(self, tiny_splits):
        mcfg, tcfg = small_cfgs(epochs=3)
        r1 = train(mcfg, tcfg, tiny_splits["train"], dev_records=tiny_splits["dev"])
        r2 = train(mcfg, tcfg, tiny_splits["train"], dev_records=tiny_splits["dev"])
        assert [e["train_loss"] for e in r1.log] == [e["train_loss"] for e in r2.log]
        for n, p in r1.model.parameters().items():
            assert np.array_equal(p.data, r2.model.parameters()[n].data), n

    def test_determinism_extends_to_checkpoint_bytes(self, tiny_splits, tmp_path):
        mcfg, tcfg = small_cfgs(epochs=2)
        paths = []
        for tag in ("a", "b"):
            r = train(mcfg, tcfg, tiny_splits["train"], dev_records=tiny_splits["dev"])
            p = tmp_path / f"{tag}.ckpt"
            save_checkpoint(r.model, r.vocab, str(p))
            paths.append(p)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_auto_dev_split_when_missing(self, tiny_splits):
        mcfg, tcfg = small_cfgs(epochs=1)
        result = train(mcfg, tcfg, tiny_splits["train"])
        assert result.log[0]["dev_accuracy"] is not None

    def test_divergence_aborts_with_diagnostics(self, tiny_splits, monkeypatch):
        class Exploding(DrBert):
            def loss(self, yhat, labels, beta=0.0):
                return Tensor(np.nan)

        monkeypatch.setattr(train_mod, "DrBert", Exploding)
        mcfg, tcfg = small_cfgs(epochs=1)
        with pytest.raises(TrainingDivergedError, match="epoch 0"):
            train(mcfg, tcfg, tiny_splits["train"], dev_records=tiny_splits["dev"])

    def test_early_stopping_on_stale_dev(self, tiny_splits):
        mcfg, tcfg = small_cfgs(epochs=50)
        tcfg.lr = 1e-13  # nothing improves after the first epoch
        tcfg.patience = 3
        result = train(mcfg, tcfg, tiny_splits["train"], dev_records=tiny_splits["dev"])
        assert len(result.log) == 4  # first epoch sets best, then 3 stale
        assert result.best_epoch == 0

    def test_empty_training_set_rejected(self):
        mcfg, tcfg = small_cfgs()
        with pytest.raises(DataError, match="empty"):
            train(mcfg, tcfg, [])


class TestAblateReweightLen:
    def test_csv_header_and_rows(self, tiny_splits):
        mcfg, tcfg = small_cfgs(epochs=1)
        rows = ablate_reweight_len(mcfg, tcfg, tiny_splits["train"], tiny_splits["test"],
                                   [2, 4], dev_records=tiny_splits["dev"])
        csv = sweep_rows_to_csv(rows)
        lines = csv.strip().split("\n")
        assert lines[0] == SWEEP_CSV_HEADER == "T,accuracy,macro_f1"
        assert len(lines) == 3
        assert [int(l.split(",")[0]) for l in lines[1:]] == [2, 4]

    def test_single_t_matches_direct_run(self, tiny_splits):
        mcfg, tcfg = small_cfgs(epochs=1)
        rows = ablate_reweight_len(mcfg, tcfg, tiny_splits["train"], tiny_splits["test"],
                                   [3], dev_records=tiny_splits["dev"])
        direct = train(mcfg, tcfg, tiny_splits["train"], dev_records=tiny_splits["dev"])
        m = evaluate(direct.model, direct.vocab, tiny_splits["test"])
        assert rows[0] == (3, m.accuracy, m.macro_f1)

    def test_empty_t_list_rejected(self, tiny_splits):
        mcfg, tcfg = small_cfgs()
        with pytest.raises(DataError):
            ablate_reweight_len(mcfg, tcfg, tiny_splits["train"], tiny_splits["test"], [])


class TestAblateComponents:
    def test_variant_ladder_structure(self):
        mcfg, _ = small_cfgs()
        names = [n for n, _ in component_variants(mcfg, top_ks=[1, 2])]
        assert names == ["base", "+mlp", "+dra", "+dra_top_1", "+dra_top_2", "full"]

    def test_base_variant_has_no_adapters_and_linear_head(self):
        mcfg, _ = small_cfgs()
        variants = dict(component_variants(mcfg))
        assert variants["base"].active_dra_layers() == []
        assert variants["base"].mlp_depth == 0

    def test_top_n_equals_full(self, tiny_splits):
        mcfg, tcfg = small_cfgs(epochs=1)
        variants = dict(component_variants(mcfg, top_ks=[mcfg.n_layers]))
        full = train(variants["full"], tcfg, tiny_splits["train"],
                     dev_records=tiny_splits["dev"])
        topn = train(variants[f"+dra_top_{mcfg.n_layers}"], tcfg, tiny_splits["train"],
                     dev_records=tiny_splits["dev"])
        m_full = evaluate(full.model, full.vocab, tiny_splits["test"])
        m_topn = evaluate(topn.model, topn.vocab, tiny_splits["test"])
        assert (m_full.accuracy, m_full.macro_f1) == (m_topn.accuracy, m_topn.macro_f1)

    def test_k_beyond_layers_rejected(self):
        mcfg, _ = small_cfgs()
        with pytest.raises(DataError, match="top-5"):
            component_variants(mcfg, top_ks=[5])

    def test_rows_and_csv(self, tiny_splits):
        mcfg, tcfg = small_cfgs(epochs=1)
        rows = ablate_components(mcfg, tcfg, tiny_splits["train"], tiny_splits["test"],
                                 dev_records=tiny_splits["dev"])
        csv = components_rows_to_csv(rows)
        assert csv.startswith("variant,accuracy,macro_f1\n")
        assert len(csv.strip().split("\n")) == 1 + len(rows)


@pytest.fixture(scope="module")
def trained(tiny_splits):
    mcfg, tcfg = small_cfgs(epochs=2)
    return train(mcfg, tcfg, tiny_splits["train"], dev_records=tiny_splits["dev"])


class TestTraces:
    def test_counting(self, trained, tiny_splits):
        recs = tiny_splits["test"][:1]
        traces = collect_traces(trained.model, trained.vocab, recs)
        assert len(traces) == trained.model.config.n_layers  # one per (record, layer)
        assert all(len(t["steps"]) == trained.model.config.reweight_len for t in traces)

    def test_alphas_are_simplex(self, trained, tiny_splits):
        traces = collect_traces(trained.model, trained.vocab, tiny_splits["test"][:4])
        for t in traces:
            for step in t["steps"]:
                assert abs(sum(step["alpha"]) - 1.0) < 1e-6
                assert all(a >= 0 for a in step["alpha"])

    def test_chosen_index_stays_inside_sentence(self, trained, tiny_splits):
        traces = collect_traces(trained.model, trained.vocab, tiny_splits["test"][:4])
        for t in traces:
            for step in t["steps"]:
                assert 0 <= step["chosen_index"] < len(t["tokens"])
                assert step["chosen_token"] not in ("[CLS]", "[SEP]", "[PAD]")

    def test_emit_writes_versioned_schema(self, trained, tiny_splits, tmp_path):
        out = tmp_path / "trace.json"
        doc = emit_trace(trained.model, trained.vocab, tiny_splits["test"][:2], str(out))
        assert doc["schema"] == "drbert-trace/1"
        assert out.exists() and out.stat().st_size > 0

    def test_vocab_mismatch_rejected(self, trained, tiny_splits):
        from drbert.text import Vocab
        wrong = Vocab(["only", "these", "words"])
        with pytest.raises(DataError, match="mismatch"):
            collect_traces(trained.model, wrong, tiny_splits["test"][:1])
