import json

import pytest

from drbert.cli import main
from drbert.train import TrainingDivergedError

CONFIG = {
    "model": {"n_layers": 2, "d_model": 16, "n_heads": 2, "d_ff": 32, "d_gru": 16,
              "d_attn": 16, "reweight_len": 2, "mlp_depth": 1, "dropout": 0.0,
              "max_len": 32, "freeze_encoder": True, "chain_fused": False},
    "train": {"seed": 0, "lr": 0.002, "batch_size": 16, "epochs": 2, "patience": 5,
              "beta": 0.0},
}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "config.json"
    cfg.write_text(json.dumps(CONFIG))
    data = root / "data"
    assert main(["synth", "--seed", "3", "--pairs", "20", "--out", str(data)]) == 0
    ckpt = root / "model.ckpt"
    assert main(["train", "--config", str(cfg), "--data", str(data),
                 "--out", str(ckpt)]) == 0
    return {"root": root, "cfg": cfg, "data": data, "ckpt": ckpt}


class TestPipeline:
    def test_eval_json_output(self, workdir, capsys):
        code = main(["eval", "--ckpt", str(workdir["ckpt"]),
                     "--data", str(workdir["data"] / "test.jsonl"), "--json"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert 0.0 <= out["accuracy"] <= 1.0
        assert set(out["per_class"]) == {"negative", "neutral", "positive"}

    def test_eval_text_output(self, workdir, capsys):
        assert main(["eval", "--ckpt", str(workdir["ckpt"]),
                     "--data", str(workdir["data"] / "test.jsonl")]) == 0
        assert "accuracy" in capsys.readouterr().out

    def test_trace_roundtrip(self, workdir):
        out = workdir["root"] / "trace.json"
        assert main(["trace", "--ckpt", str(workdir["ckpt"]),
                     "--data", str(workdir["data"] / "test.jsonl"),
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["schema"] == "drbert-trace/1"
        assert doc["records"]

    def test_ablate_t_csv(self, workdir):
        out = workdir["root"] / "sweep.csv"
        assert main(["ablate-t", "--t", "2,3", "--config", str(workdir["cfg"]),
                     "--data", str(workdir["data"]), "--out", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "T,accuracy,macro_f1"
        assert len(lines) == 3

    def test_ablate_components_csv(self, workdir):
        out = workdir["root"] / "components.csv"
        assert main(["ablate-components", "--config", str(workdir["cfg"]),
                     "--data", str(workdir["data"]), "--top-k", "1",
                     "--out", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "variant,accuracy,macro_f1"
        assert [l.split(",")[0] for l in lines[1:]] == ["base", "+mlp", "+dra",
                                                        "+dra_top_1", "full"]

    def test_convert(self, workdir):
        xml = workdir["root"] / "mini.xml"
        xml.write_text('<sentences><sentence id="1"><text>nice screen</text>'
                       '<aspectTerms><aspectTerm term="screen" polarity="positive" '
                       'from="5" to="11"/></aspectTerms></sentence></sentences>')
        out = workdir["root"] / "converted.jsonl"
        assert main(["convert", "--xml", str(xml), "--out", str(out)]) == 0
        rec = json.loads(out.read_text().strip())
        assert rec["tokens"] == ["nice", "screen"]


class TestExitCodes:
    def test_missing_checkpoint_is_validation_error(self, workdir, capsys):
        code = main(["eval", "--ckpt", str(workdir["root"] / "nope.ckpt"),
                     "--data", str(workdir["data"] / "test.jsonl")])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_garbage_checkpoint_is_validation_error(self, workdir, capsys):
        bad = workdir["root"] / "bad.ckpt"
        bad.write_bytes(b"garbage file, definitely not a checkpoint")
        assert main(["eval", "--ckpt", str(bad),
                     "--data", str(workdir["data"] / "test.jsonl")]) == 2

    def test_malformed_dataset_is_validation_error(self, workdir, capsys):
        bad = workdir["root"] / "bad.jsonl"
        bad.write_text("{not json\n")
        assert main(["eval", "--ckpt", str(workdir["ckpt"]), "--data", str(bad)]) == 2
        assert "line 1" in capsys.readouterr().err

    def test_bad_config_field_is_validation_error(self, workdir):
        cfg = workdir["root"] / "bad_config.json"
        cfg.write_text(json.dumps({"model": {"n_layres": 2}}))
        assert main(["train", "--config", str(cfg), "--data", str(workdir["data"]),
                     "--out", str(workdir["root"] / "x.ckpt")]) == 2

    def test_divergence_is_runtime_error(self, workdir, monkeypatch, capsys):
        import drbert.cli as cli_mod

        def explode(*a, **k):
            raise TrainingDivergedError("non-finite loss at epoch 0, batch 0")

        monkeypatch.setattr(cli_mod, "train", explode)
        code = main(["train", "--config", str(workdir["cfg"]),
                     "--data", str(workdir["data"]),
                     "--out", str(workdir["root"] / "y.ckpt")])
        assert code == 3
        assert "runtime error" in capsys.readouterr().err
