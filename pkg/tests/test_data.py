import collections
import json

import pytest

from drbert.data import (DataError, DatasetRecord, convert_semeval_xml, load_jsonl,
                         synth_dataset, write_jsonl)

GOOD_LINE = '{"tokens":["the","food","is","great"],"aspect_start":1,"aspect_len":1,"label":"positive"}'


class TestJsonl:
    def test_load_single_record(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text(GOOD_LINE + "\n")
        recs = load_jsonl(str(p))
        assert len(recs) == 1
        assert recs[0].tokens == ["the", "food", "is", "great"]
        assert recs[0].label == "positive"

    def test_span_out_of_bounds_cites_line(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text(GOOD_LINE + "\n"
                     + GOOD_LINE.replace('"aspect_start":1', '"aspect_start":9') + "\n")
        with pytest.raises(DataError, match=r"line 2.*out of bounds"):
            load_jsonl(str(p))

    def test_unknown_label_rejected(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text(GOOD_LINE.replace("positive", "conflict") + "\n")
        with pytest.raises(DataError, match=r"line 1.*conflict"):
            load_jsonl(str(p))

    def test_malformed_json_cites_line(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text(GOOD_LINE + "\n{oops\n")
        with pytest.raises(DataError, match=r"line 2.*malformed"):
            load_jsonl(str(p))

    def test_missing_key_cites_line(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text('{"tokens":["a"],"aspect_start":0,"label":"neutral"}\n')
        with pytest.raises(DataError, match=r"line 1.*aspect_len"):
            load_jsonl(str(p))

    def test_round_trip(self, tmp_path):
        recs = synth_dataset(seed=3, n_pairs=10)["train"]
        p = tmp_path / "rt.jsonl"
        write_jsonl(recs, str(p))
        assert load_jsonl(str(p)) == recs


SEMEVAL_XML = """<?xml version="1.0" encoding="UTF-8"?>
<sentences>
  <sentence id="1">
    <text>The food was great</text>
    <aspectTerms>
      <aspectTerm term="food" polarity="negative" from="4" to="8"/>
    </aspectTerms>
  </sentence>
  <sentence id="2">
    <text>Screen looks fine to me</text>
    <aspectTerms>
      <aspectTerm term="Screen" polarity="conflict" from="0" to="6"/>
      <aspectTerm term="creen" polarity="positive" from="1" to="6"/>
    </aspectTerms>
  </sentence>
  <sentence id="3">
    <text>No aspect terms here</text>
  </sentence>
  <sentence id="4">
    <text>battery life is too short</text>
    <aspectTerms>
      <aspectTerm term="battery life" polarity="neutral" from="0" to="12"/>
    </aspectTerms>
  </sentence>
</sentences>
"""


class TestSemevalConversion:
    @pytest.fixture
    def xml_path(self, tmp_path):
        p = tmp_path / "laptops.xml"
        p.write_text(SEMEVAL_XML)
        return str(p)

    def test_basic_term(self, xml_path):
        recs, report = convert_semeval_xml(xml_path)
        first = recs[0]
        assert first.tokens == ["The", "food", "was", "great"]
        assert (first.aspect_start, first.aspect_len, first.label) == (1, 1, "negative")

    def test_conflict_skipped_and_counted(self, xml_path):
        _, report = convert_semeval_xml(xml_path)
        assert report["skipped_conflict"] == 1

    def test_misaligned_offsets_skipped_with_diagnostic(self, xml_path):
        recs, report = convert_semeval_xml(xml_path)
        assert report["skipped_misaligned"] == 1
        assert any("creen" in d for d in report["diagnostics"])

    def test_multiword_span(self, xml_path):
        recs, _ = convert_semeval_xml(xml_path)
        multi = [r for r in recs if r.aspect_len == 2]
        assert multi and multi[0].tokens[:2] == ["battery", "life"]

    def test_counts_and_output_file(self, xml_path, tmp_path):
        out = tmp_path / "out.jsonl"
        recs, report = convert_semeval_xml(xml_path, out_path=str(out))
        assert report["converted"] == len(recs) == 2
        assert load_jsonl(str(out)) == recs

    def test_all_records_valid(self, xml_path):
        recs, _ = convert_semeval_xml(xml_path)
        for r in recs:
            r.validate()


class TestSynthDataset:
    def test_every_sentence_contributes_two_records(self):
        splits = synth_dataset(seed=0, n_pairs=30)
        all_recs = splits["train"] + splits["dev"] + splits["test"]
        assert len(all_recs) == 60
        by_tokens = collections.Counter(tuple(r.tokens) for r in all_recs)
        assert all(c % 2 == 0 for c in by_tokens.values())

    def test_paired_records_share_tokens_but_differ(self):
        splits = synth_dataset(seed=1, n_pairs=12)
        recs = splits["train"]
        for a, b in zip(recs[::2], recs[1::2]):
            assert a.tokens == b.tokens
            assert (a.aspect_start, a.aspect_len) != (b.aspect_start, b.aspect_len)
            assert a.label != b.label

    def test_label_marginals_balanced(self):
        splits = synth_dataset(seed=0, n_pairs=200)
        all_recs = splits["train"] + splits["dev"] + splits["test"]
        counts = collections.Counter(r.label for r in all_recs)
        for lab in ("negative", "neutral", "positive"):
            assert abs(counts[lab] / len(all_recs) - 1 / 3) <= 0.05

    def test_same_seed_identical_files(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        synth_dataset(seed=5, n_pairs=25, out_dir=str(d1))
        synth_dataset(seed=5, n_pairs=25, out_dir=str(d2))
        for name in ("train.jsonl", "dev.jsonl", "test.jsonl"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_vocabulary_is_small(self):
        splits = synth_dataset(seed=0, n_pairs=300)
        vocab = {t for split in splits.values() for r in split for t in r.tokens}
        assert len(vocab) <= 200

    def test_records_validate(self):
        splits = synth_dataset(seed=2, n_pairs=20)
        for split in splits.values():
            for r in split:
                r.validate()

    def test_zero_pairs_rejected(self):
        with pytest.raises(DataError):
            synth_dataset(seed=0, n_pairs=0)
