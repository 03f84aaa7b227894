import json

import pytest

from asrf import ingest
from asrf.errors import ParseError


def write_lines(path, records):
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records),
                    encoding="utf-8")


REF = {"utterance_id": "u1", "dataset_id": "tudA",
       "reference": "auf der bruecke warteten der koenig und der kronprinz"}


class TestLoadReferences:
    def test_single_record(self, tmp_path):
        path = tmp_path / "refs.jsonl"
        write_lines(path, [REF])
        utts = ingest.load_references(str(path))
        assert len(utts) == 1
        assert utts[0].utterance_id == "u1"
        assert utts[0].reference.startswith("auf der bruecke")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "refs.jsonl"
        path.write_text("", encoding="utf-8")
        assert ingest.load_references(str(path)) == []

    def test_empty_reference_rejected(self, tmp_path):
        path = tmp_path / "refs.jsonl"
        write_lines(path, [{"utterance_id": "u1", "dataset_id": "d", "reference": "  "}])
        with pytest.raises(ingest.MissingField):
            ingest.load_references(str(path))

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "refs.jsonl"
        write_lines(path, [REF, REF])
        with pytest.raises(ingest.DuplicateId):
            ingest.load_references(str(path))

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "refs.jsonl"
        path.write_text(json.dumps(REF) + "\n{broken\n", encoding="utf-8")
        with pytest.raises(ParseError) as err:
            ingest.load_references(str(path))
        assert err.value.line == 2

    def test_negative_duration_rejected(self, tmp_path):
        path = tmp_path / "refs.jsonl"
        write_lines(path, [dict(REF, duration_s=-1.0)])
        with pytest.raises(ParseError):
            ingest.load_references(str(path))

    def test_write_read_roundtrip(self, tmp_path):
        path = tmp_path / "refs.jsonl"
        utts = [
            ingest.Utterance("u1", "d1", "ein satz", audio_path="a.wav", duration_s=1.5),
            ingest.Utterance("u2", "d2", "noch ein satz"),
        ]
        ingest.write_references(str(path), utts)
        assert ingest.load_references(str(path)) == utts


class TestLoadHypotheses:
    def test_single_record(self, tmp_path):
        path = tmp_path / "hyps.jsonl"
        write_lines(path, [{"utterance_id": "u1", "model_id": "conformer_t",
                            "text": "auf der bruecke warten der koenig und der kronprinz"}])
        hyps = ingest.load_hypotheses(str(path))
        assert hyps[0].model_id == "conformer_t"

    def test_empty_text_allowed(self, tmp_path):
        path = tmp_path / "hyps.jsonl"
        write_lines(path, [{"utterance_id": "u1", "model_id": "m", "text": ""}])
        assert ingest.load_hypotheses(str(path))[0].text == ""

    def test_duplicate_pair_rejected(self, tmp_path):
        path = tmp_path / "hyps.jsonl"
        record = {"utterance_id": "u1", "model_id": "m", "text": "x"}
        write_lines(path, [record, record])
        with pytest.raises(ingest.DuplicatePair):
            ingest.load_hypotheses(str(path))

    def test_same_utterance_different_models_ok(self, tmp_path):
        path = tmp_path / "hyps.jsonl"
        write_lines(path, [{"utterance_id": "u1", "model_id": "m1", "text": "x"},
                           {"utterance_id": "u1", "model_id": "m2", "text": "x"}])
        assert len(ingest.load_hypotheses(str(path))) == 2


class TestLintManifest:
    def test_digit_warning(self):
        utt = ingest.Utterance("u1", "d", "am 3. mai")
        kinds = [w.kind for w in ingest.lint_manifest([utt])]
        assert "digit-in-reference" in kinds

    def test_spoken_domain_clean(self):
        utt = ingest.Utterance("u1", "d", "drei komma fuenf")
        assert ingest.lint_manifest([utt]) == []

    def test_empty_after_canonicalization(self):
        utt = ingest.Utterance("u1", "d", "!!!")
        kinds = [w.kind for w in ingest.lint_manifest([utt])]
        assert "empty-after-canonicalization" in kinds

    def test_symbol_warning(self):
        utt = ingest.Utterance("u1", "d", "hundert %")
        kinds = [w.kind for w in ingest.lint_manifest([utt])]
        assert kinds == ["symbol-in-reference"]

    def test_missing_audio_only_when_declared(self, tmp_path):
        present = tmp_path / "ok.wav"
        present.write_bytes(b"")
        utts = [
            ingest.Utterance("u1", "d", "wort", audio_path=str(tmp_path / "gone.wav")),
            ingest.Utterance("u2", "d", "wort", audio_path=str(present)),
            ingest.Utterance("u3", "d", "wort"),
        ]
        warnings = ingest.lint_manifest(utts)
        assert [(w.utterance_id, w.kind) for w in warnings] == [("u1", "missing-audio")]

    def test_deterministic_order(self):
        utts = [
            ingest.Utterance("u2", "d", "mit 3 zahlen und %"),
            ingest.Utterance("u1", "d", "4 mal"),
        ]
        warnings = ingest.lint_manifest(utts)
        assert [(w.utterance_id, w.kind) for w in warnings] == [
            ("u1", "digit-in-reference"),
            ("u2", "digit-in-reference"),
            ("u2", "symbol-in-reference"),
        ]
        assert ingest.lint_manifest(utts) == warnings


class TestAnnotations:
    def test_last_record_wins(self, tmp_path):
        path = tmp_path / "ann.jsonl"
        write_lines(path, [
            {"utterance_id": "u1", "category": 3, "annotator": "a", "timestamp": "t1"},
            {"utterance_id": "u1", "category": 6, "annotator": "a", "timestamp": "t2"},
        ])
        table = ingest.load_annotations(str(path))
        assert table["u1"].category == 6

    def test_absent_file_is_empty(self, tmp_path):
        assert ingest.load_annotations(str(tmp_path / "none.jsonl")) == {}

    def test_category_out_of_range(self, tmp_path):
        path = tmp_path / "ann.jsonl"
        write_lines(path, [{"utterance_id": "u1", "category": 9,
                            "annotator": "a", "timestamp": "t"}])
        with pytest.raises(ParseError):
            ingest.load_annotations(str(path))

    def test_append_then_load(self, tmp_path):
        path = tmp_path / "ann.jsonl"
        record = ingest.AnnotationRecord("u9", 6, frozenset({"year-style"}), "me",
                                         "2024-05-01T10:00:00+00:00", note="checked")
        ingest.append_annotation(str(path), record)
        table = ingest.load_annotations(str(path))
        assert table["u9"] == record


class TestTimingTotals:
    def test_totals_skip_missing_metadata(self):
        refs = [ingest.Utterance("u1", "d", "x", duration_s=2.0),
                ingest.Utterance("u2", "d", "x")]
        hyps = [ingest.Hypothesis("u1", "m", "x", processing_time_s=0.5),
                ingest.Hypothesis("u2", "m", "x", processing_time_s=0.5),
                ingest.Hypothesis("u1", "m2", "x")]
        totals = ingest.timing_totals(refs, hyps)
        assert totals == {"m": {"total_processing_s": 0.5, "total_audio_s": 2.0}}
